"""Response generation from selected snippets.

Three routes: the extractive baseline (one uniformly chosen selected
snippet, seeded per instance), the native template generator, and the
external neural generator fed a serialized GenerationInput.

Template grammar (parsed back by the faithfulness tests, so treat as a
contract):

* unanimous:  "All <m> guests say <aspect> is good|bad." with "Both" for
  m=2 and "The one guest who mentions <aspect> says it is ..." for m=1;
* mixed:      "<maj> of <m> guests say <aspect> is good|bad, but <min> of
  <m> say it is bad|good" with positive first on ties;
* neutral:    folded into ", and <k> of <m> found it just ok"; a purely
  neutral entity renders the unanimous form with "just ok";
* m counts opinionated snippets only (positive + neutral + negative);
  snippets without sentiment add a no-opinion clause and are never
  counted into m.

Multi-entity instances render one clause per entity, ordered by first
mention in the dialogue, each prefixed with the entity name; the reply
closes with a task-continuation prompt picked deterministically from a
fixed list.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from .absa import Polarity, SentimentAnnotation, augment_snippet
from .corpus import DialogueContext, KnowledgeBase, SnippetRef, tokenize
from .errors import ConfigError, GenerationError
from .track import match_entities_per_turn, normalize_name

logger = logging.getLogger(__name__)

CONTINUATIONS = (
    "Would you like me to book it?",
    "Shall I look for something else?",
    "Is there anything else I can help you with?",
    "Would you like any other details?",
)

NO_FEEDBACK_TEXT = "I don't have guest feedback on that."

_FALLBACK_ASPECT_SKIP = frozenset(
    "does do is are the a an it they their there that this have has had was were "
    "any how what about of in on at to for with and or can could would you i we "
    "me my your strong good bad great nice really very".split()
)


@dataclass(frozen=True)
class SentimentTally:
    positive: int = 0
    neutral: int = 0
    negative: int = 0
    no_opinion: int = 0

    @property
    def total(self) -> int:
        return self.positive + self.neutral + self.negative + self.no_opinion

    @property
    def opinionated(self) -> int:
        return self.positive + self.neutral + self.negative

    def as_dict(self) -> dict[str, int]:
        return {
            "positive": self.positive,
            "neutral": self.neutral,
            "negative": self.negative,
            "no_opinion": self.no_opinion,
            "total": self.total,
        }


@dataclass(frozen=True)
class Response:
    text: str
    provenance: tuple[tuple[SnippetRef, Polarity], ...]


@dataclass(frozen=True)
class GenerationInput:
    snippet_texts: tuple[str, ...]
    snippet_refs: tuple[SnippetRef, ...]
    context_turns: tuple[tuple[str, str], ...]
    entity_names: tuple[str, ...]
    polarities: tuple[Polarity, ...]

    def serialize(self) -> str:
        """Canonical wire form: compact JSON, sorted keys, UTF-8 text."""
        doc = {
            "context": [{"speaker": s, "text": t} for s, t in self.context_turns],
            "entities": list(self.entity_names),
            "snippets": list(self.snippet_texts),
        }
        return json.dumps(doc, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def generate_ext(selection, kb: KnowledgeBase, seed: int) -> Response:
    """Extractive baseline: verbatim text of one uniformly chosen snippet.

    The RNG is seeded from (seed, instance_id), so the draw is stable
    regardless of processing order or parallelism.
    """
    refs = sorted(selection.selected)
    if not refs:
        raise ConfigError(f"{selection.instance_id}: empty selection; nothing to extract")
    rng = random.Random(f"{seed}:{selection.instance_id}")
    ref = refs[rng.randrange(len(refs))]
    return Response(text=kb.snippet(ref).text, provenance=((ref, Polarity.NONE),))


def tally_sentiments(
    selection,
    annotations: Mapping[SnippetRef, SentimentAnnotation],
) -> dict[tuple[str, str], SentimentTally]:
    """Exact per-entity polarity counts over the selected snippets."""
    counts: dict[tuple[str, str], dict[Polarity, int]] = {}
    for ref in sorted(selection.selected):
        ann = annotations.get(ref)
        if ann is None:
            raise ConfigError(f"{selection.instance_id}: missing annotation for {ref}")
        per = counts.setdefault(ref.entity_key(), {p: 0 for p in Polarity})
        per[ann.polarity] += 1
    return {
        key: SentimentTally(
            positive=per[Polarity.POSITIVE],
            neutral=per[Polarity.NEUTRAL],
            negative=per[Polarity.NEGATIVE],
            no_opinion=per[Polarity.NONE],
        )
        for key, per in counts.items()
    }


def _aspect_for_entity(
    refs: Sequence[SnippetRef],
    annotations: Mapping[SnippetRef, SentimentAnnotation],
    context: DialogueContext,
) -> str:
    counts: dict[str, int] = {}
    for ref in refs:
        ann = annotations.get(ref)
        if ann and ann.aspect_term:
            counts[ann.aspect_term] = counts.get(ann.aspect_term, 0) + 1
    if counts:
        return min(counts, key=lambda a: (-counts[a], a))
    for token in tokenize(context.last_user_utterance.text):
        if token.isalpha() and token not in _FALLBACK_ASPECT_SKIP:
            return token
    return "it"


def _polar_word(polarity: Polarity) -> str:
    return "good" if polarity is Polarity.POSITIVE else "bad"


def _entity_clause(tally: SentimentTally, aspect: str) -> str:
    pos, neu, neg = tally.positive, tally.neutral, tally.negative
    m = tally.opinionated
    if m == 0:
        return "guests mention it without expressing a clear opinion"

    if neu == m:  # purely neutral
        if m == 1:
            return f"the one guest who mentions {aspect} found it just ok"
        if m == 2:
            return f"both guests found {aspect} just ok"
        return f"all {m} guests found {aspect} just ok"

    if pos == m or neg == m:  # unanimous polar
        word = _polar_word(Polarity.POSITIVE if pos == m else Polarity.NEGATIVE)
        if m == 1:
            return f"the one guest who mentions {aspect} says it is {word}"
        if m == 2:
            return f"both guests say {aspect} is {word}"
        return f"all {m} guests say {aspect} is {word}"

    parts = []
    if pos > 0 and neg > 0:
        if pos >= neg:  # positive first on ties
            maj, maj_w, minr, min_w = pos, "good", neg, "bad"
        else:
            maj, maj_w, minr, min_w = neg, "bad", pos, "good"
        parts.append(f"{maj} of {m} guests say {aspect} is {maj_w}, but {minr} of {m} say it is {min_w}")
    elif pos > 0:
        parts.append(f"{pos} of {m} guests say {aspect} is good")
    else:
        parts.append(f"{neg} of {m} guests say {aspect} is bad")
    if neu > 0:
        parts.append(f"and {neu} of {m} found it just ok")
    return ", ".join(parts)


def _entity_order(
    entity_keys: Sequence[tuple[str, str]],
    context: DialogueContext,
    kb: KnowledgeBase,
) -> list[tuple[str, str]]:
    """Order by first mention in the dialogue: turn, then position in the turn."""
    first_mention: dict[tuple[str, str], tuple[int, int]] = {}
    for m in match_entities_per_turn(context, kb):
        key = (m.domain, m.entity_id)
        turn_text = " ".join(tokenize(context.utterances[m.turn_index].text))
        variant = normalize_name(kb.entity(*key).name).normalized
        position = turn_text.find(variant.split()[0]) if variant else -1
        mention = (m.turn_index, position if position >= 0 else 10 ** 6)
        if key not in first_mention or mention < first_mention[key]:
            first_mention[key] = mention
    return sorted(entity_keys, key=lambda k: (first_mention.get(k, (10 ** 9, 0)), k))


def _continuation(instance_id: str) -> str:
    digest = hashlib.md5(instance_id.encode("utf-8")).digest()
    return CONTINUATIONS[digest[0] % len(CONTINUATIONS)]


def generate_template(
    context: DialogueContext,
    selection,
    annotations: Mapping[SnippetRef, SentimentAnnotation],
    kb: KnowledgeBase,
) -> Response:
    """Deterministic two-sided surface text with exact proportion counts."""
    if not selection.selected:
        return Response(text=NO_FEEDBACK_TEXT, provenance=())
    tallies = tally_sentiments(selection, annotations)
    provenance = tuple(
        (ref, annotations[ref].polarity) for ref in sorted(selection.selected)
    )
    by_entity: dict[tuple[str, str], list[SnippetRef]] = {}
    for ref in sorted(selection.selected):
        by_entity.setdefault(ref.entity_key(), []).append(ref)

    ordered = _entity_order(list(by_entity), context, kb)
    multi = len(ordered) > 1
    sentences = []
    for i, key in enumerate(ordered):
        aspect = _aspect_for_entity(by_entity[key], annotations, context)
        clause = _entity_clause(tallies[key], aspect)
        if multi:
            name = kb.entity(*key).name
            prefix = f"At {name}, " if i == 0 else f"Meanwhile, at {name}, "
            sentence = prefix + clause + "."
        else:
            sentence = clause[0].upper() + clause[1:] + "."
        sentences.append(sentence)
    sentences.append(_continuation(selection.instance_id))
    return Response(text=" ".join(sentences), provenance=provenance)


def build_generation_input(
    context: DialogueContext,
    selection,
    annotations: Mapping[SnippetRef, SentimentAnnotation],
    kb: KnowledgeBase,
    use_absa: bool,
    scores: Mapping[SnippetRef, float] | None = None,
) -> GenerationInput:
    """Snippets (sentiment-augmented when use_absa) then context, canonically ordered.

    Ordering is recomputed here from scores (descending) with SnippetRef
    tie-breaks, so the caller's selection iteration order never leaks into
    the serialized input.
    """
    refs = sorted(selection.selected, key=lambda r: (-(scores or {}).get(r, 0.0), r))
    texts = []
    polarities = []
    for ref in refs:
        sn = kb.snippet(ref)
        ann = annotations.get(ref)
        if use_absa and ann is not None:
            texts.append(augment_snippet(sn, ann))
        else:
            texts.append(sn.text)
        polarities.append(ann.polarity if ann is not None else Polarity.NONE)
    entity_names = [kb.entity(*key).name for key in sorted({r.entity_key() for r in refs})]
    return GenerationInput(
        snippet_texts=tuple(texts),
        snippet_refs=tuple(refs),
        context_turns=tuple((u.speaker.value, u.text) for u in context.utterances),
        entity_names=tuple(entity_names),
        polarities=tuple(polarities),
    )


def external_generate(client, gen_input: GenerationInput) -> Response:
    """Delegate surface realization to the generator service."""
    text = client.generate(
        context=[{"speaker": s, "text": t} for s, t in gen_input.context_turns],
        snippets=list(gen_input.snippet_texts),
    )
    if not text or not text.strip():
        raise GenerationError("generator service returned empty text")
    provenance = tuple(zip(gen_input.snippet_refs, gen_input.polarities))
    return Response(text=text, provenance=provenance)
