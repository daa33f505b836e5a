"""Data model and ingestion for dialogues, labels, and the review knowledge base.

On-disk layout (all files UTF-8 JSON):

    <data_dir>/knowledge.json
    <data_dir>/<split>/logs.json
    <data_dir>/<split>/labels.json

knowledge.json maps domain -> entity_id -> {"name": str, "reviews":
{review_id -> {"sentences": {sentence_id -> text}}}}.   logs.json is an
array of dialogues, each an array of {"speaker": "U"|"S", "text": str}.
labels.json is an array parallel to logs.json; each element is either
{"target": false} or {"target": true, "knowledge": [{"domain",
"entity_id", "review_id", "sent_id"}, ...], "response": str}.

A small adapter tolerates upstream field drift ("doc_id" for
"review_id", integer ids, long speaker names); everything is normalized
to the canonical names above at load time, so a round trip through
save_split/save_knowledge_base re-parses to an identical model.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterator

from .errors import AlignmentError, IntegrityError, ParseError

logger = logging.getLogger(__name__)

SPLIT_NAMES = ("train", "val", "test")
DOMAINS = ("hotel", "restaurant")

# Lowercase, Unicode-aware word segmentation with punctuation split into
# separate tokens.  Apostrophe clitics ("'s", "'t") stay attached to the
# apostrophe so possessives survive as single tokens.
_TOKEN_RE = re.compile(r"[^\W\d_]+|\d+|['’][^\W\d_]+|[^\w\s]")


def tokenize(text: str) -> list[str]:
    """Shared engine-wide tokenizer: lowercased word/punctuation tokens."""
    return _TOKEN_RE.findall(text.lower())


class Speaker(str, Enum):
    USER = "U"
    SYSTEM = "S"


@dataclass(frozen=True)
class Utterance:
    speaker: Speaker
    text: str
    turn_index: int

    def __post_init__(self):
        if not self.text.strip():
            raise IntegrityError(f"empty utterance text at turn {self.turn_index}")
        if self.turn_index < 0:
            raise IntegrityError("turn_index must be non-negative")


@dataclass(frozen=True)
class DialogueContext:
    """Alternating user/system utterances ending in a user turn."""

    utterances: tuple[Utterance, ...]
    instance_id: str

    def __post_init__(self):
        if not self.utterances:
            raise IntegrityError(f"{self.instance_id}: dialogue has no utterances")
        prev = None
        for i, utt in enumerate(self.utterances):
            if utt.turn_index != i:
                raise IntegrityError(f"{self.instance_id}: turn_index not sequential")
            if prev is not None and utt.speaker == prev:
                raise IntegrityError(f"{self.instance_id}: speakers do not alternate at turn {i}")
            prev = utt.speaker
        if self.utterances[-1].speaker is not Speaker.USER:
            raise IntegrityError(f"{self.instance_id}: last utterance must be a user turn")

    @property
    def last_user_utterance(self) -> Utterance:
        return self.utterances[-1]


@dataclass(frozen=True, order=True)
class SnippetRef:
    """Address of one review sentence inside the knowledge base."""

    domain: str
    entity_id: str
    review_id: str
    sentence_id: str

    def entity_key(self) -> tuple[str, str]:
        return (self.domain, self.entity_id)

    def as_dict(self) -> dict[str, str]:
        return {
            "domain": self.domain,
            "entity_id": self.entity_id,
            "review_id": self.review_id,
            "sent_id": self.sentence_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SnippetRef":
        review = d.get("review_id", d.get("doc_id"))
        sent = d.get("sent_id", d.get("sentence_id"))
        if review is None or sent is None or "domain" not in d or "entity_id" not in d:
            raise IntegrityError(f"incomplete snippet reference: {d!r}")
        return cls(str(d["domain"]), str(d["entity_id"]), str(review), str(sent))


@dataclass(frozen=True)
class KnowledgeSnippet:
    ref: SnippetRef
    text: str

    def __post_init__(self):
        if not self.text.strip():
            raise IntegrityError(f"empty snippet text at {self.ref}")


@dataclass(frozen=True)
class Entity:
    entity_id: str
    domain: str
    name: str

    def __post_init__(self):
        if not self.name.strip():
            raise IntegrityError(f"entity {self.domain}/{self.entity_id} has empty name")

    def key(self) -> tuple[str, str]:
        return (self.domain, self.entity_id)


class KnowledgeBase:
    """Entities and their review sentences, immutable after load."""

    def __init__(self, entities: list[Entity], reviews: dict[tuple[str, str], dict[str, list[KnowledgeSnippet]]]):
        self._entities: dict[tuple[str, str], Entity] = {}
        for ent in entities:
            if ent.key() in self._entities:
                raise IntegrityError(f"duplicate entity {ent.domain}/{ent.entity_id}")
            self._entities[ent.key()] = ent
        self._reviews = reviews
        self._snippets: dict[SnippetRef, KnowledgeSnippet] = {}
        for key, revs in reviews.items():
            if key not in self._entities:
                raise IntegrityError(f"reviews for unknown entity {key}")
            for snippets in revs.values():
                for sn in snippets:
                    if sn.ref in self._snippets:
                        raise IntegrityError(f"duplicate snippet ref {sn.ref}")
                    self._snippets[sn.ref] = sn

    @property
    def num_entities(self) -> int:
        return len(self._entities)

    @property
    def num_reviews(self) -> int:
        return sum(len(revs) for revs in self._reviews.values())

    @property
    def num_snippets(self) -> int:
        return len(self._snippets)

    def entities(self, domain: str | None = None) -> list[Entity]:
        ents = self._entities.values()
        if domain is not None:
            ents = (e for e in ents if e.domain == domain)
        return sorted(ents, key=lambda e: (e.domain, e.entity_id))

    def entity(self, domain: str, entity_id: str) -> Entity:
        try:
            return self._entities[(domain, entity_id)]
        except KeyError:
            raise IntegrityError(f"unknown entity {domain}/{entity_id}") from None

    def has_entity(self, domain: str, entity_id: str) -> bool:
        return (domain, entity_id) in self._entities

    def snippet(self, ref: SnippetRef) -> KnowledgeSnippet:
        try:
            return self._snippets[ref]
        except KeyError:
            raise IntegrityError(f"unresolved snippet ref {ref}") from None

    def contains(self, ref: SnippetRef) -> bool:
        return ref in self._snippets

    def snippets_of_entity(self, domain: str, entity_id: str) -> list[KnowledgeSnippet]:
        revs = self._reviews.get((domain, entity_id), {})
        return [sn for snippets in revs.values() for sn in snippets]

    def all_snippets(self) -> Iterator[KnowledgeSnippet]:
        for key in sorted(self._reviews):
            for snippets in self._reviews[key].values():
                yield from snippets

    def stats(self) -> dict[str, int]:
        return {
            "entities": self.num_entities,
            "reviews": self.num_reviews,
            "snippets": self.num_snippets,
        }


@dataclass(frozen=True)
class InstanceLabel:
    target: bool
    gold_snippets: frozenset[SnippetRef] = frozenset()
    reference_response: str | None = None

    def __post_init__(self):
        if self.target:
            if not self.gold_snippets:
                raise IntegrityError("target instance without gold snippets")
            if self.reference_response is None:
                raise IntegrityError("target instance without reference response")
        else:
            if self.gold_snippets:
                raise IntegrityError("non-target instance with gold snippets")
            if self.reference_response is not None:
                raise IntegrityError("non-target instance with reference response")

    def gold_entity_keys(self) -> list[tuple[str, str]]:
        return sorted({ref.entity_key() for ref in self.gold_snippets})


@dataclass(frozen=True)
class Split:
    name: str
    instances: tuple[tuple[DialogueContext, InstanceLabel], ...]

    def __post_init__(self):
        ids = [ctx.instance_id for ctx, _ in self.instances]
        if len(ids) != len(set(ids)):
            raise IntegrityError(f"duplicate instance ids in split {self.name}")

    def __len__(self) -> int:
        return len(self.instances)

    def target_instances(self) -> list[tuple[DialogueContext, InstanceLabel]]:
        return [(ctx, lab) for ctx, lab in self.instances if lab.target]


def _load_json(path: Path):
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(str(exc), path=str(path)) from exc
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        offset = len(raw[: exc.pos].encode("utf-8"))
        raise ParseError(exc.msg, path=str(path), offset=offset) from exc


def load_knowledge_base(path: str | Path) -> KnowledgeBase:
    """Load and fully index knowledge.json (see module docstring for layout)."""
    path = Path(path)
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise ParseError("knowledge document must be a JSON object", path=str(path))
    entities: list[Entity] = []
    reviews: dict[tuple[str, str], dict[str, list[KnowledgeSnippet]]] = {}
    for domain, ent_map in doc.items():
        for entity_id, ent_doc in ent_map.items():
            entity_id = str(entity_id)
            name = ent_doc.get("name")
            if name is None:
                raise ParseError(f"entity {domain}/{entity_id} missing name", path=str(path))
            entities.append(Entity(entity_id=entity_id, domain=domain, name=name))
            revs: dict[str, list[KnowledgeSnippet]] = {}
            for review_id, rev_doc in ent_doc.get("reviews", {}).items():
                review_id = str(review_id)
                snippets = []
                for sent_id, text in rev_doc.get("sentences", {}).items():
                    ref = SnippetRef(domain, entity_id, review_id, str(sent_id))
                    snippets.append(KnowledgeSnippet(ref=ref, text=text))
                revs[review_id] = snippets
            reviews[(domain, entity_id)] = revs
    kb = KnowledgeBase(entities, reviews)
    logger.info(
        "loaded knowledge base: %d entities, %d reviews, %d snippets",
        kb.num_entities, kb.num_reviews, kb.num_snippets,
    )
    return kb


_SPEAKER_ALIASES = {"U": Speaker.USER, "USER": Speaker.USER, "S": Speaker.SYSTEM, "SYSTEM": Speaker.SYSTEM}


def load_split(data_dir: str | Path, name: str) -> Split:
    """Load <data_dir>/<name>/{logs,labels}.json into paired instances."""
    if name not in SPLIT_NAMES:
        raise ParseError(f"unknown split name {name!r}; expected one of {SPLIT_NAMES}")
    base = Path(data_dir) / name
    logs = _load_json(base / "logs.json")
    labels = _load_json(base / "labels.json")
    if len(logs) != len(labels):
        raise AlignmentError(
            f"split {name}: logs has {len(logs)} dialogues but labels has {len(labels)} entries"
        )
    instances = []
    for idx, (log, label) in enumerate(zip(logs, labels)):
        instance_id = f"{name}-{idx:05d}"
        utterances = []
        for turn_index, turn in enumerate(log):
            speaker = _SPEAKER_ALIASES.get(str(turn.get("speaker", "")).upper())
            if speaker is None:
                raise ParseError(
                    f"{instance_id}: unknown speaker {turn.get('speaker')!r} at turn {turn_index}",
                    path=str(base / "logs.json"),
                )
            utterances.append(Utterance(speaker=speaker, text=turn["text"], turn_index=turn_index))
        ctx = DialogueContext(utterances=tuple(utterances), instance_id=instance_id)
        target = bool(label.get("target", False))
        if target:
            refs = frozenset(SnippetRef.from_dict(k) for k in label.get("knowledge", []))
            lab = InstanceLabel(target=True, gold_snippets=refs, reference_response=label.get("response"))
        else:
            lab = InstanceLabel(target=False)
        instances.append((ctx, lab))
    split = Split(name=name, instances=tuple(instances))
    n_target = len(split.target_instances())
    logger.info("loaded split %s: %d instances (%d target-true)", name, len(split), n_target)
    return split


def check_integrity(split: Split, kb: KnowledgeBase) -> int:
    """Verify every gold snippet ref resolves in the knowledge base.

    Returns the number of refs checked; raises IntegrityError on the first
    dangling reference.
    """
    checked = 0
    for ctx, label in split.instances:
        for ref in label.gold_snippets:
            if not kb.contains(ref):
                raise IntegrityError(f"{ctx.instance_id}: gold ref {ref} not in knowledge base")
            checked += 1
    return checked


def save_knowledge_base(kb: KnowledgeBase, path: str | Path) -> None:
    doc: dict = {}
    for ent in kb.entities():
        ent_doc = doc.setdefault(ent.domain, {}).setdefault(ent.entity_id, {"name": ent.name, "reviews": {}})
        for sn in kb.snippets_of_entity(ent.domain, ent.entity_id):
            rev = ent_doc["reviews"].setdefault(sn.ref.review_id, {"sentences": {}})
            rev["sentences"][sn.ref.sentence_id] = sn.text
    Path(path).write_text(json.dumps(doc, ensure_ascii=False, indent=1), encoding="utf-8")


def save_split(split: Split, data_dir: str | Path) -> None:
    base = Path(data_dir) / split.name
    base.mkdir(parents=True, exist_ok=True)
    logs, labels = [], []
    for ctx, label in split.instances:
        logs.append([{"speaker": u.speaker.value, "text": u.text} for u in ctx.utterances])
        if label.target:
            labels.append({
                "target": True,
                "knowledge": [ref.as_dict() for ref in sorted(label.gold_snippets)],
                "response": label.reference_response,
            })
        else:
            labels.append({"target": False})
    (base / "logs.json").write_text(json.dumps(logs, ensure_ascii=False, indent=1), encoding="utf-8")
    (base / "labels.json").write_text(json.dumps(labels, ensure_ascii=False, indent=1), encoding="utf-8")


@dataclass
class CorpusStats:
    split: str
    num_instances: int
    num_target: int
    avg_snippets_per_instance: float
    avg_utterances_per_instance: float
    avg_tokens_per_request: float
    avg_tokens_per_response: float
    avg_tokens_per_snippet: float | None = None

    def as_dict(self) -> dict:
        d = {
            "split": self.split,
            "num_instances": self.num_instances,
            "num_target": self.num_target,
            "avg_snippets_per_instance": round(self.avg_snippets_per_instance, 4),
            "avg_utterances_per_instance": round(self.avg_utterances_per_instance, 4),
            "avg_tokens_per_request": round(self.avg_tokens_per_request, 4),
            "avg_tokens_per_response": round(self.avg_tokens_per_response, 4),
        }
        if self.avg_tokens_per_snippet is not None:
            d["avg_tokens_per_snippet"] = round(self.avg_tokens_per_snippet, 4)
        return d


def corpus_stats(split: Split, kb: KnowledgeBase | None = None) -> CorpusStats:
    """Counts and averages over the target-true instances of a split."""
    target = split.target_instances()
    n = len(target)

    def _avg(values):
        vals = list(values)
        return sum(vals) / len(vals) if vals else 0.0

    avg_tokens_per_snippet = None
    if kb is not None and n:
        lengths = [
            len(tokenize(kb.snippet(ref).text))
            for _, lab in target
            for ref in sorted(lab.gold_snippets)
        ]
        avg_tokens_per_snippet = _avg(lengths)
    return CorpusStats(
        split=split.name,
        num_instances=len(split),
        num_target=n,
        avg_snippets_per_instance=_avg(len(lab.gold_snippets) for _, lab in target),
        avg_utterances_per_instance=_avg(len(ctx.utterances) for ctx, _ in target),
        avg_tokens_per_request=_avg(len(tokenize(ctx.last_user_utterance.text)) for ctx, _ in target),
        avg_tokens_per_response=_avg(len(tokenize(lab.reference_response)) for _, lab in target),
        avg_tokens_per_snippet=avg_tokens_per_snippet,
    )
