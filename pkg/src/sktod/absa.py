"""Lexicon-based aspect-sentiment tagging and the sentiment template phrases.

The shipped lexicon (data/sentiment_lexicon.txt) holds one term per line
with a sign prefix: '+' positive, '-' negative, '!' negation marker,
'~' intensity-neutral hedge, '@' aspect cue.  Terms may be multi-word
phrases; matching is longest-phrase-first over the shared tokenizer's
output.  A negation marker within the three tokens preceding a sentiment
hit flips that hit's sign (each marker flips once, so double negation
restores the base polarity).

Polarity phrases follow the great/ok/bad token map and are appended to
the snippet text to build sentiment-enhanced generation input.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from .corpus import KnowledgeSnippet, SnippetRef, tokenize
from .errors import ConfigError, IntegrityError

logger = logging.getLogger(__name__)

NEGATION_WINDOW = 3
MAX_PHRASE_TOKENS = 3

# Function words skipped by the aspect fallback heuristic.
_FUNCTION_WORDS = frozenset(
    "a an the this that these those it its they them their i we you he she my our your "
    "is are was were be been being am do does did have has had will would can could "
    "of in on at to for with from by as and or but not no nor so if then than there "
    "here very really quite just too also only even still about when while who what "
    "which how all any some every each most more much many few little out up down "
    "over under again once during before after above below between into through".split()
)


class Polarity(str, Enum):
    POSITIVE = "positive"
    NEUTRAL = "neutral"
    NEGATIVE = "negative"
    NONE = "none"


POLARITY_TOKEN = {
    Polarity.POSITIVE: "great",
    Polarity.NEUTRAL: "ok",
    Polarity.NEGATIVE: "bad",
}


@dataclass(frozen=True)
class SentimentAnnotation:
    ref: SnippetRef
    aspect_term: str | None
    polarity: Polarity

    def __post_init__(self):
        if self.polarity is Polarity.NONE and self.aspect_term is not None:
            raise IntegrityError("polarity=none must not carry an aspect term")


class SentimentLexicon:
    def __init__(
        self,
        positive: set[str],
        negative: set[str],
        negations: set[str],
        hedges: set[str],
        aspects: set[str],
    ):
        overlap = positive & negative
        if overlap:
            raise IntegrityError(f"terms in both positive and negative sets: {sorted(overlap)[:5]}")
        self.positive = frozenset(positive)
        self.negative = frozenset(negative)
        self.negations = frozenset(negations)
        self.hedges = frozenset(hedges)
        self.aspects = frozenset(aspects)

    @classmethod
    def from_lines(cls, lines) -> "SentimentLexicon":
        buckets: dict[str, set[str]] = {"+": set(), "-": set(), "!": set(), "~": set(), "@": set()}
        for raw in lines:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            sign, term = line[0], line[1:].strip().lower()
            if sign not in buckets or not term:
                raise ConfigError(f"bad lexicon line: {raw!r}")
            buckets[sign].add(term)
        return cls(buckets["+"], buckets["-"], buckets["!"], buckets["~"], buckets["@"])

    @classmethod
    def load(cls, path: str | Path) -> "SentimentLexicon":
        return cls.from_lines(Path(path).read_text(encoding="utf-8").splitlines())

    @classmethod
    def default(cls) -> "SentimentLexicon":
        text = resources.files("sktod.data").joinpath("sentiment_lexicon.txt").read_text(encoding="utf-8")
        return cls.from_lines(text.splitlines())


def _phrase_hits(tokens: list[str], phrases: frozenset[str]) -> list[tuple[int, int, str]]:
    """(start, token_length, phrase) hits, longest phrase first at each position."""
    hits = []
    i = 0
    n = len(tokens)
    while i < n:
        matched = None
        for width in range(min(MAX_PHRASE_TOKENS, n - i), 0, -1):
            phrase = " ".join(tokens[i:i + width])
            if phrase in phrases:
                matched = (i, width, phrase)
                break
        if matched:
            hits.append(matched)
            i += matched[1]
        else:
            i += 1
    return hits


def _negation_flips(tokens: list[str], position: int, negations: frozenset[str]) -> int:
    lo = max(0, position - NEGATION_WINDOW)
    return sum(1 for t in tokens[lo:position] if t in negations)


def tag_snippet(lexicon: SentimentLexicon, snippet: KnowledgeSnippet) -> SentimentAnnotation:
    """Polarity from signed lexicon hits with window-3 negation flipping.

    The aspect term is the aspect cue nearest the strongest (first
    polarity-deciding) sentiment hit, falling back to the first noun-like
    token, then to "it".
    """
    tokens = tokenize(snippet.text)
    pos_hits = []
    neg_hits = []
    for start, width, phrase in _phrase_hits(tokens, lexicon.positive | lexicon.negative):
        base_positive = phrase in lexicon.positive
        flips = _negation_flips(tokens, start, lexicon.negations)
        effective_positive = base_positive if flips % 2 == 0 else not base_positive
        (pos_hits if effective_positive else neg_hits).append(start)
    hedge_hits = [start for start, _, _ in _phrase_hits(tokens, lexicon.hedges)]

    if len(pos_hits) > len(neg_hits):
        polarity = Polarity.POSITIVE
    elif len(neg_hits) > len(pos_hits):
        polarity = Polarity.NEGATIVE
    elif pos_hits:  # nonzero tie
        polarity = Polarity.NEUTRAL
    elif hedge_hits:
        polarity = Polarity.NEUTRAL
    else:
        return SentimentAnnotation(ref=snippet.ref, aspect_term=None, polarity=Polarity.NONE)

    if polarity is Polarity.POSITIVE:
        anchor = pos_hits[0]
    elif polarity is Polarity.NEGATIVE:
        anchor = neg_hits[0]
    else:
        anchor = min(pos_hits + neg_hits + hedge_hits)

    aspect_hits = _phrase_hits(tokens, lexicon.aspects)
    if aspect_hits:
        start, width, phrase = min(aspect_hits, key=lambda h: (abs(h[0] - anchor), h[0]))
        aspect = phrase
    else:
        aspect = next(
            (t for t in tokens
             if t.isalpha() and t not in _FUNCTION_WORDS
             and t not in lexicon.positive and t not in lexicon.negative
             and t not in lexicon.negations and t not in lexicon.hedges),
            "it",
        )
    return SentimentAnnotation(ref=snippet.ref, aspect_term=aspect, polarity=polarity)


def polarity_phrase(aspect_term: str, polarity: Polarity) -> str:
    """"<aspect> is great." / "... is ok." / "... is bad."."""
    if polarity is Polarity.NONE:
        raise ConfigError("polarity=none has no template phrase; skip augmentation")
    return f"{aspect_term} is {POLARITY_TOKEN[polarity]}."


def augment_snippet(snippet: KnowledgeSnippet, annotation: SentimentAnnotation) -> str:
    """Snippet text with the polarity phrase appended; unchanged for polarity=none."""
    if annotation.polarity is Polarity.NONE:
        return snippet.text
    aspect = annotation.aspect_term or "it"
    return f"{snippet.text} {polarity_phrase(aspect, annotation.polarity)}"


def external_tag(
    client,
    snippet: KnowledgeSnippet,
    fallback: SentimentLexicon | None = None,
) -> SentimentAnnotation:
    """Annotation from the ABSA service; optional lexicon fallback on transport failure."""
    from .errors import ExternalServiceError

    try:
        doc = client.tag(snippet.text)
    except ExternalServiceError:
        if fallback is None:
            raise
        logger.warning("ABSA service unavailable; falling back to lexicon tagger for %s", snippet.ref)
        return tag_snippet(fallback, snippet)
    polarity = Polarity(doc["polarity"])
    aspect = doc["aspect"] if polarity is not Polarity.NONE else None
    return SentimentAnnotation(ref=snippet.ref, aspect_term=aspect, polarity=polarity)


def tag_all(lexicon: SentimentLexicon, snippets) -> dict[SnippetRef, SentimentAnnotation]:
    return {sn.ref: tag_snippet(lexicon, sn) for sn in snippets}
