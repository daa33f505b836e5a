"""Entity tracking: fuzzy n-gram matching of normalized entity names.

An entity name is normalized (lowercase, punctuation dropped, leading
article dropped) and expanded into suffix-stripped variants, e.g.
"The Gonville Hotel" -> {"gonville hotel", "gonville"}.  Each variant is
slid as an n-gram window (n = variant token count) over every dialogue
turn; the window and the variant are compared by the character-level
longest-common-subsequence ratio 2*LCS / (|a| + |b|).  An entity counts
as detected in a turn when any variant window reaches the matching
threshold; the output is the entity set of the latest turn with any
detection.

The normalization rule list is a reconstruction and is versioned so that
accuracy regressions stay attributable to rule changes.
"""

from __future__ import annotations

import bisect
import re
from collections import Counter
from dataclasses import dataclass

from .corpus import DialogueContext, Entity, KnowledgeBase, tokenize

RULESET_VERSION = "norm-rules/1"

MATCH_THRESHOLD = 0.95
RELAXED_THRESHOLD = 0.85

_LEADING_ARTICLES = ("the",)
_TYPE_SUFFIXES = ("hotel", "guesthouse", "guest house", "restaurant", "b & b")
_PUNCT_RE = re.compile(r"[^\w\s]")


@dataclass(frozen=True)
class NormalizedName:
    original: str
    normalized: str
    token_count: int


@dataclass(frozen=True)
class EntityMatch:
    entity_id: str
    domain: str
    turn_index: int
    score: float


def normalize_name(name: str) -> NormalizedName:
    """Deterministic, idempotent canonical form of an entity name."""
    lowered = _PUNCT_RE.sub(" ", name.lower())
    tokens = lowered.split()
    while tokens and tokens[0] in _LEADING_ARTICLES:
        tokens = tokens[1:]
    normalized = " ".join(tokens)
    return NormalizedName(original=name, normalized=normalized, token_count=max(len(tokens), 1))


def name_variants(name: str) -> list[NormalizedName]:
    """Normalized name plus type-suffix-stripped variants, longest first."""
    base = normalize_name(name)
    variants = [base]
    for suffix in _TYPE_SUFFIXES:
        if base.normalized.endswith(" " + suffix):
            stripped = base.normalized[: -len(suffix) - 1].strip()
            if stripped:
                variants.append(NormalizedName(name, stripped, len(stripped.split())))
    seen = set()
    unique = []
    for v in variants:
        if v.normalized not in seen:
            seen.add(v.normalized)
            unique.append(v)
    return unique


def _lcs_chars(a: str, b: str) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def ngram_match_score(a: str, b: str) -> float:
    """Symmetric char-level LCS ratio 2*LCS / (|a| + |b|), in [0, 1]."""
    if not a or not b:
        return 0.0
    return 2.0 * _lcs_chars(a, b) / (len(a) + len(b))


class _VariantTable:
    """Per-KB matching table: variants grouped by token count.

    The LCS ratio is bounded by 2*min(|a|,|b|)/(|a|+|b|), so windows whose
    character length falls outside the band implied by the threshold are
    skipped without running the LCS; exact string equality short-circuits
    to 1.0.  This keeps full-corpus tracking tractable.
    """

    def __init__(self, kb: KnowledgeBase):
        self.by_n: dict[int, tuple[list[int], list[tuple[int, str, tuple[str, str]]], dict[str, list[tuple[str, str]]]]] = {}
        grouped: dict[int, list[tuple[int, str, tuple[str, str]]]] = {}
        exact: dict[int, dict[str, list[tuple[str, str]]]] = {}
        for ent in kb.entities():
            for variant in name_variants(ent.name):
                n = variant.token_count
                grouped.setdefault(n, []).append((len(variant.normalized), variant.normalized, ent.key()))
                exact.setdefault(n, {}).setdefault(variant.normalized, []).append(ent.key())
        for n, rows in grouped.items():
            rows.sort()
            counters = [Counter(vstr) for _, vstr, _ in rows]
            self.by_n[n] = ([length for length, _, _ in rows], rows, counters, exact[n])
        self._window_cache: dict[tuple[float, int, str], tuple] = {}

    def _window_matches(self, n: int, window: str, threshold: float) -> tuple:
        cache_key = (threshold, n, window)
        cached = self._window_cache.get(cache_key)
        if cached is not None:
            return cached
        lengths, rows, counters, exact = self.by_n[n]
        out = [(key, 1.0) for key in exact.get(window, ())]
        wlen = len(window)
        band = (2.0 - threshold) / threshold  # from the LCS <= min(|a|,|b|) bound
        lo = bisect.bisect_left(lengths, wlen / band)
        hi = bisect.bisect_right(lengths, wlen * band)
        if lo < hi:
            w_counts = Counter(window)
            for idx in range(lo, hi):
                vlen, vstr, key = rows[idx]
                if vstr == window:
                    continue  # already in via the exact map
                # multiset character bound on the LCS
                shared = sum(min(c, w_counts.get(ch, 0)) for ch, c in counters[idx].items())
                if 2.0 * shared / (vlen + wlen) < threshold:
                    continue
                score = ngram_match_score(vstr, window)
                if score >= threshold:
                    out.append((key, score))
        result = tuple(out)
        self._window_cache[cache_key] = result
        return result

    def turn_matches(self, turn_tokens: list[str], threshold: float) -> dict[tuple[str, str], float]:
        found: dict[tuple[str, str], float] = {}
        n_tokens = len(turn_tokens)
        for n in self.by_n:
            if n > n_tokens:
                continue
            for i in range(n_tokens - n + 1):
                window = " ".join(turn_tokens[i:i + n])
                for key, score in self._window_matches(n, window, threshold):
                    if score > found.get(key, 0.0):
                        found[key] = score
        return found


_VARIANT_TABLES: dict[int, tuple] = {}


def _variant_table(kb: KnowledgeBase) -> _VariantTable:
    # keyed by object identity; KB is immutable after load
    entry = _VARIANT_TABLES.get(id(kb))
    if entry is not None and entry[0] is kb:
        return entry[1]
    table = _VariantTable(kb)
    _VARIANT_TABLES.clear()
    _VARIANT_TABLES[id(kb)] = (kb, table)
    return table


def match_entities_per_turn(
    context: DialogueContext,
    kb: KnowledgeBase,
    threshold: float = MATCH_THRESHOLD,
) -> list[EntityMatch]:
    """All (entity, turn) detections at or above the threshold."""
    table = _variant_table(kb)
    matches = []
    for utt in context.utterances:
        turn_tokens = [t for t in tokenize(utt.text) if t.isalnum() or t.startswith("'")]
        if not turn_tokens:
            continue
        for (domain, entity_id), score in sorted(table.turn_matches(turn_tokens, threshold).items()):
            matches.append(EntityMatch(entity_id, domain, utt.turn_index, score))
    return matches


def track_entities(
    context: DialogueContext,
    kb: KnowledgeBase,
    threshold: float = MATCH_THRESHOLD,
) -> set[Entity]:
    """Entities detected in the latest dialogue turn with any detection.

    Returns the empty set when nothing matches anywhere; the caller
    chooses the fallback (see candidate_entities).
    """
    matches = match_entities_per_turn(context, kb, threshold)
    if not matches:
        return set()
    last_turn = max(m.turn_index for m in matches)
    return {kb.entity(m.domain, m.entity_id) for m in matches if m.turn_index == last_turn}


def candidate_entities(
    context: DialogueContext,
    kb: KnowledgeBase,
    domain: str | None = None,
) -> set[Entity]:
    """Tracked entities with the fallback chain for candidate assembly.

    Strict tracking first; then relaxed-threshold mentions anywhere in the
    dialogue; finally every entity of the active domain (all entities when
    the domain is unknown).  Evaluation of tracking accuracy uses
    track_entities directly, never this fallback.
    """
    tracked = track_entities(context, kb)
    if tracked:
        return tracked
    relaxed = match_entities_per_turn(context, kb, RELAXED_THRESHOLD)
    if relaxed:
        return {kb.entity(m.domain, m.entity_id) for m in relaxed}
    return set(kb.entities(domain))


@dataclass(frozen=True)
class TrackingEval:
    accuracy: float
    missing_rate: float
    spurious_rate: float
    num_instances: int

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "missing_rate": self.missing_rate,
            "spurious_rate": self.spurious_rate,
            "num_instances": self.num_instances,
        }


def evaluate_tracking(
    predictions: list[set[tuple[str, str]]],
    gold: list[set[tuple[str, str]]],
) -> TrackingEval:
    """Instance accuracy (exact set match) with missing/spurious breakdown.

    Entities are compared as (domain, entity_id) keys.
    """
    if len(predictions) != len(gold):
        raise ValueError("predictions and gold must align")
    n = len(gold)
    if n == 0:
        return TrackingEval(0.0, 0.0, 0.0, 0)
    exact = missing = spurious = 0
    for pred, g in zip(predictions, gold):
        if pred == g:
            exact += 1
        if g - pred:
            missing += 1
        if pred - g:
            spurious += 1
    return TrackingEval(exact / n, missing / n, spurious / n, n)
