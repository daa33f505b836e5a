"""Knowledge selection: score candidate snippets against the context.

Lexical scorers use the final user utterance as the query (earlier turns
only add topic noise to term matching); the external neural scorer
receives the full context.  Selection is threshold-based, never top-K:
both precision and recall matter, so every candidate at or above the
threshold is returned.

Determinism: candidate lists and rankings are totally ordered
(descending score, ties broken by ascending SnippetRef), and threshold
calibration scans a fixed quantile grid, breaking ties toward the lower
threshold.
"""

from __future__ import annotations

import bisect
import logging
import math
import random
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

from .corpus import (
    DialogueContext,
    Entity,
    KnowledgeBase,
    KnowledgeSnippet,
    SnippetRef,
    Split,
    tokenize,
)
from .errors import ConfigError

logger = logging.getLogger(__name__)

BM25_K1 = 1.2
BM25_B = 0.75
CALIBRATION_GRID_POINTS = 201


@dataclass(frozen=True)
class ScoredSnippet:
    ref: SnippetRef
    score: float


@dataclass(frozen=True)
class CandidateSet:
    instance_id: str
    candidates: tuple[KnowledgeSnippet, ...]

    def refs(self) -> list[SnippetRef]:
        return [sn.ref for sn in self.candidates]


@dataclass(frozen=True)
class SnippetSelection:
    instance_id: str
    selected: frozenset[SnippetRef]
    threshold_used: float


def candidates_for_entities(kb: KnowledgeBase, entities: Sequence[Entity], instance_id: str) -> CandidateSet:
    """Union of all snippets of the given entities, deduplicated and ordered by ref."""
    seen: dict[SnippetRef, KnowledgeSnippet] = {}
    for ent in entities:
        for sn in kb.snippets_of_entity(ent.domain, ent.entity_id):
            seen[sn.ref] = sn
    ordered = tuple(seen[ref] for ref in sorted(seen))
    return CandidateSet(instance_id=instance_id, candidates=ordered)


class LexicalIndex:
    """Document frequencies and tf vectors over every snippet in the knowledge base."""

    def __init__(self, kb: KnowledgeBase):
        self.doc_count = 0
        self.df: Counter[str] = Counter()
        self.tf: dict[SnippetRef, Counter[str]] = {}
        self.doc_len: dict[SnippetRef, int] = {}
        total_len = 0
        for sn in kb.all_snippets():
            tokens = tokenize(sn.text)
            counts = Counter(tokens)
            self.tf[sn.ref] = counts
            self.doc_len[sn.ref] = len(tokens)
            total_len += len(tokens)
            self.doc_count += 1
            for term in counts:
                self.df[term] += 1
        self.avg_doc_len = total_len / self.doc_count if self.doc_count else 0.0
        # tf-idf L2 norms, precomputed once
        self._norm: dict[SnippetRef, float] = {}
        for ref, counts in self.tf.items():
            self._norm[ref] = math.sqrt(sum((c * self.idf(t)) ** 2 for t, c in counts.items()))

    def idf(self, term: str) -> float:
        return math.log((self.doc_count + 1) / (self.df.get(term, 0) + 1)) + 1.0

    def bm25_idf(self, term: str) -> float:
        df = self.df.get(term, 0)
        return math.log(1.0 + (self.doc_count - df + 0.5) / (df + 0.5))

    def tfidf_norm(self, ref: SnippetRef) -> float:
        return self._norm.get(ref, 0.0)


def build_index(kb: KnowledgeBase) -> LexicalIndex:
    index = LexicalIndex(kb)
    logger.info("built lexical index over %d snippets (avg len %.2f)", index.doc_count, index.avg_doc_len)
    return index


def _query_tokens(context: DialogueContext) -> list[str]:
    return tokenize(context.last_user_utterance.text)


def score_tfidf(index: LexicalIndex, context: DialogueContext, snippet: KnowledgeSnippet) -> float:
    """Cosine similarity of tf-idf vectors of the last user utterance and the snippet."""
    q_counts = Counter(_query_tokens(context))
    return _tfidf_cosine(index, q_counts, snippet.ref)


def _tfidf_cosine(index: LexicalIndex, q_counts: Counter, ref: SnippetRef) -> float:
    d_counts = index.tf.get(ref)
    if not d_counts or not q_counts:
        return 0.0
    q_norm_sq = 0.0
    dot = 0.0
    for term, qc in q_counts.items():
        w_q = qc * index.idf(term)
        q_norm_sq += w_q * w_q
        dc = d_counts.get(term)
        if dc:
            dot += w_q * dc * index.idf(term)
    if dot == 0.0:
        return 0.0
    d_norm = index.tfidf_norm(ref)
    q_norm = math.sqrt(q_norm_sq)
    if d_norm == 0.0 or q_norm == 0.0:
        return 0.0
    return dot / (q_norm * d_norm)


def score_bm25(index: LexicalIndex, context: DialogueContext, snippet: KnowledgeSnippet) -> float:
    q_counts = Counter(_query_tokens(context))
    return _bm25(index, q_counts, snippet.ref)


def _bm25(index: LexicalIndex, q_counts: Counter, ref: SnippetRef) -> float:
    d_counts = index.tf.get(ref)
    if not d_counts or not q_counts:
        return 0.0
    dl = index.doc_len.get(ref, 0)
    if index.avg_doc_len:
        k = BM25_K1 * (1.0 - BM25_B + BM25_B * dl / index.avg_doc_len)
    else:
        k = BM25_K1
    score = 0.0
    for term in q_counts:
        tf = d_counts.get(term)
        if tf:
            score += index.bm25_idf(term) * tf * (BM25_K1 + 1.0) / (tf + k)
    return score


class SnippetScorer(Protocol):
    name: str

    def score_candidates(self, context: DialogueContext, candidates: CandidateSet) -> list[ScoredSnippet]:
        ...


def _ranked(scored: list[ScoredSnippet]) -> list[ScoredSnippet]:
    return sorted(scored, key=lambda s: (-s.score, s.ref))


class TfidfScorer:
    name = "tfidf"

    def __init__(self, index: LexicalIndex):
        self.index = index

    def score_candidates(self, context: DialogueContext, candidates: CandidateSet) -> list[ScoredSnippet]:
        q_counts = Counter(_query_tokens(context))
        return _ranked([
            ScoredSnippet(sn.ref, _tfidf_cosine(self.index, q_counts, sn.ref))
            for sn in candidates.candidates
        ])


class Bm25Scorer:
    name = "bm25"

    def __init__(self, index: LexicalIndex):
        self.index = index

    def score_candidates(self, context: DialogueContext, candidates: CandidateSet) -> list[ScoredSnippet]:
        q_counts = Counter(_query_tokens(context))
        return _ranked([
            ScoredSnippet(sn.ref, _bm25(self.index, q_counts, sn.ref))
            for sn in candidates.candidates
        ])


def select_snippets(
    scorer: SnippetScorer,
    threshold: float,
    candidates: CandidateSet,
    context: DialogueContext,
) -> SnippetSelection:
    """Every candidate scoring at or above the threshold (never top-K truncated)."""
    scored = scorer.score_candidates(context, candidates)
    selected = frozenset(s.ref for s in scored if s.score >= threshold)
    return SnippetSelection(instance_id=candidates.instance_id, selected=selected, threshold_used=threshold)


@dataclass
class CalibrationResult:
    threshold: float
    f1: float
    grid_size: int


def _instance_f1_at(sorted_scores: list[float], gold_prefix: list[int], n_gold: int, threshold: float) -> float:
    # sorted_scores ascending; selected = scores >= threshold
    lo = bisect.bisect_left(sorted_scores, threshold)
    n_sel = len(sorted_scores) - lo
    tp = gold_prefix[-1] - gold_prefix[lo]
    if n_sel == 0 or n_gold == 0:
        return 0.0
    p = tp / n_sel
    r = tp / n_gold
    return 2 * p * r / (p + r) if p + r else 0.0


def calibrate_threshold(
    scorer: SnippetScorer,
    val: Split,
    kb: KnowledgeBase,
    candidate_fn: Callable[[DialogueContext], CandidateSet] | None = None,
) -> CalibrationResult:
    """Grid-search the selection threshold maximizing instance-level F1 on val.

    The grid is 201 evenly spaced quantiles of the validation score
    distribution (scorer-scale independent); ties break toward the lower
    threshold.  Candidates default to the gold entities' snippets.
    """
    instances = []
    pooled: list[float] = []
    for ctx, lab in val.target_instances():
        if candidate_fn is not None:
            cand = candidate_fn(ctx)
        else:
            ents = [kb.entity(d, e) for d, e in lab.gold_entity_keys()]
            cand = candidates_for_entities(kb, ents, ctx.instance_id)
        scored = scorer.score_candidates(ctx, cand)
        gold = lab.gold_snippets
        by_score = sorted(scored, key=lambda s: s.score)
        scores = [s.score for s in by_score]
        prefix = [0]
        for s in by_score:
            prefix.append(prefix[-1] + (1 if s.ref in gold else 0))
        instances.append((scores, prefix, len(gold)))
        pooled.extend(scores)
    if not instances or not pooled:
        raise ConfigError("empty validation split; cannot calibrate")
    pooled.sort()
    grid = sorted({
        pooled[round(i * (len(pooled) - 1) / (CALIBRATION_GRID_POINTS - 1))]
        for i in range(CALIBRATION_GRID_POINTS)
    })
    best_theta, best_f1 = grid[0], -1.0
    for theta in grid:
        total = 0.0
        for scores, prefix, n_gold in instances:
            total += _instance_f1_at(scores, prefix, n_gold, theta)
        f1 = total / len(instances)
        if f1 > best_f1:
            best_theta, best_f1 = theta, f1
    logger.info("calibrated %s threshold: %.6f (val instance F1 %.4f, grid %d)",
                getattr(scorer, "name", "scorer"), best_theta, best_f1, len(grid))
    return CalibrationResult(threshold=best_theta, f1=best_f1, grid_size=len(grid))


@dataclass(frozen=True)
class TrainingPair:
    instance_id: str
    context: tuple[tuple[str, str], ...]  # (speaker, text) turns
    ref: SnippetRef
    snippet_text: str
    label: int


def export_training_pairs(split: Split, kb: KnowledgeBase, seed: int) -> list[TrainingPair]:
    """Positive pairs from gold snippets plus an equal count of sampled negatives.

    Negatives are drawn uniformly (without replacement) from the gold
    entities' remaining snippets; instances short on negatives emit all
    available with a warning.  Deterministic under the seed.
    """
    rng = random.Random(seed)
    pairs: list[TrainingPair] = []
    for ctx, lab in split.target_instances():
        turns = tuple((u.speaker.value, u.text) for u in ctx.utterances)
        gold = sorted(lab.gold_snippets)
        ents = [kb.entity(d, e) for d, e in lab.gold_entity_keys()]
        cand = candidates_for_entities(kb, ents, ctx.instance_id)
        negatives_pool = [sn for sn in cand.candidates if sn.ref not in lab.gold_snippets]
        n_neg = min(len(gold), len(negatives_pool))
        if n_neg < len(gold):
            logger.warning(
                "%s: only %d negatives available for %d positives",
                ctx.instance_id, len(negatives_pool), len(gold),
            )
        sampled = rng.sample(negatives_pool, n_neg) if n_neg else []
        for ref in gold:
            pairs.append(TrainingPair(ctx.instance_id, turns, ref, kb.snippet(ref).text, 1))
        for sn in sampled:
            pairs.append(TrainingPair(ctx.instance_id, turns, sn.ref, sn.text, 0))
    return pairs
