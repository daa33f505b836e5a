"""Evaluation measures: set classification, ranking, and text overlap.

Conventions, fixed here so every caller agrees:

* instance-level P/R/F is a macro average of per-instance scores over
  snippet sets; instances with an empty gold set are excluded from the
  mean and counted (AP is undefined at zero relevant items, and the same
  convention is applied to the classification mean for consistency).
* snippet-level P/R/F pools all (context, snippet) pairs (micro).
* BLEU is corpus-level BLEU-4 with brevity penalty; zero clipped-match
  counts are smoothed by adding 0.1 to the count; n-gram orders with no
  hypothesis n-grams are dropped from the geometric mean.
* ROUGE F uses beta=1.  METEOR matches exact unigrams first, then
  Porter stems, greedily in hypothesis order against the earliest
  unmatched reference occurrence; no synonym stage.

All scores live in [0, 1].
"""

from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

from .corpus import tokenize
from .errors import ConfigError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, n_pred: int, n_gold: int) -> "PRF":
        p = tp / n_pred if n_pred else 0.0
        r = tp / n_gold if n_gold else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        return cls(p, r, f)


def prf_from_sets(pred: Iterable[Hashable], gold: Iterable[Hashable]) -> PRF:
    pred, gold = set(pred), set(gold)
    return PRF.from_counts(len(pred & gold), len(pred), len(gold))


def instance_prf(predictions: Sequence[Iterable], gold: Sequence[Iterable]) -> PRF:
    """Macro average of per-instance P/R/F over snippet sets."""
    if len(predictions) != len(gold):
        raise ConfigError("predictions and gold must align")
    per = [prf_from_sets(p, g) for p, g in zip(predictions, gold) if set(g)]
    skipped = len(gold) - len(per)
    if skipped:
        logger.info("instance_prf: excluded %d empty-gold instances", skipped)
    if not per:
        return PRF(0.0, 0.0, 0.0)
    n = len(per)
    return PRF(
        math.fsum(x.precision for x in per) / n,
        math.fsum(x.recall for x in per) / n,
        math.fsum(x.f1 for x in per) / n,
    )


def snippet_prf(predictions: Sequence[Iterable], gold: Sequence[Iterable]) -> PRF:
    """Micro P/R/F pooling all (context, snippet) pairs."""
    if len(predictions) != len(gold):
        raise ConfigError("predictions and gold must align")
    tp = n_pred = n_gold = 0
    for p, g in zip(predictions, gold):
        p, g = set(p), set(g)
        tp += len(p & g)
        n_pred += len(p)
        n_gold += len(g)
    return PRF.from_counts(tp, n_pred, n_gold)


def average_precision(ranking: Sequence[Hashable], gold: Iterable[Hashable]) -> float:
    """AP of one ranking; unranked gold items contribute zero."""
    gold = set(gold)
    if not gold:
        raise ConfigError("average_precision undefined for empty gold set")
    hits = 0
    total = 0.0
    for rank, item in enumerate(ranking, start=1):
        if item in gold:
            hits += 1
            total += hits / rank
    return total / len(gold)


def mean_average_precision(rankings: Sequence[Sequence[Hashable]], gold: Sequence[Iterable]) -> float:
    if len(rankings) != len(gold):
        raise ConfigError("rankings and gold must align")
    scores = [average_precision(r, g) for r, g in zip(rankings, gold) if set(g)]
    skipped = len(gold) - len(scores)
    if skipped:
        logger.info("mean_average_precision: excluded %d empty-gold instances", skipped)
    return math.fsum(scores) / len(scores) if scores else 0.0


def _ngrams(tokens: Sequence[str], n: int) -> list[tuple[str, ...]]:
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


BLEU_EPSILON = 0.1


def corpus_bleu(hypotheses: Sequence[str], references: Sequence[str]) -> float:
    """Corpus-level BLEU-4 with brevity penalty, one reference per hypothesis."""
    if not hypotheses or len(hypotheses) != len(references):
        raise ConfigError("corpus_bleu needs equal-length non-empty hypothesis/reference lists")
    matches = [0] * 4
    totals = [0] * 4
    hyp_len = ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        h, r = tokenize(hyp), tokenize(ref)
        hyp_len += len(h)
        ref_len += len(r)
        for n in range(1, 5):
            h_counts = Counter(_ngrams(h, n))
            r_counts = Counter(_ngrams(r, n))
            matches[n - 1] += sum(min(c, r_counts[g]) for g, c in h_counts.items())
            totals[n - 1] += sum(h_counts.values())
    log_sum = 0.0
    orders = 0
    for m, t in zip(matches, totals):
        if t == 0:
            continue
        orders += 1
        log_sum += math.log((m if m > 0 else BLEU_EPSILON) / t)
    if orders == 0:
        return 0.0
    geo_mean = math.exp(log_sum / orders)
    bp = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len) if hyp_len else 0.0
    return bp * geo_mean


def rouge_n(hypothesis: str, reference: str, n: int) -> float:
    """Clipped n-gram overlap F1 (beta=1)."""
    if n not in (1, 2):
        raise ConfigError("rouge_n supports n in {1, 2}")
    h = Counter(_ngrams(tokenize(hypothesis), n))
    r = Counter(_ngrams(tokenize(reference), n))
    overlap = sum(min(c, r[g]) for g, c in h.items())
    return PRF.from_counts(overlap, sum(h.values()), sum(r.values())).f1


def _lcs_length(a: Sequence, b: Sequence) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(hypothesis: str, reference: str) -> float:
    """LCS-based F1 over tokens (beta=1)."""
    h, r = tokenize(hypothesis), tokenize(reference)
    lcs = _lcs_length(h, r)
    return PRF.from_counts(lcs, len(h), len(r)).f1


# ---------------------------------------------------------------------------
# Porter stemmer (original 1980 algorithm), used only by the METEOR stem stage.

_VOWELS = "aeiou"


def _is_consonant(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _m(stem: str) -> int:
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        cons = _is_consonant(stem, i)
        if cons and prev_vowel:
            m += 1
        prev_vowel = not cons
    return m


def _has_vowel(stem: str) -> bool:
    return any(not _is_consonant(stem, i) for i in range(len(stem)))


def _ends_double_consonant(word: str) -> bool:
    return len(word) >= 2 and word[-1] == word[-2] and _is_consonant(word, len(word) - 1)


def _ends_cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    return (
        _is_consonant(word, len(word) - 3)
        and not _is_consonant(word, len(word) - 2)
        and _is_consonant(word, len(word) - 1)
        and word[-1] not in "wxy"
    )


def _replace(word: str, suffix: str, repl: str, min_m: int) -> str | None:
    if word.endswith(suffix):
        stem = word[: len(word) - len(suffix)]
        if _m(stem) > min_m:
            return stem + repl
        return word
    return None


_STEP2 = [
    ("ational", "ate"), ("tional", "tion"), ("enci", "ence"), ("anci", "ance"),
    ("izer", "ize"), ("abli", "able"), ("alli", "al"), ("entli", "ent"), ("eli", "e"),
    ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"), ("ator", "ate"),
    ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"), ("ousness", "ous"),
    ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
]
_STEP3 = [
    ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
    ("ical", "ic"), ("ful", ""), ("ness", ""),
]
_STEP4 = [
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
    "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
]


def porter_stem(word: str) -> str:
    """Porter (1980) stem of a lowercase word; short words pass through."""
    if len(word) <= 2:
        return word
    w = word

    # step 1a
    if w.endswith("sses"):
        w = w[:-2]
    elif w.endswith("ies"):
        w = w[:-2]
    elif w.endswith("ss"):
        pass
    elif w.endswith("s"):
        w = w[:-1]

    # step 1b
    if w.endswith("eed"):
        if _m(w[:-3]) > 0:
            w = w[:-1]
    else:
        fired = False
        if w.endswith("ed") and _has_vowel(w[:-2]):
            w, fired = w[:-2], True
        elif w.endswith("ing") and _has_vowel(w[:-3]):
            w, fired = w[:-3], True
        if fired:
            if w.endswith(("at", "bl", "iz")):
                w += "e"
            elif _ends_double_consonant(w) and w[-1] not in "lsz":
                w = w[:-1]
            elif _m(w) == 1 and _ends_cvc(w):
                w += "e"

    # step 1c
    if w.endswith("y") and _has_vowel(w[:-1]):
        w = w[:-1] + "i"

    # step 2
    for suffix, repl in _STEP2:
        out = _replace(w, suffix, repl, 0)
        if out is not None:
            w = out
            break

    # step 3
    for suffix, repl in _STEP3:
        out = _replace(w, suffix, repl, 0)
        if out is not None:
            w = out
            break

    # step 4
    for suffix in _STEP4:
        if w.endswith(suffix):
            stem = w[: len(w) - len(suffix)]
            if _m(stem) > 1 and (suffix != "ion" or (stem and stem[-1] in "st")):
                w = stem
            break

    # step 5a
    if w.endswith("e"):
        stem = w[:-1]
        m = _m(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            w = stem

    # step 5b
    if _m(w) > 1 and _ends_double_consonant(w) and w.endswith("l"):
        w = w[:-1]

    return w


def _meteor_align(hyp: list[str], ref: list[str]) -> list[tuple[int, int]]:
    """Stagewise greedy alignment: exact matches, then Porter-stem matches.

    Within a stage, hypothesis positions are visited left to right and
    paired with the earliest unmatched reference occurrence.
    """
    pairs: list[tuple[int, int]] = []
    hyp_free = [True] * len(hyp)
    ref_free = [True] * len(ref)
    for keyed_hyp, keyed_ref in (
        (hyp, ref),
        ([porter_stem(t) for t in hyp], [porter_stem(t) for t in ref]),
    ):
        for i, token in enumerate(keyed_hyp):
            if not hyp_free[i]:
                continue
            for j, rtoken in enumerate(keyed_ref):
                if ref_free[j] and rtoken == token:
                    pairs.append((i, j))
                    hyp_free[i] = False
                    ref_free[j] = False
                    break
    return sorted(pairs)


def _meteor_chunks(pairs: list[tuple[int, int]]) -> int:
    chunks = 0
    prev = None
    for i, j in pairs:
        if prev is None or i != prev[0] + 1 or j != prev[1] + 1:
            chunks += 1
        prev = (i, j)
    return chunks


def meteor(hypothesis: str, reference: str) -> float:
    """Unigram-alignment METEOR with exact + stem stages.

    F_mean = 10PR / (R + 9P); penalty = 0.5 (chunks / matches)^3.
    """
    h, r = tokenize(hypothesis), tokenize(reference)
    if not h or not r:
        return 0.0
    pairs = _meteor_align(h, r)
    m = len(pairs)
    if m == 0:
        return 0.0
    p = m / len(h)
    rec = m / len(r)
    f_mean = 10 * p * rec / (rec + 9 * p)
    penalty = 0.5 * (_meteor_chunks(pairs) / m) ** 3
    return f_mean * (1.0 - penalty)


def corpus_rouge_n(hypotheses: Sequence[str], references: Sequence[str], n: int) -> float:
    if not hypotheses:
        return 0.0
    return math.fsum(rouge_n(h, r, n) for h, r in zip(hypotheses, references)) / len(hypotheses)


def corpus_rouge_l(hypotheses: Sequence[str], references: Sequence[str]) -> float:
    if not hypotheses:
        return 0.0
    return math.fsum(rouge_l(h, r) for h, r in zip(hypotheses, references)) / len(hypotheses)


def corpus_meteor(hypotheses: Sequence[str], references: Sequence[str]) -> float:
    if not hypotheses:
        return 0.0
    return math.fsum(meteor(h, r) for h, r in zip(hypotheses, references)) / len(hypotheses)


_REPORT_FIELDS = (
    "detection_accuracy", "detection_precision", "detection_recall", "detection_f1",
    "tracking_accuracy", "tracking_missing_rate", "tracking_spurious_rate",
    "instance_precision", "instance_recall", "instance_f1",
    "snippet_precision", "snippet_recall", "snippet_f1",
    "map_score", "bleu", "rouge1", "rouge2", "rougeL", "meteor",
    "avg_response_length", "skipped_empty_gold", "quarantined",
)


@dataclass
class EvalReport:
    """Per-subtask metric bundle; fields stay None for stages that did not run."""

    detection_accuracy: float | None = None
    detection_precision: float | None = None
    detection_recall: float | None = None
    detection_f1: float | None = None
    tracking_accuracy: float | None = None
    tracking_missing_rate: float | None = None
    tracking_spurious_rate: float | None = None
    instance_precision: float | None = None
    instance_recall: float | None = None
    instance_f1: float | None = None
    snippet_precision: float | None = None
    snippet_recall: float | None = None
    snippet_f1: float | None = None
    map_score: float | None = None
    bleu: float | None = None
    rouge1: float | None = None
    rouge2: float | None = None
    rougeL: float | None = None
    meteor: float | None = None
    avg_response_length: float | None = None
    skipped_empty_gold: int = 0
    quarantined: int = 0

    def as_dict(self) -> dict:
        out = {}
        for name in _REPORT_FIELDS:
            value = getattr(self, name)
            if value is None:
                continue
            out[name] = round(value, 6) if isinstance(value, float) else value
        return out

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=1, sort_keys=False)

    def set_instance_prf(self, prf: PRF) -> None:
        self.instance_precision, self.instance_recall, self.instance_f1 = prf.precision, prf.recall, prf.f1

    def set_snippet_prf(self, prf: PRF) -> None:
        self.snippet_precision, self.snippet_recall, self.snippet_f1 = prf.precision, prf.recall, prf.f1


def full_report(
    *,
    detection: dict | None = None,
    tracking: dict | None = None,
    selection_instance: PRF | None = None,
    selection_snippet: PRF | None = None,
    map_score: float | None = None,
    hypotheses: Sequence[str] | None = None,
    references: Sequence[str] | None = None,
    skipped_empty_gold: int = 0,
    quarantined: int = 0,
) -> EvalReport:
    """Aggregate whatever stages ran into one report."""
    report = EvalReport(skipped_empty_gold=skipped_empty_gold, quarantined=quarantined)
    if detection:
        report.detection_accuracy = detection["accuracy"]
        report.detection_precision = detection["precision"]
        report.detection_recall = detection["recall"]
        report.detection_f1 = detection["f1"]
    if tracking:
        report.tracking_accuracy = tracking["accuracy"]
        report.tracking_missing_rate = tracking["missing_rate"]
        report.tracking_spurious_rate = tracking["spurious_rate"]
    if selection_instance is not None:
        report.set_instance_prf(selection_instance)
    if selection_snippet is not None:
        report.set_snippet_prf(selection_snippet)
    if map_score is not None:
        report.map_score = map_score
    if hypotheses is not None and references is not None and hypotheses:
        report.bleu = corpus_bleu(hypotheses, references)
        report.rouge1 = corpus_rouge_n(hypotheses, references, 1)
        report.rouge2 = corpus_rouge_n(hypotheses, references, 2)
        report.rougeL = corpus_rouge_l(hypotheses, references)
        report.meteor = corpus_meteor(hypotheses, references)
        report.avg_response_length = sum(len(tokenize(h)) for h in hypotheses) / len(hypotheses)
    return report
