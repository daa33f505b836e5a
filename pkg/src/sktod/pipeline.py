"""Pipeline orchestration: KTD -> ET -> KS -> RG over a split, plus calibration.

Each stage reads either gold labels, the native component, or the
external service, per PipelineConfig.  Instances the detector rejects
skip ET/KS/RG.  Per-instance failures are quarantined and counted, never
fatal to the run.  Two runs with the same config and seed produce
byte-identical outputs: instances are processed in split order, every
RNG is derived from (seed, instance_id), and all serialization is
canonical.

Evaluation conventions: tracking is scored strictly (no candidate
fallback); KS metrics cover all gold-target-true instances, scoring an
empty ranking for detector-rejected ones; RG overlap metrics cover
target-true instances that produced a grounded response.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import absa, detect, generate, metrics, select, track
from .corpus import (
    DialogueContext,
    KnowledgeBase,
    Split,
    load_knowledge_base,
    load_split,
)
from .errors import ConfigError
from .external import ExternalClient, ExternalSnippetScorer

logger = logging.getLogger(__name__)

STAGE_SOURCES = ("gold", "native", "external")
RG_MODES = ("ext", "template", "external")


@dataclass
class PipelineConfig:
    ktd: str = "native"
    et: str = "native"
    ks: str = "native"
    rg: str = "template"
    scorer: str = "tfidf"
    threshold: float | None = None
    use_absa: bool = True
    seed: int = 7
    external_url: str | None = None

    def __post_init__(self):
        for stage, value in (("ktd", self.ktd), ("et", self.et), ("ks", self.ks)):
            if value not in STAGE_SOURCES:
                raise ConfigError(f"{stage} source must be one of {STAGE_SOURCES}, got {value!r}")
        if self.rg == "gold":
            raise ConfigError("rg=gold is invalid: gold responses are evaluation references only")
        if self.rg not in RG_MODES:
            raise ConfigError(f"rg mode must be one of {RG_MODES}, got {self.rg!r}")
        if self.et == "external":
            raise ConfigError("entity tracking has no external route; use gold or native")
        if self.scorer not in ("tfidf", "bm25", "external"):
            raise ConfigError(f"unknown scorer {self.scorer!r}")
        needs_external = "external" in (self.ktd, self.ks, self.rg) or self.scorer == "external"
        if needs_external and not self.external_url:
            raise ConfigError("external stages configured but no external_url given")

    def as_dict(self) -> dict:
        return {
            "ktd": self.ktd, "et": self.et, "ks": self.ks, "rg": self.rg,
            "scorer": self.scorer, "threshold": self.threshold,
            "use_absa": self.use_absa, "seed": self.seed,
            "external_url": self.external_url,
        }


@dataclass
class Artifacts:
    """Everything run_pipeline needs beyond the data itself."""

    kb: KnowledgeBase
    index: select.LexicalIndex
    detector: detect.LexicalDetectorModel | None = None
    thresholds: dict[str, float] = field(default_factory=dict)
    lexicon: absa.SentimentLexicon = field(default_factory=absa.SentimentLexicon.default)

    def scorer(self, name: str, external_url: str | None = None) -> select.SnippetScorer:
        if name == "tfidf":
            return select.TfidfScorer(self.index)
        if name == "bm25":
            return select.Bm25Scorer(self.index)
        if name == "external":
            return ExternalSnippetScorer(ExternalClient(external_url))
        raise ConfigError(f"unknown scorer {name!r}")


@dataclass
class InstanceOutput:
    instance_id: str
    detected: bool
    gold_target: bool
    entities: list[tuple[str, str]]
    ranking: list
    selected: list
    response: str | None
    provenance: list
    error: str | None = None

    def as_json(self) -> str:
        doc = {
            "instance_id": self.instance_id,
            "detected": self.detected,
            "entities": [list(k) for k in self.entities],
            "ranking": [[r.domain, r.entity_id, r.review_id, r.sentence_id] for r in self.ranking],
            "selected": [[r.domain, r.entity_id, r.review_id, r.sentence_id] for r in self.selected],
            "response": self.response,
            "provenance": [
                [[r.domain, r.entity_id, r.review_id, r.sentence_id], pol.value]
                for r, pol in self.provenance
            ],
            "error": self.error,
        }
        return json.dumps(doc, ensure_ascii=False, sort_keys=True)


@dataclass
class RunResult:
    outputs: list[InstanceOutput]
    report: metrics.EvalReport
    elapsed_seconds: float

    def write_outputs(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for out in self.outputs:
                fh.write(out.as_json() + "\n")


def _run_instance(
    config: PipelineConfig,
    artifacts: Artifacts,
    scorer: select.SnippetScorer,
    ctx: DialogueContext,
    label,
    external: ExternalClient | None,
) -> InstanceOutput:
    kb = artifacts.kb

    # KTD
    if config.ktd == "gold":
        detected = label.target
    elif config.ktd == "native":
        if artifacts.detector is None:
            raise ConfigError("native KTD requested but no detector model loaded")
        detected = detect.detect(artifacts.detector, ctx).decision
    else:
        detected = detect.external_detect(external, ctx).decision

    if not detected:
        return InstanceOutput(ctx.instance_id, False, label.target, [], [], [], None, [])

    # ET
    if config.et == "gold":
        entity_keys = label.gold_entity_keys()
        entities = [kb.entity(d, e) for d, e in entity_keys]
    else:
        entities = sorted(track.candidate_entities(ctx, kb), key=lambda e: e.key())
        entity_keys = [e.key() for e in entities]

    candidates = select.candidates_for_entities(kb, entities, ctx.instance_id)

    # KS
    if config.ks == "gold":
        if not label.target:
            raise ConfigError(f"{ctx.instance_id}: ks=gold needs a labeled instance")
        selection = select.SnippetSelection(
            instance_id=ctx.instance_id,
            selected=label.gold_snippets,
            threshold_used=float("nan"),
        )
        ranking = sorted(label.gold_snippets) + [
            sn.ref for sn in candidates.candidates if sn.ref not in label.gold_snippets
        ]
        scores = {}
    else:
        scored = scorer.score_candidates(ctx, candidates)
        ranking = [s.ref for s in scored]
        scores = {s.ref: s.score for s in scored}
        threshold = config.threshold
        if threshold is None:
            threshold = artifacts.thresholds.get(config.scorer)
        if threshold is None:
            raise ConfigError(f"no threshold configured or calibrated for scorer {config.scorer!r}")
        selection = select.SnippetSelection(
            instance_id=ctx.instance_id,
            selected=frozenset(r for r, s in scores.items() if s >= threshold),
            threshold_used=threshold,
        )

    # RG
    annotations = absa.tag_all(artifacts.lexicon, (kb.snippet(r) for r in sorted(selection.selected)))
    if not selection.selected:
        response = generate.Response(text=generate.NO_FEEDBACK_TEXT, provenance=())
    elif config.rg == "ext":
        response = generate.generate_ext(selection, kb, config.seed)
        response = generate.Response(
            text=response.text,
            provenance=tuple((r, annotations[r].polarity) for r, _ in response.provenance),
        )
    elif config.rg == "template":
        response = generate.generate_template(ctx, selection, annotations, kb)
    else:
        gen_input = generate.build_generation_input(
            ctx, selection, annotations, kb, use_absa=config.use_absa, scores=scores)
        response = generate.external_generate(external, gen_input)

    return InstanceOutput(
        instance_id=ctx.instance_id,
        detected=True,
        gold_target=label.target,
        entities=entity_keys,
        ranking=ranking,
        selected=sorted(selection.selected),
        response=response.text,
        provenance=list(response.provenance),
    )


def run_pipeline(config: PipelineConfig, split: Split, artifacts: Artifacts) -> RunResult:
    started = time.monotonic()
    external = ExternalClient(config.external_url) if config.external_url else None
    scorer = artifacts.scorer(config.scorer, config.external_url) if config.ks != "gold" else None

    outputs: list[InstanceOutput] = []
    quarantined = 0
    for ctx, label in split.instances:
        try:
            outputs.append(_run_instance(config, artifacts, scorer, ctx, label, external))
        except ConfigError:
            raise
        except Exception as exc:  # per-instance quarantine
            logger.exception("%s: stage failure, instance quarantined", ctx.instance_id)
            quarantined += 1
            outputs.append(InstanceOutput(
                ctx.instance_id, False, label.target, [], [], [], None, [], error=str(exc)))

    report = _evaluate(config, split, outputs, quarantined)
    elapsed = time.monotonic() - started
    logger.info("pipeline run finished in %.1fs (%d instances, %d quarantined)",
                elapsed, len(outputs), quarantined)
    return RunResult(outputs=outputs, report=report, elapsed_seconds=elapsed)


def _evaluate(config: PipelineConfig, split: Split, outputs: list[InstanceOutput], quarantined: int) -> metrics.EvalReport:
    by_id = {o.instance_id: o for o in outputs}
    detection = None
    if config.ktd != "gold":
        tp = fp = tn = fn = 0
        for ctx, label in split.instances:
            out = by_id[ctx.instance_id]
            if out.detected and label.target:
                tp += 1
            elif out.detected:
                fp += 1
            elif label.target:
                fn += 1
            else:
                tn += 1
        n = max(tp + fp + tn + fn, 1)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        detection = {
            "accuracy": (tp + tn) / n,
            "precision": precision,
            "recall": recall,
            "f1": 2 * precision * recall / (precision + recall) if precision + recall else 0.0,
        }

    tracking = None
    if config.et != "gold":
        preds, golds = [], []
        for ctx, label in split.target_instances():
            out = by_id[ctx.instance_id]
            if not out.detected:
                continue
            preds.append(set(out.entities))
            golds.append(set(label.gold_entity_keys()))
        if preds:
            tracking = track.evaluate_tracking(preds, golds).as_dict()

    sel_instance = sel_snippet = map_score = None
    rankings, sel_preds, sel_gold = [], [], []
    for ctx, label in split.target_instances():
        out = by_id[ctx.instance_id]
        rankings.append(out.ranking)
        sel_preds.append(set(out.selected))
        sel_gold.append(set(label.gold_snippets))
    if sel_gold:
        sel_instance = metrics.instance_prf(sel_preds, sel_gold)
        sel_snippet = metrics.snippet_prf(sel_preds, sel_gold)
        map_score = metrics.mean_average_precision(rankings, sel_gold)

    hyps, refs = [], []
    for ctx, label in split.target_instances():
        out = by_id[ctx.instance_id]
        if out.detected and out.response is not None and label.reference_response:
            hyps.append(out.response)
            refs.append(label.reference_response)

    return metrics.full_report(
        detection=detection,
        tracking=tracking,
        selection_instance=sel_instance,
        selection_snippet=sel_snippet,
        map_score=map_score,
        hypotheses=hyps or None,
        references=refs or None,
        quarantined=quarantined,
    )


def calibrate_all(data_dir: str | Path, out_dir: str | Path, seed: int = 13) -> dict:
    """Train the detector and calibrate lexical thresholds; persist artifacts.

    Idempotent under a fixed seed: rerunning overwrites the same files
    with the same bytes.
    """
    data_dir, out_dir = Path(data_dir), Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    kb = load_knowledge_base(data_dir / "knowledge.json")
    train = load_split(data_dir, "train")
    val = load_split(data_dir, "val")

    config = detect.DetectorConfig(seed=seed)
    model = detect.train_detector(train, val, config)
    model.save(out_dir / "detector.json")
    accuracy = detect.evaluate_detector(model, val)["accuracy"]

    index = select.build_index(kb)
    thresholds = {}
    for name in ("tfidf", "bm25"):
        scorer = select.TfidfScorer(index) if name == "tfidf" else select.Bm25Scorer(index)
        thresholds[name] = select.calibrate_threshold(scorer, val, kb).threshold
    (out_dir / "thresholds.json").write_text(
        json.dumps(thresholds, indent=1, sort_keys=True), encoding="utf-8")
    summary = {"detector_val_accuracy": accuracy, "thresholds": thresholds, "seed": seed}
    (out_dir / "calibration.json").write_text(
        json.dumps(summary, indent=1, sort_keys=True), encoding="utf-8")
    return summary


def load_artifacts(data_dir: str | Path, artifacts_dir: str | Path | None = None) -> Artifacts:
    data_dir = Path(data_dir)
    kb = load_knowledge_base(data_dir / "knowledge.json")
    index = select.build_index(kb)
    detector = None
    thresholds: dict[str, float] = {}
    if artifacts_dir is not None:
        artifacts_dir = Path(artifacts_dir)
        det_path = artifacts_dir / "detector.json"
        if det_path.exists():
            detector = detect.LexicalDetectorModel.load(det_path)
        thr_path = artifacts_dir / "thresholds.json"
        if thr_path.exists():
            thresholds = json.loads(thr_path.read_text(encoding="utf-8"))
    return Artifacts(kb=kb, index=index, detector=detector, thresholds=thresholds)
