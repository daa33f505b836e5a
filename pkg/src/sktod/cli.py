"""Command-line interface.

    sktod ingest    --data-dir D --split test [--check-integrity]
    sktod synth     --out D [--seed N] [--scale F]
    sktod calibrate --data-dir D --artifacts-dir A [--seed N]
    sktod detect    --data-dir D --artifacts-dir A --split test
    sktod track     --data-dir D --split test [--report errors.tsv]
    sktod select    --data-dir D --split test --scorer tfidf|bm25|external [--calibrate | --threshold T]
    sktod generate  --data-dir D --split test --mode ext|template|external [--use-absa]
    sktod evaluate  --data-dir D --split test --pred outputs.jsonl [--metrics all]
    sktod e2e       --data-dir D --artifacts-dir A --split test [--config C] [--out outputs.jsonl]
    sktod serve     --data-dir D --artifacts-dir A [--bind HOST:PORT] [--static DIR]

Exit codes: 0 ok, 1 usage error, 2 data error, 3 external-service error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import absa, corpus, detect, generate, metrics, pipeline, select, synth, track
from .errors import ConfigError, DataError, ExternalServiceError, SktodError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_EXTERNAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="sktod", description="subjective-knowledge TOD engine")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.add_argument("--data-dir", type=Path, help="directory with knowledge.json and splits")
        p.add_argument("--artifacts-dir", type=Path, help="directory with calibrated artifacts")
        p.add_argument("--split", default="test", choices=corpus.SPLIT_NAMES)
        return p

    add("ingest").add_argument("--check-integrity", action="store_true")
    p = add("synth")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--scale", type=float, default=1.0)
    add("calibrate")
    p = add("detect")
    p.add_argument("--model", type=Path, help="detector model file (defaults to artifacts dir)")
    p = add("track")
    p.add_argument("--report", type=Path, help="write per-instance tracking errors as TSV")
    p = add("select")
    p.add_argument("--scorer", default="tfidf", choices=("tfidf", "bm25", "external"))
    p.add_argument("--calibrate", action="store_true", help="calibrate the threshold on val first")
    p.add_argument("--threshold", type=float)
    p.add_argument("--external-url")
    p = add("generate")
    p.add_argument("--mode", default="template", choices=("ext", "template", "external"))
    p.add_argument("--use-absa", action="store_true")
    p.add_argument("--external-url")
    p = add("evaluate")
    p.add_argument("--pred", type=Path, required=True, help="pipeline outputs JSONL")
    p.add_argument("--metrics", default="all")
    p = add("e2e")
    p.add_argument("--config", type=Path, help="JSON file of PipelineConfig fields")
    p.add_argument("--out", type=Path, help="write per-instance outputs JSONL")
    p.add_argument("--external-url")
    p = add("serve")
    p.add_argument("--bind", default="127.0.0.1:8080")
    p.add_argument("--static", type=Path, help="static assets directory for the chat UI")
    p.add_argument("--event-log", type=Path)
    return parser


def _require(args, *names):
    for name in names:
        if getattr(args, name.replace("-", "_"), None) is None:
            raise ConfigError(f"--{name} is required for this command")


def _load_data(args):
    _require(args, "data-dir")
    kb = corpus.load_knowledge_base(args.data_dir / "knowledge.json")
    split = corpus.load_split(args.data_dir, args.split)
    return kb, split


def _print(doc: dict) -> None:
    print(json.dumps(doc, indent=1, sort_keys=True, ensure_ascii=False))


def _cmd_ingest(args) -> int:
    kb, split = _load_data(args)
    if args.check_integrity:
        checked = corpus.check_integrity(split, kb)
        logger.info("integrity ok: %d gold refs resolve", checked)
    stats = corpus.corpus_stats(split, kb)
    _print({"knowledge": kb.stats(), "split": stats.as_dict()})
    return EXIT_OK


def _cmd_synth(args) -> int:
    stats = synth.build(args.out, seed=args.seed, scale=args.scale)
    _print(stats)
    return EXIT_OK


def _cmd_calibrate(args) -> int:
    _require(args, "data-dir", "artifacts-dir")
    summary = pipeline.calibrate_all(args.data_dir, args.artifacts_dir, seed=args.seed)
    _print(summary)
    return EXIT_OK


def _cmd_detect(args) -> int:
    kb, split = _load_data(args)
    model_path = args.model
    if model_path is None:
        _require(args, "artifacts-dir")
        model_path = args.artifacts_dir / "detector.json"
    model = detect.LexicalDetectorModel.load(model_path)
    _print(detect.evaluate_detector(model, split))
    return EXIT_OK


def _cmd_track(args) -> int:
    kb, split = _load_data(args)
    preds, golds, rows = [], [], []
    for ctx, lab in split.target_instances():
        pred = {e.key() for e in track.track_entities(ctx, kb)}
        gold = set(lab.gold_entity_keys())
        preds.append(pred)
        golds.append(gold)
        if pred != gold:
            rows.append((ctx.instance_id,
                         ";".join("/".join(k) for k in sorted(gold)),
                         ";".join("/".join(k) for k in sorted(pred))))
    ev = track.evaluate_tracking(preds, golds)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write("instance_id\tgold\tpredicted\n")
            for row in rows:
                fh.write("\t".join(row) + "\n")
        logger.info("wrote %d error rows to %s", len(rows), args.report)
    _print(ev.as_dict())
    return EXIT_OK


def _cmd_select(args) -> int:
    kb, split = _load_data(args)
    index = select.build_index(kb)
    if args.scorer == "external":
        from .external import ExternalClient, ExternalSnippetScorer
        _require(args, "external-url")
        scorer = ExternalSnippetScorer(ExternalClient(args.external_url))
    else:
        scorer = select.TfidfScorer(index) if args.scorer == "tfidf" else select.Bm25Scorer(index)
    threshold = args.threshold
    if args.calibrate or threshold is None:
        val = corpus.load_split(args.data_dir, "val")
        threshold = select.calibrate_threshold(scorer, val, kb).threshold
    rankings, preds, golds = [], [], []
    for ctx, lab in split.target_instances():
        ents = [kb.entity(d, e) for d, e in lab.gold_entity_keys()]
        cand = select.candidates_for_entities(kb, ents, ctx.instance_id)
        scored = scorer.score_candidates(ctx, cand)
        rankings.append([s.ref for s in scored])
        preds.append({s.ref for s in scored if s.score >= threshold})
        golds.append(set(lab.gold_snippets))
    report = metrics.full_report(
        selection_instance=metrics.instance_prf(preds, golds),
        selection_snippet=metrics.snippet_prf(preds, golds),
        map_score=metrics.mean_average_precision(rankings, golds),
    )
    _print({"scorer": args.scorer, "threshold": threshold, **report.as_dict()})
    return EXIT_OK


def _cmd_generate(args) -> int:
    kb, split = _load_data(args)
    lexicon = absa.SentimentLexicon.default()
    hyps, refs = [], []
    for ctx, lab in split.target_instances():
        selection = select.SnippetSelection(ctx.instance_id, lab.gold_snippets, 0.0)
        if args.mode == "ext":
            response = generate.generate_ext(selection, kb, args.seed)
        elif args.mode == "template":
            annotations = absa.tag_all(lexicon, (kb.snippet(r) for r in sorted(lab.gold_snippets)))
            response = generate.generate_template(ctx, selection, annotations, kb)
        else:
            from .external import ExternalClient
            _require(args, "external-url")
            annotations = absa.tag_all(lexicon, (kb.snippet(r) for r in sorted(lab.gold_snippets)))
            gen_input = generate.build_generation_input(
                ctx, selection, annotations, kb, use_absa=args.use_absa)
            response = generate.external_generate(ExternalClient(args.external_url), gen_input)
        hyps.append(response.text)
        refs.append(lab.reference_response)
    report = metrics.full_report(hypotheses=hyps, references=refs)
    _print({"mode": args.mode, **report.as_dict()})
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    kb, split = _load_data(args)
    by_id = {}
    with open(args.pred, encoding="utf-8") as fh:
        for line in fh:
            doc = json.loads(line)
            by_id[doc["instance_id"]] = doc
    rankings, preds, golds, hyps, refs = [], [], [], [], []
    for ctx, lab in split.target_instances():
        doc = by_id.get(ctx.instance_id)
        if doc is None:
            raise DataError(f"{ctx.instance_id} missing from predictions file")
        rankings.append([corpus.SnippetRef(*ref) for ref in doc["ranking"]])
        preds.append({corpus.SnippetRef(*ref) for ref in doc["selected"]})
        golds.append(set(lab.gold_snippets))
        if doc.get("response") and lab.reference_response:
            hyps.append(doc["response"])
            refs.append(lab.reference_response)
    report = metrics.full_report(
        selection_instance=metrics.instance_prf(preds, golds),
        selection_snippet=metrics.snippet_prf(preds, golds),
        map_score=metrics.mean_average_precision(rankings, golds),
        hypotheses=hyps or None,
        references=refs or None,
    )
    _print(report.as_dict())
    return EXIT_OK


def _load_config(args) -> pipeline.PipelineConfig:
    fields = {}
    if getattr(args, "config", None):
        fields = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if getattr(args, "external_url", None):
        fields["external_url"] = args.external_url
    fields.setdefault("seed", args.seed)
    return pipeline.PipelineConfig(**fields)


def _cmd_e2e(args) -> int:
    _require(args, "data-dir")
    config = _load_config(args)
    split = corpus.load_split(args.data_dir, args.split)
    artifacts = pipeline.load_artifacts(args.data_dir, args.artifacts_dir)
    result = pipeline.run_pipeline(config, split, artifacts)
    if args.out:
        result.write_outputs(args.out)
        logger.info("wrote %d instance outputs to %s", len(result.outputs), args.out)
    _print({"config": config.as_dict(), "elapsed_seconds": round(result.elapsed_seconds, 2),
            **result.report.as_dict()})
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .service import make_server, serve_forever

    _require(args, "data-dir", "artifacts-dir")
    host, _, port = args.bind.rpartition(":")
    artifacts = pipeline.load_artifacts(args.data_dir, args.artifacts_dir)
    server = make_server(
        artifacts,
        bind=(host or "127.0.0.1", int(port)),
        static_dir=args.static,
        event_log=args.event_log,
    )
    logger.info("serving on http://%s:%s/", host or "127.0.0.1", port)
    serve_forever(server)
    return EXIT_OK


_COMMANDS = {
    "ingest": _cmd_ingest,
    "synth": _cmd_synth,
    "calibrate": _cmd_calibrate,
    "detect": _cmd_detect,
    "track": _cmd_track,
    "select": _cmd_select,
    "generate": _cmd_generate,
    "evaluate": _cmd_evaluate,
    "e2e": _cmd_e2e,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ExternalServiceError as exc:
        print(f"external service error: {exc}", file=sys.stderr)
        return EXIT_EXTERNAL
    except SktodError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
