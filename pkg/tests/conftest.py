"""Shared fixtures.

The benchmark fixtures resolve the evaluation corpus in this order:

1. SKTOD_DATA_DIR, when set, must point at a released-layout data
   directory (knowledge.json + train/val/test); it is used as-is.
2. Otherwise the deterministic surrogate release is generated once and
   cached under ~/.cache/sktod-bench, keyed by the generator source hash
   and seed, so repeated test runs skip the build.

Calibrated artifacts (detector + thresholds) are cached next to the
data the same way.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from pathlib import Path

import pytest

from sktod import absa, corpus, pipeline, synth
from sktod.corpus import (
    DialogueContext,
    Entity,
    InstanceLabel,
    KnowledgeBase,
    KnowledgeSnippet,
    SnippetRef,
    Speaker,
    Split,
    Utterance,
)

BENCH_SEED = 7


def _bench_cache_root() -> Path:
    return Path(os.environ.get("SKTOD_CACHE_DIR", Path.home() / ".cache" / "sktod-bench"))


def _generator_key() -> str:
    source = Path(synth.__file__).read_bytes()
    return hashlib.md5(source + str(BENCH_SEED).encode()).hexdigest()[:12]


@pytest.fixture(scope="session")
def bench_data_dir() -> Path:
    env = os.environ.get("SKTOD_DATA_DIR")
    if env:
        return Path(env)
    root = _bench_cache_root() / _generator_key()
    marker = root / "meta.json"
    if not marker.exists():
        synth.build(root, seed=BENCH_SEED)
    return root


@pytest.fixture(scope="session")
def bench_kb(bench_data_dir) -> KnowledgeBase:
    return corpus.load_knowledge_base(bench_data_dir / "knowledge.json")


@pytest.fixture(scope="session")
def bench_test_split(bench_data_dir) -> Split:
    return corpus.load_split(bench_data_dir, "test")


@pytest.fixture(scope="session")
def bench_val_split(bench_data_dir) -> Split:
    return corpus.load_split(bench_data_dir, "val")


@pytest.fixture(scope="session")
def bench_artifacts_dir(bench_data_dir) -> Path:
    """Calibrated artifacts for the benchmark corpus, cached across runs.

    Records detector training wall-time in calibration.json for the
    training-budget acceptance criterion.
    """
    out = bench_data_dir / "_artifacts"
    summary_path = out / "calibration.json"
    if not summary_path.exists():
        started = time.monotonic()
        summary = pipeline.calibrate_all(bench_data_dir, out, seed=13)
        summary["wall_seconds"] = time.monotonic() - started
        summary_path.write_text(json.dumps(summary, indent=1, sort_keys=True), encoding="utf-8")
    return out


@pytest.fixture(scope="session")
def bench_artifacts(bench_data_dir, bench_artifacts_dir) -> pipeline.Artifacts:
    return pipeline.load_artifacts(bench_data_dir, bench_artifacts_dir)


# ---------------------------------------------------------------------------
# Small hand-built fixtures


def make_context(texts: list[str], instance_id: str = "t-00000", first: Speaker = Speaker.USER) -> DialogueContext:
    """Alternating dialogue from bare texts; first speaker configurable."""
    utts = []
    speaker = first
    for i, text in enumerate(texts):
        utts.append(Utterance(speaker=speaker, text=text, turn_index=i))
        speaker = Speaker.SYSTEM if speaker is Speaker.USER else Speaker.USER
    return DialogueContext(utterances=tuple(utts), instance_id=instance_id)


def make_kb(entities: dict[tuple[str, str, str], list[list[str]]]) -> KnowledgeBase:
    """KB from {(domain, entity_id, name): [review sentence lists]}."""
    ents = []
    reviews = {}
    for (domain, entity_id, name), revs in entities.items():
        ents.append(Entity(entity_id=entity_id, domain=domain, name=name))
        revmap = {}
        for rid, sentences in enumerate(revs):
            revmap[str(rid)] = [
                KnowledgeSnippet(ref=SnippetRef(domain, entity_id, str(rid), str(sid)), text=text)
                for sid, text in enumerate(sentences)
            ]
        reviews[(domain, entity_id)] = revmap
    return KnowledgeBase(ents, reviews)


@pytest.fixture
def tiny_kb() -> KnowledgeBase:
    return make_kb({
        ("hotel", "0", "Cityroomz"): [
            ["The water pressure was a disappointing trickle at best.",
             "The shower was weak and rinsing off took ages.",
             "We arrived at 3pm after a long drive."],
            ["The wifi was fast and reliable for our whole stay.",
             "The water pressure is not good and it comes out slowly."],
        ],
        ("hotel", "1", "The Gonville Hotel"): [
            ["The bed was wonderfully soft and we slept like logs.",
             "Breakfast was stale and the coffee tasted burnt."],
        ],
        ("restaurant", "0", "The Golden Wok"): [
            ["The ambience was so fun.",
             "Portions are huge, we took half of it home."],
        ],
    })


@pytest.fixture
def tiny_lexicon() -> absa.SentimentLexicon:
    return absa.SentimentLexicon.default()


def make_label(refs: list[tuple[str, str, str, str]], response: str = "Guests are happy.") -> InstanceLabel:
    if not refs:
        return InstanceLabel(target=False)
    return InstanceLabel(
        target=True,
        gold_snippets=frozenset(SnippetRef(*r) for r in refs),
        reference_response=response,
    )
