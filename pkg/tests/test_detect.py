import pytest

from sktod import detect
from sktod.corpus import InstanceLabel, Split
from sktod.detect import (
    DetectionScore,
    DetectorConfig,
    LexicalDetectorModel,
    evaluate_detector,
    train_detector,
)
from sktod.errors import ConfigError, IntegrityError

from .conftest import make_context, make_label

SUBJECTIVE = [
    "Is the wifi reliable there?",
    "Does the restaurant have a good atmosphere?",
    "How comfortable are the beds?",
    "Do guests like the breakfast?",
    "Is the water pressure any good?",
    "Are the staff friendly and helpful?",
    "Is the food tasty at this place?",
    "How clean are the rooms there?",
    "Do people enjoy the ambience?",
    "Is it quiet at night?",
]
OBJECTIVE = [
    "Book it for 2 nights please.",
    "What is the phone number?",
    "Can I get the address?",
    "I need a taxi at 9:00.",
    "What time is checkout?",
    "Make the reservation for Friday.",
    "How many stars is it rated?",
    "Can you confirm the postcode?",
    "That is everything, thanks!",
    "Cancel my earlier booking please.",
]


def _toy_split(name: str, pos: list[str], neg: list[str]) -> Split:
    instances = []
    for i, text in enumerate(pos):
        ctx = make_context([text], instance_id=f"{name}-p{i:03d}")
        instances.append((ctx, make_label([("hotel", "0", "0", "0")], "Yes they do.")))
    for i, text in enumerate(neg):
        ctx = make_context([text], instance_id=f"{name}-n{i:03d}")
        instances.append((ctx, InstanceLabel(target=False)))
    return Split(name="train" if name == "train" else "val", instances=tuple(instances))


@pytest.fixture(scope="module")
def toy_model() -> LexicalDetectorModel:
    train = _toy_split("train", SUBJECTIVE, OBJECTIVE)
    val = _toy_split("val", SUBJECTIVE[:5], OBJECTIVE[:5])
    return train_detector(train, val, DetectorConfig(epochs=12, seed=5))


class TestTraining:
    def test_separable_toy_reaches_perfect_train_accuracy(self, toy_model):
        train = _toy_split("train", SUBJECTIVE, OBJECTIVE)
        scores = evaluate_detector(toy_model, train)
        assert scores["accuracy"] == 1.0

    def test_empty_split_raises(self):
        empty = Split(name="train", instances=())
        with pytest.raises(ConfigError):
            train_detector(empty, empty)

    def test_single_class_raises(self):
        pos_only = _toy_split("train", SUBJECTIVE, [])
        with pytest.raises(ConfigError):
            train_detector(pos_only, pos_only)

    def test_save_load_identical_predictions(self, toy_model, tmp_path):
        path = tmp_path / "model.json"
        toy_model.save(path)
        loaded = LexicalDetectorModel.load(path)
        for text in SUBJECTIVE + OBJECTIVE:
            ctx = make_context([text])
            assert detect.detect(loaded, ctx) == detect.detect(toy_model, ctx)

    def test_version_guard(self, toy_model, tmp_path):
        path = tmp_path / "model.json"
        toy_model.save(path)
        doc = path.read_text().replace('"format_version": 1', '"format_version": 99')
        path.write_text(doc)
        with pytest.raises(ConfigError):
            LexicalDetectorModel.load(path)


class TestDetect:
    def test_subjective_request_detected(self, toy_model):
        ctx = make_context([
            "I need a restaurant in the centre.",
            "How about The Golden Wok?",
            "Does the restaurant have a good atmosphere?",
        ])
        assert detect.detect(toy_model, ctx).decision is True

    def test_logit_zero_is_negative(self):
        score = DetectionScore(logit=0.0, decision=0.0 > detect.DECISION_THRESHOLD)
        assert score.decision is False

    def test_context_ending_in_system_turn_rejected(self):
        with pytest.raises(IntegrityError):
            make_context(["Hi.", "Hello!"])  # construction enforces the precondition

    def test_detect_is_pure(self, toy_model):
        ctx = make_context(["Is the wifi reliable there?"])
        first = detect.detect(toy_model, ctx)
        for _ in range(5):
            assert detect.detect(toy_model, ctx) == first

    def test_decision_depends_only_on_threshold_comparison(self):
        for logit in (-2.0, -1e-9, 0.0, 1e-9, 3.5):
            score = DetectionScore(logit=logit, decision=logit > detect.DECISION_THRESHOLD)
            assert score.decision == (logit > 0.0)


class TestEvaluate:
    def test_all_correct(self, toy_model):
        split = _toy_split("val", SUBJECTIVE, OBJECTIVE)
        scores = evaluate_detector(toy_model, split)
        assert scores == {"accuracy": 1.0, "precision": 1.0, "recall": 1.0, "f1": 1.0}

    def test_all_negative_predictions_on_positive_split(self):
        model = LexicalDetectorModel(weights={}, bias=-1.0, config=DetectorConfig())
        split = _toy_split("val", SUBJECTIVE, [])
        scores = evaluate_detector(model, split)
        assert scores["recall"] == 0.0
        assert scores["accuracy"] == 0.0

    def test_brute_force_accuracy_identity(self, toy_model):
        split = _toy_split("val", SUBJECTIVE[:4], OBJECTIVE[:6])
        scores = evaluate_detector(toy_model, split)
        correct = 0
        for ctx, lab in split.instances:
            if detect.detect(toy_model, ctx).decision == lab.target:
                correct += 1
        assert scores["accuracy"] == pytest.approx(correct / len(split))


class TestExternal:
    def test_external_detect_uses_logit(self):
        class FakeClient:
            def score(self, task, context, snippet_text):
                assert task == "ktd" and snippet_text == ""
                return 1.5

        ctx = make_context(["Is the wifi reliable there?"])
        score = detect.external_detect(FakeClient(), ctx)
        assert score.decision is True and score.logit == 1.5


class TestBench:
    def test_release_scale_accuracy(self, bench_artifacts, bench_test_split):
        scores = evaluate_detector(bench_artifacts.detector, bench_test_split)
        assert scores["accuracy"] >= 0.95
