"""Knowledge-seeking turn detection with a sparse lexical classifier.

The detector is logistic regression over word 1-2-gram and character
3-5-gram features of the final user utterance, optionally extended with
word n-grams of the immediately preceding system turn.  Training uses
online updates with weight averaging and early stopping on validation
accuracy; the decision rule is logit > threshold with the threshold fixed
at 0.
"""

from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import dataclass
from pathlib import Path

from .corpus import DialogueContext, Speaker, Split, tokenize
from .errors import ConfigError

logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1
DECISION_THRESHOLD = 0.0


@dataclass(frozen=True)
class DetectionScore:
    logit: float
    decision: bool


@dataclass
class DetectorConfig:
    word_orders: tuple[int, ...] = (1, 2)
    char_orders: tuple[int, ...] = (3, 4, 5)
    include_prev_system: bool = True
    epochs: int = 8
    learning_rate: float = 0.2
    patience: int = 2
    seed: int = 13

    def as_dict(self) -> dict:
        return {
            "word_orders": list(self.word_orders),
            "char_orders": list(self.char_orders),
            "include_prev_system": self.include_prev_system,
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "patience": self.patience,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DetectorConfig":
        return cls(
            word_orders=tuple(d["word_orders"]),
            char_orders=tuple(d["char_orders"]),
            include_prev_system=d["include_prev_system"],
            epochs=d["epochs"],
            learning_rate=d["learning_rate"],
            patience=d["patience"],
            seed=d["seed"],
        )


def extract_features(context: DialogueContext, config: DetectorConfig) -> dict[str, float]:
    """Feature counts for the final user utterance (+ previous system turn)."""
    feats: dict[str, float] = {}

    def _add(key: str):
        feats[key] = feats.get(key, 0.0) + 1.0

    user_text = context.last_user_utterance.text
    tokens = tokenize(user_text)
    for n in config.word_orders:
        for i in range(len(tokens) - n + 1):
            _add("w%d=%s" % (n, " ".join(tokens[i:i + n])))
    joined = " ".join(tokens)
    for n in config.char_orders:
        for i in range(len(joined) - n + 1):
            _add("c%d=%s" % (n, joined[i:i + n]))
    if config.include_prev_system and len(context.utterances) >= 2:
        prev = context.utterances[-2]
        if prev.speaker is Speaker.SYSTEM:
            sys_tokens = tokenize(prev.text)
            for n in config.word_orders:
                for i in range(len(sys_tokens) - n + 1):
                    _add("s%d=%s" % (n, " ".join(sys_tokens[i:i + n])))
    return feats


class LexicalDetectorModel:
    """Immutable-after-training sparse logistic model."""

    def __init__(self, weights: dict[str, float], bias: float, config: DetectorConfig):
        self.weights = weights
        self.bias = bias
        self.config = config

    def logit(self, context: DialogueContext) -> float:
        feats = extract_features(context, self.config)
        w = self.weights
        return self.bias + sum(w[f] * v for f, v in feats.items() if f in w)

    def save(self, path: str | Path) -> None:
        doc = {
            "format_version": MODEL_FORMAT_VERSION,
            "config": self.config.as_dict(),
            "bias": self.bias,
            "weights": self.weights,
        }
        Path(path).write_text(json.dumps(doc, ensure_ascii=False), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "LexicalDetectorModel":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if doc.get("format_version") != MODEL_FORMAT_VERSION:
            raise ConfigError(f"unsupported detector model version {doc.get('format_version')}")
        return cls(weights=doc["weights"], bias=doc["bias"], config=DetectorConfig.from_dict(doc["config"]))


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def train_detector(train: Split, val: Split, config: DetectorConfig | None = None) -> LexicalDetectorModel:
    """Averaged online logistic training with early stopping on val accuracy."""
    config = config or DetectorConfig()
    examples = [(extract_features(ctx, config), 1.0 if lab.target else 0.0) for ctx, lab in train.instances]
    if not examples:
        raise ConfigError("empty training split")
    labels = {y for _, y in examples}
    if len(labels) < 2:
        raise ConfigError("training data contains a single class; need both targets and non-targets")

    val_examples = [(extract_features(ctx, config), lab.target) for ctx, lab in val.instances]
    rng = random.Random(config.seed)
    order = list(range(len(examples)))

    weights: dict[str, float] = {}
    acc: dict[str, float] = {}
    bias = 0.0
    bias_acc = 0.0
    step = 0

    def _averaged() -> tuple[dict[str, float], float]:
        if step == 0:
            return dict(weights), bias
        avg = {f: w - acc.get(f, 0.0) / step for f, w in weights.items()}
        return avg, bias - bias_acc / step

    def _val_accuracy(avg_w: dict[str, float], avg_b: float) -> float:
        if not val_examples:
            return 0.0
        correct = 0
        for feats, target in val_examples:
            z = avg_b + sum(avg_w.get(f, 0.0) * v for f, v in feats.items())
            if (z > DECISION_THRESHOLD) == target:
                correct += 1
        return correct / len(val_examples)

    best = (-1.0, None)
    epochs_since_best = 0
    for epoch in range(config.epochs):
        rng.shuffle(order)
        for idx in order:
            feats, y = examples[idx]
            z = bias + sum(weights.get(f, 0.0) * v for f, v in feats.items())
            grad = config.learning_rate * (y - _sigmoid(z))
            if grad:
                step_t = step
                for f, v in feats.items():
                    delta = grad * v
                    weights[f] = weights.get(f, 0.0) + delta
                    acc[f] = acc.get(f, 0.0) + step_t * delta
                bias += grad
                bias_acc += step_t * grad
            step += 1
        avg_w, avg_b = _averaged()
        val_acc = _val_accuracy(avg_w, avg_b)
        logger.info("detector epoch %d: val accuracy %.4f", epoch + 1, val_acc)
        if val_acc > best[0]:
            best = (val_acc, (avg_w, avg_b))
            epochs_since_best = 0
        else:
            epochs_since_best += 1
            if epochs_since_best >= config.patience:
                break
    avg_w, avg_b = best[1] if best[1] is not None else _averaged()
    return LexicalDetectorModel(weights=avg_w, bias=avg_b, config=config)


def detect(model: LexicalDetectorModel, context: DialogueContext) -> DetectionScore:
    """Score one context; decision is logit strictly above the threshold."""
    if context.last_user_utterance.speaker is not Speaker.USER:
        raise ConfigError("detect requires a context ending in a user turn")
    logit = model.logit(context)
    return DetectionScore(logit=logit, decision=logit > DECISION_THRESHOLD)


def external_detect(client, context: DialogueContext) -> DetectionScore:
    """Same contract as detect, with the logit served remotely.

    Transport failures propagate as ExternalServiceError so callers can
    tell an unreachable scorer apart from a negative decision.
    """
    logit = client.score("ktd", context, "")
    return DetectionScore(logit=logit, decision=logit > DECISION_THRESHOLD)


def evaluate_detector(model: LexicalDetectorModel, split: Split) -> dict[str, float]:
    """Accuracy, precision, recall, F1 of the threshold decision on a split."""
    tp = fp = tn = fn = 0
    for ctx, lab in split.instances:
        decision = detect(model, ctx).decision
        if decision and lab.target:
            tp += 1
        elif decision and not lab.target:
            fp += 1
        elif not decision and lab.target:
            fn += 1
        else:
            tn += 1
    n = tp + fp + tn + fn
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {
        "accuracy": (tp + tn) / n if n else 0.0,
        "precision": precision,
        "recall": recall,
        "f1": f1,
    }
