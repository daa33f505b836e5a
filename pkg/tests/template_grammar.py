"""Independent parser for the template generator's documented grammar.

Used by the proportion-faithfulness tests: a rendered response is parsed
back into stated counts, which must equal the sentiment tallies exactly.
"""

import random
import re

from sktod.absa import Polarity, SentimentAnnotation
from sktod.corpus import SnippetRef
from sktod.generate import CONTINUATIONS
from sktod.select import SnippetSelection

from .conftest import make_context, make_kb

_PATTERNS = [
    ("unan", re.compile(r"^all (\d+) guests say (.+) is (good|bad)$")),
    ("unan2", re.compile(r"^both guests say (.+) is (good|bad)$")),
    ("unan1", re.compile(r"^the one guest who mentions (.+) says it is (good|bad)$")),
    ("neu", re.compile(r"^all (\d+) guests found (.+) just ok$")),
    ("neu2", re.compile(r"^both guests found (.+) just ok$")),
    ("neu1", re.compile(r"^the one guest who mentions (.+) found it just ok$")),
    ("mixed", re.compile(
        r"^(\d+) of (\d+) guests say (.+) is (good|bad), but (\d+) of (\d+) say it is (good|bad)"
        r"(?:, and (\d+) of (\d+) found it just ok)?$")),
    ("onesided_neu", re.compile(
        r"^(\d+) of (\d+) guests say (.+) is (good|bad), and (\d+) of (\d+) found it just ok$")),
    ("noop", re.compile(r"^guests mention it without expressing a clear opinion$")),
]


def parse_clause(clause: str) -> dict:
    """Recover (pos, neg, neu, m, has_minority_clause) from one entity clause."""
    clause = clause.strip().rstrip(".")
    clause = clause[0].lower() + clause[1:] if clause else clause
    for kind, rx in _PATTERNS:
        m = rx.match(clause)
        if not m:
            continue
        g = m.groups()
        if kind == "unan":
            n, word = int(g[0]), g[2]
            return {"pos": n if word == "good" else 0, "neg": n if word == "bad" else 0,
                    "neu": 0, "m": n, "minority": False}
        if kind == "unan2":
            word = g[1]
            return {"pos": 2 if word == "good" else 0, "neg": 2 if word == "bad" else 0,
                    "neu": 0, "m": 2, "minority": False}
        if kind == "unan1":
            word = g[1]
            return {"pos": 1 if word == "good" else 0, "neg": 1 if word == "bad" else 0,
                    "neu": 0, "m": 1, "minority": False}
        if kind == "neu":
            return {"pos": 0, "neg": 0, "neu": int(g[0]), "m": int(g[0]), "minority": False}
        if kind == "neu2":
            return {"pos": 0, "neg": 0, "neu": 2, "m": 2, "minority": False}
        if kind == "neu1":
            return {"pos": 0, "neg": 0, "neu": 1, "m": 1, "minority": False}
        if kind == "mixed":
            maj, m1, _, w1, minr, m2, w2 = int(g[0]), int(g[1]), g[2], g[3], int(g[4]), int(g[5]), g[6]
            assert m1 == m2 and {w1, w2} == {"good", "bad"}
            neu = int(g[7]) if g[7] else 0
            pos = maj if w1 == "good" else minr
            neg = maj if w1 == "bad" else minr
            return {"pos": pos, "neg": neg, "neu": neu, "m": m1, "minority": True,
                    "majority_word": w1}
        if kind == "onesided_neu":
            n, m1, _, word, neu, m2 = int(g[0]), int(g[1]), g[2], g[3], int(g[4]), int(g[5])
            assert m1 == m2
            return {"pos": n if word == "good" else 0, "neg": n if word == "bad" else 0,
                    "neu": neu, "m": m1, "minority": False}
        return {"pos": 0, "neg": 0, "neu": 0, "m": 0, "minority": False}
    raise AssertionError(f"unparseable clause: {clause!r}")


def split_rendered(text: str, multi: bool) -> list[str]:
    """Strip the continuation prompt and entity prefixes; return bare clauses."""
    for cont in CONTINUATIONS:
        if text.endswith(" " + cont):
            text = text[: -len(cont) - 1]
            break
    else:
        raise AssertionError(f"no continuation prompt in {text!r}")
    sentences = [s for s in text.split(". ") if s]
    clauses = []
    for s in sentences:
        s = s.rstrip(".")
        if multi:
            m = re.match(r"^(?:Meanwhile, at|At) (.+?), (.+)$", s)
            assert m, f"missing entity prefix in {s!r}"
            clauses.append(m.group(2))
        else:
            clauses.append(s)
    return clauses


def _make_case(rng: random.Random):
    """Random (kb, context, selection, annotations, tallies-by-entity)."""
    n_entities = rng.choice([1, 1, 1, 2])
    spec = {}
    refs_by_entity = {}
    for e in range(n_entities):
        n_snips = rng.randint(1, 8)
        spec[("hotel", str(e), f"Hotel Number{e}")] = [
            [f"filler sentence {i} for entity {e}" for i in range(n_snips)]]
        refs_by_entity[str(e)] = [SnippetRef("hotel", str(e), "0", str(i)) for i in range(n_snips)]
    kb = make_kb(spec)
    annotations = {}
    polarities = [Polarity.POSITIVE, Polarity.NEGATIVE, Polarity.NEUTRAL, Polarity.NONE]
    aspect_vocab = ["wifi", "breakfast", "parking"]
    selected = []
    for e, refs in refs_by_entity.items():
        for ref in refs:
            pol = rng.choice(polarities)
            aspect = None if pol is Polarity.NONE else rng.choice(aspect_vocab)
            annotations[ref] = SentimentAnnotation(ref=ref, aspect_term=aspect, polarity=pol)
            selected.append(ref)
    mention = " and ".join(f"Hotel Number{e}" for e in refs_by_entity)
    ctx = make_context([f"How is the wifi at {mention}?"], instance_id="t-case")
    selection = SnippetSelection("t-case", frozenset(selected), 0.5)
    return kb, ctx, selection, annotations


