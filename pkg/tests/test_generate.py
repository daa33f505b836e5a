import json
import random

import pytest

from sktod import generate
from sktod.absa import Polarity, SentimentAnnotation
from sktod.corpus import SnippetRef
from sktod.errors import ConfigError
from sktod.generate import (
    GenerationInput,
    build_generation_input,
    generate_ext,
    generate_template,
    tally_sentiments,
)
from sktod.select import SnippetSelection

from .conftest import make_context
from .template_grammar import _make_case, parse_clause, split_rendered

class TestExt:
    def _selection(self, refs, iid="t-0"):
        return SnippetSelection(iid, frozenset(refs), 0.0)

    def test_singleton_returns_exact_text(self, tiny_kb):
        ref = SnippetRef("hotel", "0", "1", "0")
        resp = generate_ext(self._selection([ref]), tiny_kb, seed=1)
        assert resp.text == tiny_kb.snippet(ref).text

    def test_deterministic_under_seed(self, tiny_kb):
        refs = [SnippetRef("hotel", "0", "0", str(i)) for i in range(3)]
        a = generate_ext(self._selection(refs), tiny_kb, seed=9)
        b = generate_ext(self._selection(refs), tiny_kb, seed=9)
        assert a.text == b.text

    def test_output_is_one_selected_snippet(self, tiny_kb):
        refs = [SnippetRef("hotel", "0", "0", str(i)) for i in range(3)]
        for seed in range(10):
            resp = generate_ext(self._selection(refs), tiny_kb, seed=seed)
            assert resp.text in {tiny_kb.snippet(r).text for r in refs}

    def test_empty_selection_raises(self, tiny_kb):
        with pytest.raises(ConfigError):
            generate_ext(self._selection([]), tiny_kb, seed=1)


class TestTally:
    def test_all_negative(self):
        refs = [SnippetRef("hotel", "0", "0", str(i)) for i in range(5)]
        annotations = {
            r: SentimentAnnotation(ref=r, aspect_term="water pressure", polarity=Polarity.NEGATIVE)
            for r in refs
        }
        sel = SnippetSelection("i", frozenset(refs), 0.0)
        tally = tally_sentiments(sel, annotations)[("hotel", "0")]
        assert (tally.negative, tally.positive, tally.neutral) == (5, 0, 0)
        assert tally.total == 5

    def test_empty_selection(self):
        sel = SnippetSelection("i", frozenset(), 0.0)
        assert tally_sentiments(sel, {}) == {}

    def test_two_pos_one_neg(self):
        refs = [SnippetRef("hotel", "0", "0", str(i)) for i in range(3)]
        pols = [Polarity.POSITIVE, Polarity.POSITIVE, Polarity.NEGATIVE]
        annotations = {r: SentimentAnnotation(ref=r, aspect_term="wifi", polarity=p)
                       for r, p in zip(refs, pols)}
        sel = SnippetSelection("i", frozenset(refs), 0.0)
        tally = tally_sentiments(sel, annotations)[("hotel", "0")]
        assert (tally.positive, tally.negative) == (2, 1)

    def test_missing_annotation_raises(self):
        refs = [SnippetRef("hotel", "0", "0", "0")]
        sel = SnippetSelection("i", frozenset(refs), 0.0)
        with pytest.raises(ConfigError):
            tally_sentiments(sel, {})

    def test_counts_sum_to_total(self):
        rng = random.Random(0)
        for _ in range(50):
            kb, ctx, sel, ann = _make_case(rng)
            for tally in tally_sentiments(sel, ann).values():
                assert tally.positive + tally.neutral + tally.negative + tally.no_opinion == tally.total


class TestTemplate:
    def _render(self, kb, ctx, sel, ann):
        return generate_template(ctx, sel, ann, kb)

    def test_unanimous_negative_no_positive_clause(self, tiny_kb):
        refs = [SnippetRef("hotel", "0", "0", str(i)) for i in range(2)]
        ann = {r: SentimentAnnotation(ref=r, aspect_term="water pressure", polarity=Polarity.NEGATIVE)
               for r in refs}
        ctx = make_context(["Does Cityroomz have strong water pressure?"])
        resp = self._render(tiny_kb, ctx, SnippetSelection("i", frozenset(refs), 0.0), ann)
        assert "bad" in resp.text and "good" not in resp.text
        assert "both guests say water pressure is bad" in resp.text.lower()

    def test_mixed_majority_first_with_minority_count(self, tiny_kb):
        refs = [SnippetRef("hotel", "0", "0", str(i)) for i in range(3)]
        pols = [Polarity.POSITIVE, Polarity.POSITIVE, Polarity.NEGATIVE]
        ann = {r: SentimentAnnotation(ref=r, aspect_term="wifi", polarity=p)
               for r, p in zip(refs, pols)}
        ctx = make_context(["Is the wifi good at Cityroomz?"])
        resp = self._render(tiny_kb, ctx, SnippetSelection("i", frozenset(refs), 0.0), ann)
        assert "2 of 3 guests say wifi is good, but 1 of 3 say it is bad" in resp.text

    def test_empty_selection_fallback(self, tiny_kb):
        ctx = make_context(["Is the wifi good?"])
        resp = self._render(tiny_kb, ctx, SnippetSelection("i", frozenset(), 0.0), {})
        assert resp.text == generate.NO_FEEDBACK_TEXT
        assert resp.provenance == ()

    def test_two_entities_mention_order_golden(self, tiny_kb):
        # golden output frozen after the first render
        refs = [SnippetRef("hotel", "0", "0", "0"), SnippetRef("hotel", "1", "0", "0")]
        ann = {
            refs[0]: SentimentAnnotation(ref=refs[0], aspect_term="water pressure", polarity=Polarity.NEGATIVE),
            refs[1]: SentimentAnnotation(ref=refs[1], aspect_term="bed", polarity=Polarity.POSITIVE),
        }
        ctx = make_context([
            "I need a hotel.",
            "You could try the Gonville Hotel or Cityroomz.",
            "Which one is better for sleep and showers?",
        ], instance_id="golden-1")
        resp = self._render(tiny_kb, ctx, SnippetSelection("golden-1", frozenset(refs), 0.0), ann)
        assert resp.text == (
            "At The Gonville Hotel, the one guest who mentions bed says it is good. "
            "Meanwhile, at Cityroomz, the one guest who mentions water pressure says it is bad. "
            "Is there anything else I can help you with?"
        )

    def test_deterministic(self, tiny_kb):
        rng = random.Random(1)
        kb, ctx, sel, ann = _make_case(rng)
        assert self._render(kb, ctx, sel, ann).text == self._render(kb, ctx, sel, ann).text

    def test_provenance_subset_of_selection(self, tiny_kb):
        rng = random.Random(2)
        kb, ctx, sel, ann = _make_case(rng)
        resp = self._render(kb, ctx, sel, ann)
        assert {r for r, _ in resp.provenance} == set(sel.selected)


class TestProportionFaithfulness:
    def test_thousand_random_cases(self):
        rng = random.Random(99)
        for case in range(1000):
            kb, ctx, sel, ann = _make_case(rng)
            resp = generate_template(ctx, sel, ann, kb)
            tallies = tally_sentiments(sel, ann)
            multi = len(tallies) > 1
            clauses = split_rendered(resp.text, multi)
            assert len(clauses) == len(tallies), f"case {case}: clause count mismatch"
            parsed_by_counts = [parse_clause(c) for c in clauses]
            want = sorted(
                (t.positive, t.negative, t.neutral) for t in tallies.values()
            )
            got = sorted((p["pos"], p["neg"], p["neu"]) for p in parsed_by_counts
                         if p["m"] > 0 or True)
            # entities with zero opinionated snippets parse as (0, 0, 0)
            want = sorted((p, n, u) if (p + n + u) > 0 else (0, 0, 0) for p, n, u in want)
            assert got == want, f"case {case}: counts mismatch {got} vs {want}"
            for p in parsed_by_counts:
                assert p["minority"] == (p["pos"] > 0 and p["neg"] > 0), f"case {case}: minority rule"
                if p["minority"]:
                    assert p["majority_word"] == ("good" if p["pos"] >= p["neg"] else "bad")


class TestGenerationInput:
    def _setup(self, tiny_kb):
        refs = [SnippetRef("hotel", "0", "0", "0"), SnippetRef("hotel", "0", "1", "0"),
                SnippetRef("hotel", "0", "1", "1")]
        ann = {
            refs[0]: SentimentAnnotation(ref=refs[0], aspect_term="water pressure", polarity=Polarity.NEGATIVE),
            refs[1]: SentimentAnnotation(ref=refs[1], aspect_term="wifi", polarity=Polarity.POSITIVE),
            refs[2]: SentimentAnnotation(ref=refs[2], aspect_term="water pressure", polarity=Polarity.NEGATIVE),
        }
        ctx = make_context(["Is the wifi good at Cityroomz?"], instance_id="gi-1")
        sel = SnippetSelection("gi-1", frozenset(refs), 0.0)
        scores = {refs[0]: 0.2, refs[1]: 0.9, refs[2]: 0.5}
        return refs, ann, ctx, sel, scores

    def test_ordering_by_score_then_ref(self, tiny_kb):
        refs, ann, ctx, sel, scores = self._setup(tiny_kb)
        gi = build_generation_input(ctx, sel, ann, tiny_kb, use_absa=False, scores=scores)
        assert list(gi.snippet_refs) == [refs[1], refs[2], refs[0]]

    def test_permuting_selection_does_not_change_output(self, tiny_kb):
        refs, ann, ctx, sel, scores = self._setup(tiny_kb)
        gi1 = build_generation_input(ctx, sel, ann, tiny_kb, use_absa=True, scores=scores)
        sel2 = SnippetSelection("gi-1", frozenset(reversed(sorted(sel.selected))), 0.0)
        gi2 = build_generation_input(ctx, sel2, ann, tiny_kb, use_absa=True, scores=scores)
        assert gi1 == gi2
        assert gi1.serialize() == gi2.serialize()

    def test_absa_augmentation_applied(self, tiny_kb):
        refs, ann, ctx, sel, scores = self._setup(tiny_kb)
        gi = build_generation_input(ctx, sel, ann, tiny_kb, use_absa=True, scores=scores)
        assert gi.snippet_texts[0].endswith("wifi is great.")
        raw = build_generation_input(ctx, sel, ann, tiny_kb, use_absa=False, scores=scores)
        assert not raw.snippet_texts[0].endswith("wifi is great.")

    def test_empty_selection_context_only(self, tiny_kb):
        ctx = make_context(["Is the wifi good?"], instance_id="gi-2")
        sel = SnippetSelection("gi-2", frozenset(), 0.0)
        gi = build_generation_input(ctx, sel, {}, tiny_kb, use_absa=True)
        assert gi.snippet_texts == ()
        doc = json.loads(gi.serialize())
        assert doc["snippets"] == [] and len(doc["context"]) == 1

    def test_serialize_golden(self, tiny_kb):
        ctx = make_context(["Hi?"], instance_id="gi-3")
        ref = SnippetRef("hotel", "0", "0", "0")
        sel = SnippetSelection("gi-3", frozenset([ref]), 0.0)
        ann = {ref: SentimentAnnotation(ref=ref, aspect_term=None, polarity=Polarity.NONE)}
        gi = build_generation_input(ctx, sel, ann, tiny_kb, use_absa=False)
        assert gi.serialize() == (
            '{"context":[{"speaker":"U","text":"Hi?"}],'
            '"entities":["Cityroomz"],'
            '"snippets":["The water pressure was a disappointing trickle at best."]}'
        )


class TestExternalGenerate:
    def test_reply_with_provenance(self, tiny_kb):
        class FakeClient:
            def generate(self, context, snippets):
                assert snippets
                return "Guests are split on the wifi."

        ref = SnippetRef("hotel", "0", "1", "0")
        gi = GenerationInput(
            snippet_texts=("The wifi was fast.",),
            snippet_refs=(ref,),
            context_turns=(("U", "Is the wifi good?"),),
            entity_names=("Cityroomz",),
            polarities=(Polarity.POSITIVE,),
        )
        resp = generate.external_generate(FakeClient(), gi)
        assert resp.text.startswith("Guests are split")
        assert resp.provenance == ((ref, Polarity.POSITIVE),)

    def test_empty_reply_rejected(self, tiny_kb):
        class FakeClient:
            def generate(self, context, snippets):
                return "   "

        gi = GenerationInput((), (), (("U", "hi?"),), (), ())
        from sktod.errors import GenerationError
        with pytest.raises(GenerationError):
            generate.external_generate(FakeClient(), gi)
