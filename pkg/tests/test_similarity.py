from __future__ import annotations

import math

import pytest
from hypothesis import given, strategies as st

from templatic.metrics import MetricId, StaticEmbeddingProvider, bleu, meteor, similarity
from templatic.panels import Role, SLIDES, make_sequence

TOKEN = st.sampled_from(["alpha", "beta", "gamma", "delta", "run", "running"])
PANEL_TEXT = st.lists(TOKEN, min_size=0, max_size=8).map(" ".join)


def panel(text: str, index: int = 0):
    return make_sequence([text], Role.REFERENCE, SLIDES)[0]


class TestDispatch:
    def test_rouge_identity(self):
        p = panel("some panel text")
        assert similarity(MetricId.ROUGE_L, p, p) == 1.0

    def test_accepts_string_ids(self):
        p = panel("a b")
        assert similarity("rouge_l", p, p) == 1.0

    def test_unknown_metric(self):
        p = panel("a")
        with pytest.raises(ValueError):
            similarity("levenshtein", p, p)

    def test_embedding_requires_provider(self):
        p = panel("a")
        with pytest.raises(ValueError, match="provider"):
            similarity(MetricId.EMBEDDING_COSINE, p, p)

    def test_embedding_with_provider(self):
        provider = StaticEmbeddingProvider({"a b": [1.0, 0.0], "c": [0.0, 1.0]})
        assert similarity(
            MetricId.EMBEDDING_COSINE, panel("a b"), panel("c"), provider
        ) == pytest.approx(0.5, abs=1e-12)

    def test_meteor_identity_closed_form(self):
        p = panel("one two three four five")
        assert similarity(MetricId.METEOR, p, p) == 1.0 - 0.5 / 5**3


class TestSymmetry:
    def test_bleu_symmetrized_by_geometric_mean(self):
        a, b = panel("a b c"), panel("a b d e")
        forward = bleu(a.tokens, b.tokens)
        backward = bleu(b.tokens, a.tokens)
        assert forward != backward  # directional underneath
        assert similarity(MetricId.BLEU, a, b) == pytest.approx(
            math.sqrt(forward * backward), abs=1e-15
        )

    def test_meteor_symmetrized_by_geometric_mean(self):
        a, b = panel("the cat sat"), panel("the cat was sitting")
        forward = meteor(a.tokens, b.tokens)
        backward = meteor(b.tokens, a.tokens)
        assert similarity(MetricId.METEOR, a, b) == pytest.approx(
            math.sqrt(forward * backward), abs=1e-15
        )

    @pytest.mark.parametrize("metric", [MetricId.ROUGE_L, MetricId.BLEU, MetricId.METEOR])
    @given(a=PANEL_TEXT, b=PANEL_TEXT)
    def test_symmetric_on_random_pairs(self, metric, a, b):
        pa, pb = panel(a), panel(b)
        assert similarity(metric, pa, pb) == similarity(metric, pb, pa)

    @pytest.mark.parametrize("metric", [MetricId.ROUGE_L, MetricId.BLEU, MetricId.METEOR])
    @given(a=PANEL_TEXT, b=PANEL_TEXT)
    def test_range_and_determinism(self, metric, a, b):
        pa, pb = panel(a), panel(b)
        first = similarity(metric, pa, pb)
        assert 0.0 <= first <= 1.0
        assert similarity(metric, pa, pb) == first
