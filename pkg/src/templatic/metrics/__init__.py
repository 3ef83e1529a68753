"""Pluggable panel-to-panel similarity metrics.

Every registered metric yields a symmetric value in [0, 1]:
precision/recall metrics contribute their F1, and directional scores
(BLEU, METEOR) are symmetrized by the geometric mean of both directions.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Callable, Optional

from ..panels import Panel
from ._prf import PRF
from .bleu import bleu
from .embeddings import (
    CachedEmbeddingProvider,
    EmbeddingProvider,
    EmbeddingProviderConfig,
    HttpEmbeddingProvider,
    ProviderError,
    ProviderResponseError,
    ProviderUnavailableError,
    StaticEmbeddingProvider,
    embedding_cosine,
    token_greedy_embedding,
)
from .meteor import meteor
from .rouge import rouge_l

__all__ = [
    "MetricId",
    "PRF",
    "bleu",
    "meteor",
    "rouge_l",
    "similarity",
    "get_metric",
    "EmbeddingProvider",
    "EmbeddingProviderConfig",
    "HttpEmbeddingProvider",
    "StaticEmbeddingProvider",
    "CachedEmbeddingProvider",
    "ProviderError",
    "ProviderResponseError",
    "ProviderUnavailableError",
    "embedding_cosine",
    "token_greedy_embedding",
]

PanelMetric = Callable[[Panel, Panel], float]


class MetricId(str, Enum):
    ROUGE_L = "rouge_l"
    BLEU = "bleu"
    METEOR = "meteor"
    EMBEDDING_COSINE = "embedding_cosine"
    TOKEN_GREEDY_EMBEDDING = "token_greedy_embedding"


def _sym_geomean(x: float, y: float) -> float:
    # exact on the diagonal: sqrt(x*x) can drift by one ulp
    return x if x == y else math.sqrt(x * y)


def get_metric(
    metric: MetricId | str, provider: Optional[EmbeddingProvider] = None
) -> PanelMetric:
    """Resolve a metric id to a ``(Panel, Panel) -> float`` scorer.

    Embedding-backed metrics require ``provider``.
    """
    mid = MetricId(metric)
    if mid is MetricId.ROUGE_L:
        return lambda a, b: rouge_l(a.tokens, b.tokens).f1
    if mid is MetricId.BLEU:
        return lambda a, b: _sym_geomean(bleu(a.tokens, b.tokens), bleu(b.tokens, a.tokens))
    if mid is MetricId.METEOR:
        return lambda a, b: _sym_geomean(meteor(a.tokens, b.tokens), meteor(b.tokens, a.tokens))
    if provider is None:
        raise ValueError(f"metric {mid.value} requires an embedding provider")
    if mid is MetricId.EMBEDDING_COSINE:
        return lambda a, b: embedding_cosine(a.text, b.text, provider)
    return lambda a, b: token_greedy_embedding(a.tokens, b.tokens, provider).f1


def similarity(
    metric: MetricId | str,
    a: Panel,
    b: Panel,
    provider: Optional[EmbeddingProvider] = None,
) -> float:
    """Symmetric similarity of two panels under the given metric."""
    value = get_metric(metric, provider)(a, b)
    if not 0.0 <= value <= 1.0:
        raise RuntimeError(f"metric {metric} produced out-of-range value {value}")
    return value
