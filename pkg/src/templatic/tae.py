"""Template-adaptable scoring of generated panel sequences against references.

Precision and recall each decompose into three factors in [0, 1]:

* quality: mean similarity of each panel on one side to its most similar
  panel on the other side (generated side for precision, reference side
  for recall);
* order: rank agreement between the two sides after the aligned-to panels
  are replicated (or dropped) to force a one-to-one mapping, measured by
  Spearman correlation rescaled from [-1, 1] to [0, 1];
* length: exp(-| |ref| - |gen| | / |ref|), deliberately non-reflexive in
  the reference count so over-generation is never rewarded.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence, Union

from .metrics import EmbeddingProvider, MetricId, get_metric
from .panels import Panel, PanelSequence, Role

MetricLike = Union[MetricId, str, Callable[[Panel, Panel], float]]


class EmptySequenceError(ValueError):
    """Alignment needs at least one panel on each side."""


class EmptyReferenceError(EmptySequenceError):
    """Scoring needs a non-empty reference sequence."""


class EmptyCorpusError(ValueError):
    """Corpus scoring needs at least one document pair."""


class LengthMismatchError(ValueError):
    """Rank sequences must have equal length."""


class ZeroReferenceCountError(ValueError):
    """The length penalty divides by the reference count."""


class Direction(Enum):
    PRECISION = "precision"
    RECALL = "recall"


@dataclass(frozen=True)
class Alignment:
    """Argmax-similarity mapping of every source panel to a target panel.

    ``pairs[i]`` is the (target index, similarity) of source panel ``i``;
    ``lam[t]`` counts how many source panels map to target ``t``.
    """

    direction: Direction
    pairs: tuple[tuple[int, float], ...]
    lam: tuple[int, ...]

    def __post_init__(self) -> None:
        counts = [0] * len(self.lam)
        for target, _ in self.pairs:
            counts[target] += 1
        if tuple(counts) != self.lam:
            raise ValueError("lam does not match the alignment pairs")

    @property
    def similarities(self) -> tuple[float, ...]:
        return tuple(sim for _, sim in self.pairs)


@dataclass(frozen=True)
class RankPair:
    """Rank sequences fed to the order penalty.

    ``target_ranking`` is 1..N in appearance order (the side that was
    aligned from); ``source_ranking`` holds the ranks inherited by the
    replicated aligned-to panels, laid out in their document order.
    """

    source_ranking: tuple[int, ...]
    target_ranking: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.target_ranking)
        if len(self.source_ranking) != n:
            raise LengthMismatchError("rank sequences differ in length")
        if self.target_ranking != tuple(range(1, n + 1)):
            raise ValueError("target_ranking must be 1..N in order")
        if sorted(self.source_ranking) != list(range(1, n + 1)):
            raise ValueError("source_ranking must be a permutation of 1..N")


@dataclass(frozen=True)
class TaeScore:
    """All score components for one (reference, generated) pair."""

    q_p: float
    q_r: float
    o_p: float
    o_r: float
    l: float
    precision: float
    recall: float
    f1: float
    ref_count: int
    gen_count: int


def align(
    source: PanelSequence,
    target: PanelSequence,
    metric: MetricLike,
    direction: Optional[Direction] = None,
) -> Alignment:
    """Map each source panel to its most similar target panel.

    Ties (including all-zero similarity rows) break toward the lowest
    target index. When ``direction`` is omitted it is inferred from the
    source role: aligning generated panels onto references is the
    precision direction.
    """
    if len(source) == 0 or len(target) == 0:
        raise EmptySequenceError("cannot align empty panel sequences")
    if direction is None:
        direction = (
            Direction.PRECISION if source.role is Role.GENERATED else Direction.RECALL
        )
    score = _resolve_metric(metric)
    pairs = []
    lam = [0] * len(target)
    for panel in source:
        sims = [score(panel, t) for t in target]
        best = max(range(len(sims)), key=lambda t: (sims[t], -t))
        pairs.append((best, sims[best]))
        lam[best] += 1
    return Alignment(direction=direction, pairs=tuple(pairs), lam=tuple(lam))


def _resolve_metric(
    metric: MetricLike, provider: Optional[EmbeddingProvider] = None
) -> Callable[[Panel, Panel], float]:
    if callable(metric):
        return metric
    return get_metric(metric, provider)


def quality(alignment: Alignment) -> float:
    """Mean of the recorded max-similarities."""
    if not alignment.pairs:
        raise ValueError("quality of an empty alignment is undefined")
    return sum(alignment.similarities) / len(alignment.pairs)


def replicate_and_rank(alignment: Alignment) -> RankPair:
    """Force a one-to-one mapping and hand out appearance ranks.

    Source panels take ranks 1..N by appearance. Each target panel is
    replaced by as many copies as it has aligned sources (dropped at
    zero); the copies inherit their aligned sources' ranks in ascending
    order, and targets keep their document order.
    """
    n = len(alignment.pairs)
    source_ranking: list[int] = []
    for t in range(len(alignment.lam)):
        inherited = sorted(
            rank for rank, (target, _) in enumerate(alignment.pairs, start=1) if target == t
        )
        source_ranking.extend(inherited)
    return RankPair(
        source_ranking=tuple(source_ranking),
        target_ranking=tuple(range(1, n + 1)),
    )


def spearman(x: Sequence[int], y: Sequence[int]) -> float:
    """Spearman rank correlation for tie-free rank sequences.

    Uses the closed form 1 - 6*sum(d^2)/(n(n^2-1)), which is exact when
    both sequences hold distinct ranks.
    """
    if len(x) != len(y):
        raise LengthMismatchError(f"rank lengths differ: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 2:
        raise ValueError("spearman is undefined for fewer than 2 ranks")
    if len(set(x)) != n or len(set(y)) != n:
        raise ValueError("tied ranks are not supported")
    d2 = sum((a - b) ** 2 for a, b in zip(x, y))
    return 1.0 - (6.0 * d2) / (n * (n * n - 1))


def order_penalty(rank_pair: RankPair) -> float:
    """Spearman correlation mapped from [-1, 1] onto [0, 1].

    A single panel (or none) has vacuously perfect ordering, so n < 2
    yields 1; this keeps single-panel views scored purely by similarity.
    """
    n = len(rank_pair.target_ranking)
    if n < 2:
        return 1.0
    rho = spearman(rank_pair.source_ranking, rank_pair.target_ranking)
    return (rho + 1.0) / 2.0


def length_penalty(ref_count: int, gen_count: int) -> float:
    """exp(-|ref_count - gen_count| / ref_count); 1 iff the counts match."""
    if ref_count < 1:
        raise ZeroReferenceCountError("reference count must be >= 1")
    if gen_count < 0:
        raise ValueError("generated count must be >= 0")
    return math.exp(-abs(ref_count - gen_count) / ref_count)


def tae_score(
    reference: PanelSequence,
    generated: PanelSequence,
    metric: MetricLike,
    provider: Optional[EmbeddingProvider] = None,
) -> TaeScore:
    """Score a generated panel sequence against its reference.

    An empty generated sequence scores zero everywhere rather than
    raising, so failed generations stay rankable.
    """
    if len(reference) == 0:
        raise EmptyReferenceError("reference sequence has no panels")
    if len(generated) == 0:
        return TaeScore(
            q_p=0.0, q_r=0.0, o_p=0.0, o_r=0.0, l=0.0,
            precision=0.0, recall=0.0, f1=0.0,
            ref_count=len(reference), gen_count=0,
        )
    score = _resolve_metric(metric, provider)
    align_p = align(generated, reference, score, Direction.PRECISION)
    align_r = align(reference, generated, score, Direction.RECALL)
    q_p = quality(align_p)
    q_r = quality(align_r)
    o_p = order_penalty(replicate_and_rank(align_p))
    o_r = order_penalty(replicate_and_rank(align_r))
    l = length_penalty(len(reference), len(generated))
    precision = q_p * o_p * l
    recall = q_r * o_r * l
    total = precision + recall
    f1 = 2.0 * precision * recall / total if total > 0 else 0.0
    return TaeScore(
        q_p=q_p, q_r=q_r, o_p=o_p, o_r=o_r, l=l,
        precision=precision, recall=recall, f1=f1,
        ref_count=len(reference), gen_count=len(generated),
    )


@dataclass(frozen=True)
class CorpusScore:
    """Per-document scores plus their field-wise macro average.

    The aggregate reuses the TaeScore shape with each component averaged
    independently (its f1 is the mean of document f1 values, not the
    harmonic mean of the averaged precision/recall); counts are summed.
    """

    per_document: tuple[TaeScore, ...]
    aggregate: TaeScore


def corpus_score(
    pairs: Sequence[tuple[PanelSequence, PanelSequence]],
    metric: MetricLike,
    provider: Optional[EmbeddingProvider] = None,
    jobs: int = 1,
) -> CorpusScore:
    """Score (reference, generated) pairs and macro-average the results.

    Documents may be scored in parallel; results are merged in input
    order either way.
    """
    if not pairs:
        raise EmptyCorpusError("no document pairs to score")
    score = _resolve_metric(metric, provider)

    def one(pair: tuple[PanelSequence, PanelSequence]) -> TaeScore:
        return tae_score(pair[0], pair[1], score)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            scores = tuple(pool.map(one, pairs))
    else:
        scores = tuple(one(p) for p in pairs)

    n = len(scores)

    def mean(field: str) -> float:
        return sum(getattr(s, field) for s in scores) / n

    aggregate = TaeScore(
        q_p=mean("q_p"), q_r=mean("q_r"), o_p=mean("o_p"), o_r=mean("o_r"),
        l=mean("l"), precision=mean("precision"), recall=mean("recall"),
        f1=mean("f1"),
        ref_count=sum(s.ref_count for s in scores),
        gen_count=sum(s.gen_count for s in scores),
    )
    return CorpusScore(per_document=scores, aggregate=aggregate)
