"""Human-preference statistics: signed preferences, metric affinity via
Pearson correlation, Krippendorff's alpha agreement, and preference rates.

Annotators compare two variants of each document (generated with vs.
without the intermediate representation) and record which they prefer and
how strongly (1-3). A metric's affinity with those judgments is the
Pearson correlation between the signed preference degrees and the
metric's score delta between the two variants, paired per annotation.
"""

from __future__ import annotations

import csv
import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

from scipy import stats as _scipy_stats


class DegenerateInputError(ValueError):
    """Correlation is undefined: fewer than 2 points or zero variance."""


class MissingDeltaError(ValueError):
    def __init__(self, doc_id: str) -> None:
        self.doc_id = doc_id
        super().__init__(f"no metric delta for document {doc_id!r}")


class InsufficientDataError(ValueError):
    """Not enough annotations to compute the statistic."""


class AnnotationParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class Preference(Enum):
    WITH_REP = "with"
    SKIP_REP = "skip"


@dataclass(frozen=True)
class PreferenceAnnotation:
    doc_id: str
    annotator_id: str
    preferred: Preference
    degree: int

    def __post_init__(self) -> None:
        if self.degree not in (1, 2, 3):
            raise ValueError(f"degree must be 1, 2 or 3, got {self.degree}")


@dataclass(frozen=True)
class MetricDelta:
    """Score difference m(with rep) - m(skip rep) for one document."""

    doc_id: str
    metric: str
    s: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.s):
            raise ValueError(f"delta for {self.doc_id!r} is not finite")


def signed_preference(ann: PreferenceAnnotation) -> int:
    """+degree for the with-representation variant, -degree otherwise."""
    return ann.degree if ann.preferred is Preference.WITH_REP else -ann.degree


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation; raises DegenerateInputError when
    undefined (length < 2 or zero variance on either side)."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 2:
        raise DegenerateInputError("need at least 2 points")
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    cov = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    vx = math.fsum((a - mx) ** 2 for a in x)
    vy = math.fsum((b - my) ** 2 for b in y)
    if vx <= 0.0 or vy <= 0.0:
        raise DegenerateInputError("zero variance")
    r = cov / (math.sqrt(vx) * math.sqrt(vy))
    return max(-1.0, min(1.0, r))


def _t_p_value(r: float, n: int) -> Optional[float]:
    # two-sided t-approximation note; not a gate
    if n < 3:
        return None
    if abs(r) >= 1.0:
        return 0.0
    t = abs(r) * math.sqrt((n - 2) / (1.0 - r * r))
    return float(2.0 * _scipy_stats.t.sf(t, n - 2))


@dataclass(frozen=True)
class AffinityResult:
    r: float
    n: int
    p_value: Optional[float]


def affinity(
    deltas: Sequence[MetricDelta], prefs: Sequence[PreferenceAnnotation]
) -> AffinityResult:
    """Correlation of one metric's deltas with signed human preferences.

    Pairs are formed per annotation (each annotator judgment is one
    sample). Every annotated document must have a delta.
    """
    by_doc: dict[str, float] = {}
    for delta in deltas:
        if delta.doc_id in by_doc:
            raise ValueError(f"duplicate delta for document {delta.doc_id!r}")
        by_doc[delta.doc_id] = delta.s
    xs: list[float] = []
    ys: list[float] = []
    for ann in prefs:
        if ann.doc_id not in by_doc:
            raise MissingDeltaError(ann.doc_id)
        xs.append(float(signed_preference(ann)))
        ys.append(by_doc[ann.doc_id])
    r = pearson(xs, ys)
    return AffinityResult(r=r, n=len(xs), p_value=_t_p_value(r, len(xs)))


def krippendorff_alpha(prefs: Sequence[PreferenceAnnotation]) -> float:
    """Krippendorff's alpha for the nominal preferred-variant labels.

    alpha = 1 - D_o/D_e over the coincidence matrix of documents with at
    least two annotations. Perfect agreement yields 1 (also when every
    label is identical and D_e degenerates to 0).
    """
    units: dict[str, list[str]] = defaultdict(list)
    for ann in prefs:
        units[ann.doc_id].append(ann.preferred.value)
    pairable = {doc: labels for doc, labels in units.items() if len(labels) >= 2}
    if not pairable:
        raise InsufficientDataError(
            "need at least one document labeled by two or more annotators"
        )
    n = sum(len(labels) for labels in pairable.values())
    disagreement = 0.0
    totals: Counter[str] = Counter()
    for labels in pairable.values():
        totals.update(labels)
        m = len(labels)
        mismatched = sum(
            1 for i in range(m) for j in range(m) if i != j and labels[i] != labels[j]
        )
        disagreement += mismatched / (m - 1)
    d_o = disagreement / n
    d_e = sum(
        totals[c] * totals[k]
        for c in totals
        for k in totals
        if c != k
    ) / (n * (n - 1))
    if d_e == 0.0:
        return 1.0
    return 1.0 - d_o / d_e


@dataclass(frozen=True)
class PreferenceRates:
    majority_rate: float
    unanimous_rate: float
    n_documents: int


def preference_rate(prefs: Sequence[PreferenceAnnotation]) -> PreferenceRates:
    """Fraction of documents where the with-representation variant wins a
    strict majority, and where it wins unanimously. Ties count against."""
    if not prefs:
        raise InsufficientDataError("no annotations")
    by_doc: dict[str, list[Preference]] = defaultdict(list)
    for ann in prefs:
        by_doc[ann.doc_id].append(ann.preferred)
    majority = 0
    unanimous = 0
    for labels in by_doc.values():
        wins = sum(1 for label in labels if label is Preference.WITH_REP)
        if wins * 2 > len(labels):
            majority += 1
        if wins == len(labels):
            unanimous += 1
    n_docs = len(by_doc)
    return PreferenceRates(
        majority_rate=majority / n_docs,
        unanimous_rate=unanimous / n_docs,
        n_documents=n_docs,
    )


# --- file loading ----------------------------------------------------------


def load_annotations(path: str | Path) -> list[PreferenceAnnotation]:
    """Read JSON-lines annotations: {doc_id, annotator_id, preferred, degree}."""
    annotations: list[PreferenceAnnotation] = []
    seen: set[tuple[str, str]] = set()
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise AnnotationParseError(f"invalid JSON: {exc.msg}", line_no) from None
            for required in ("doc_id", "annotator_id", "preferred", "degree"):
                if required not in raw:
                    raise AnnotationParseError(f"missing field {required!r}", line_no)
            try:
                preferred = Preference(raw["preferred"])
            except ValueError:
                raise AnnotationParseError(
                    f"preferred must be 'with' or 'skip', got {raw['preferred']!r}", line_no
                ) from None
            try:
                ann = PreferenceAnnotation(
                    doc_id=str(raw["doc_id"]),
                    annotator_id=str(raw["annotator_id"]),
                    preferred=preferred,
                    degree=int(raw["degree"]),
                )
            except (TypeError, ValueError) as exc:
                raise AnnotationParseError(str(exc), line_no) from None
            key = (ann.doc_id, ann.annotator_id)
            if key in seen:
                raise AnnotationParseError(
                    f"duplicate annotation for {key[0]!r} by {key[1]!r}", line_no
                )
            seen.add(key)
            annotations.append(ann)
    return annotations


def load_deltas(path: str | Path) -> list[MetricDelta]:
    """Read metric deltas from CSV or JSON-lines rows of
    {doc_id, metric, with_score, skip_score}."""
    path = Path(path)
    rows: list[dict] = []
    if path.suffix.lower() == ".csv":
        with open(path, "r", encoding="utf-8", newline="") as handle:
            rows = list(csv.DictReader(handle))
    else:
        with open(path, "r", encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    rows.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise AnnotationParseError(f"invalid JSON: {exc.msg}", line_no) from None
    deltas: list[MetricDelta] = []
    for i, row in enumerate(rows, start=1):
        for required in ("doc_id", "metric", "with_score", "skip_score"):
            if required not in row or row[required] in (None, ""):
                raise AnnotationParseError(f"missing field {required!r}", i)
        try:
            s = float(row["with_score"]) - float(row["skip_score"])
        except (TypeError, ValueError):
            raise AnnotationParseError("scores must be numbers", i) from None
        deltas.append(MetricDelta(doc_id=str(row["doc_id"]), metric=str(row["metric"]), s=s))
    return deltas
