"""Precision/recall/F1 triple shared by the token-overlap metrics."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, precision: float, recall: float) -> "PRF":
        total = precision + recall
        f1 = 2.0 * precision * recall / total if total > 0 else 0.0
        return cls(precision=precision, recall=recall, f1=f1)
