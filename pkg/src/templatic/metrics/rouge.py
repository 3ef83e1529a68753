"""ROUGE-L: longest-common-subsequence precision/recall over tokens."""

from __future__ import annotations

from typing import Sequence

from .._kernels import lcs_length
from ._prf import PRF


def _as_ids(candidate: Sequence[str], reference: Sequence[str]) -> tuple[list[int], list[int]]:
    # intern tokens so the LCS kernel runs on ints
    ids: dict[str, int] = {}
    cand = [ids.setdefault(t, len(ids)) for t in candidate]
    ref = [ids.setdefault(t, len(ids)) for t in reference]
    return cand, ref


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> PRF:
    """ROUGE-L of a candidate token sequence against a reference.

    precision = LCS / |candidate| and recall = LCS / |reference|, each 0
    when the corresponding side is empty.
    """
    if candidate and reference:
        lcs = lcs_length(*_as_ids(candidate, reference))
    else:
        lcs = 0
    p = lcs / len(candidate) if candidate else 0.0
    r = lcs / len(reference) if reference else 0.0
    return PRF.from_pr(p, r)
