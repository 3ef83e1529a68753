"""Sentence-level smoothed BLEU.

Panel texts are short, so unsmoothed BLEU collapses to zero; add-one
smoothing is applied to an n-gram precision only when its match count is
zero, which keeps exact matches at a score of exactly 1. The order cap is
min(max_n, |candidate|) so short identical panels still score 1.
"""

from __future__ import annotations

import math
from collections import Counter
from typing import Sequence


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: Sequence[str], reference: Sequence[str], max_n: int = 4) -> float:
    """Smoothed BLEU of a candidate token sequence against a reference.

    Geometric mean of n-gram precisions for n = 1..min(max_n, |candidate|),
    times the brevity penalty exp(1 - |reference|/|candidate|) when the
    candidate is shorter. Empty candidate or reference scores 0.
    """
    if not candidate or not reference:
        return 0.0
    eff_n = min(max_n, len(candidate))
    log_sum = 0.0
    for n in range(1, eff_n + 1):
        cand_counts = _ngram_counts(candidate, n)
        ref_counts = _ngram_counts(reference, n)
        overlap = sum(min(c, ref_counts[g]) for g, c in cand_counts.items())
        total = sum(cand_counts.values())
        if overlap == 0:
            p = (overlap + 1) / (total + 1)
        else:
            p = overlap / total
        log_sum += math.log(p)
    score = math.exp(log_sum / eff_n)
    if len(candidate) < len(reference):
        score *= math.exp(1.0 - len(reference) / len(candidate))
    return score
