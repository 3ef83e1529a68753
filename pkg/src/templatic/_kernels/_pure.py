"""Pure-Python longest-common-subsequence kernel (fallback path).

Same contract as the compiled version in ``_speedups.pyx``: inputs are
sequences of small non-negative ints (interned token ids).
"""

from __future__ import annotations

from typing import Sequence


def lcs_length(a: Sequence[int], b: Sequence[int]) -> int:
    """Length of the longest common subsequence of ``a`` and ``b``."""
    if not a or not b:
        return 0
    if len(b) > len(a):
        a, b = b, a
    # single rolling row over the shorter sequence
    n = len(b)
    row = [0] * (n + 1)
    for x in a:
        prev = 0
        for j in range(1, n + 1):
            cur = row[j]
            if x == b[j - 1]:
                row[j] = prev + 1
            elif row[j - 1] > row[j]:
                row[j] = row[j - 1]
            prev = cur
    return row[n]
