# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled longest-common-subsequence kernel.

Same contract as ``_pure.lcs_length``: inputs are sequences of small
non-negative ints (interned token ids).
"""

from cpython cimport array
import array

cdef array.array _INT_TEMPLATE = array.array('i', [])


def lcs_length(a, b):
    """Length of the longest common subsequence of ``a`` and ``b``."""
    cdef Py_ssize_t la = len(a), lb = len(b)
    if la == 0 or lb == 0:
        return 0
    if lb > la:
        a, b = b, a
        la, lb = lb, la
    cdef array.array xa = array.array('i', a)
    cdef array.array yb = array.array('i', b)
    cdef int[::1] x = xa
    cdef int[::1] y = yb
    cdef array.array rowarr = array.clone(_INT_TEMPLATE, lb + 1, zero=True)
    cdef int[::1] row = rowarr
    cdef Py_ssize_t i, j
    cdef int prev, cur, xi
    for i in range(la):
        prev = 0
        xi = x[i]
        for j in range(1, lb + 1):
            cur = row[j]
            if xi == y[j - 1]:
                row[j] = prev + 1
            elif row[j - 1] > row[j]:
                row[j] = row[j - 1]
            prev = cur
    return row[lb]
