from __future__ import annotations

import pytest

from templatic import _kernels
from templatic._kernels import _pure
from oracles import lcs_exhaustive, lcs_full_table


def test_empty_inputs():
    assert _pure.lcs_length([], [1, 2]) == 0
    assert _pure.lcs_length([1, 2], []) == 0
    assert _kernels.lcs_length([], []) == 0


def test_known_values():
    assert _pure.lcs_length([1, 2, 3], [1, 2, 3]) == 3
    assert _pure.lcs_length([1, 2, 3, 4], [1, 3, 4, 5]) == 3
    assert _pure.lcs_length([1, 2], [3, 4]) == 0


def test_pure_matches_exhaustive_oracle(rng):
    for _ in range(300):
        a = [rng.randint(0, 5) for _ in range(rng.randint(0, 8))]
        b = [rng.randint(0, 5) for _ in range(rng.randint(0, 8))]
        assert _pure.lcs_length(a, b) == lcs_exhaustive(a, b)


def test_pure_matches_full_table(rng):
    for _ in range(200):
        a = [rng.randint(0, 9) for _ in range(rng.randint(0, 40))]
        b = [rng.randint(0, 9) for _ in range(rng.randint(0, 40))]
        assert _pure.lcs_length(a, b) == lcs_full_table(a, b)


@pytest.mark.skipif(not _kernels.HAVE_SPEEDUPS, reason="compiled kernel not built")
def test_compiled_matches_pure(rng):
    from templatic._kernels import _speedups

    for _ in range(300):
        a = [rng.randint(0, 9) for _ in range(rng.randint(0, 60))]
        b = [rng.randint(0, 9) for _ in range(rng.randint(0, 60))]
        assert _speedups.lcs_length(a, b) == _pure.lcs_length(a, b)


def test_selected_impl_exported():
    assert _kernels.lcs_length([7, 8, 9], [9, 7, 8]) == 2
