"""Benchmark the LCS kernel: compiled extension vs pure-Python fallback.

The LCS dynamic program inside ROUGE-L dominates corpus scoring time,
especially for blog-template panels where each panel is a whole document.
Run with ``python benchmarks/bench_lcs.py``.
"""

from __future__ import annotations

import random
import time

from templatic._kernels import _pure

try:
    from templatic._kernels import _speedups
except ImportError:
    _speedups = None

from templatic.metrics import rouge_l

WORKLOADS = [
    # name, tokens per side, pairs scored
    ("slide panels", 30, 2000),
    ("poster sections", 80, 800),
    ("blog documents", 1500, 6),
]


def _make_pairs(rng: random.Random, length: int, count: int) -> list[tuple[list[int], list[int]]]:
    return [
        (
            [rng.randint(0, 200) for _ in range(length)],
            [rng.randint(0, 200) for _ in range(length)],
        )
        for _ in range(count)
    ]


def _time(fn, pairs) -> float:
    start = time.perf_counter()
    for a, b in pairs:
        fn(a, b)
    return time.perf_counter() - start


def main() -> None:
    rng = random.Random(4242)
    print(f"{'workload':<18} {'pairs':>6} {'pure (s)':>10} {'compiled (s)':>13} {'speedup':>8}")
    for name, length, count in WORKLOADS:
        pairs = _make_pairs(rng, length, count)
        pure_s = _time(_pure.lcs_length, pairs)
        if _speedups is not None:
            fast_s = _time(_speedups.lcs_length, pairs)
            ratio = f"{pure_s / fast_s:7.1f}x"
            fast_col = f"{fast_s:13.3f}"
        else:
            fast_col = f"{'n/a':>13}"
            ratio = f"{'n/a':>8}"
        print(f"{name:<18} {count:>6} {pure_s:>10.3f} {fast_col} {ratio}")

    # end to end through the metric (token interning + PRF on top of the kernel)
    rng2 = random.Random(99)
    vocab = [f"w{i}" for i in range(500)]
    docs = [
        ([rng2.choice(vocab) for _ in range(1200)], [rng2.choice(vocab) for _ in range(1200)])
        for _ in range(4)
    ]
    start = time.perf_counter()
    for a, b in docs:
        rouge_l(a, b)
    total = time.perf_counter() - start
    kernel = "compiled" if _speedups is not None else "pure"
    print(f"\nrouge_l on 4 blog-sized pairs via selected kernel ({kernel}): {total:.3f}s")


if __name__ == "__main__":
    main()
