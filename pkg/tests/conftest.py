from __future__ import annotations

import random

import pytest

from templatic.panels import Role, SLIDES, make_sequence

VOCAB = [
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta",
    "iota", "kappa", "model", "data", "panel", "slide", "result", "method",
    "graph", "score", "test", "value",
]


def random_panel_texts(rng: random.Random, n_panels: int, max_tokens: int = 8,
                       vocab=None, distinct: bool = False) -> list[str]:
    vocab = vocab or VOCAB
    texts: list[str] = []
    seen: set[tuple[str, ...]] = set()
    while len(texts) < n_panels:
        tokens = tuple(
            rng.choice(vocab) for _ in range(rng.randint(1, max_tokens))
        )
        if distinct and tokens in seen:
            continue
        seen.add(tokens)
        texts.append(" ".join(tokens))
    return texts


def random_sequence(rng: random.Random, role: Role, n_panels: int, **kw):
    return make_sequence(random_panel_texts(rng, n_panels, **kw), role, SLIDES)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240817)
