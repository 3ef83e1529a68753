"""METEOR with exact and stem matching stages.

The synonym stage of the original metric needs an external lexical
database and is omitted; matching runs an exact stage followed by a
Porter-stem stage, with the standard constants: F_mean = 10PR/(R+9P) and
fragmentation penalty 0.5 * (chunks/matches)^3.
"""

from __future__ import annotations

from typing import Sequence

from ._porter import stem


def _greedy_alignment(
    candidate: Sequence[str], reference: Sequence[str]
) -> list[tuple[int, int]]:
    """Two-stage greedy unigram alignment: exact matches, then stems.

    Each stage scans candidate tokens in order and pairs them with the
    first still-unmatched reference token, so the alignment is
    deterministic. Returns (candidate index, reference index) pairs sorted
    by candidate position.
    """
    matches: list[tuple[int, int]] = []
    ref_taken = [False] * len(reference)
    cand_open = [True] * len(candidate)

    for i, tok in enumerate(candidate):
        for j, ref_tok in enumerate(reference):
            if not ref_taken[j] and tok == ref_tok:
                matches.append((i, j))
                ref_taken[j] = True
                cand_open[i] = False
                break

    ref_stems = [stem(t) for t in reference]
    for i, tok in enumerate(candidate):
        if not cand_open[i]:
            continue
        tok_stem = stem(tok)
        for j in range(len(reference)):
            if not ref_taken[j] and tok_stem == ref_stems[j]:
                matches.append((i, j))
                ref_taken[j] = True
                cand_open[i] = False
                break

    matches.sort()
    return matches


def _chunk_count(matches: list[tuple[int, int]]) -> int:
    chunks = 0
    prev = None
    for i, j in matches:
        if prev is None or i != prev[0] + 1 or j != prev[1] + 1:
            chunks += 1
        prev = (i, j)
    return chunks


def meteor(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """METEOR of a candidate token sequence against a reference.

    Zero matches (including either side empty) score 0. Identical m-token
    sequences score exactly 1 - 0.5/m^3.
    """
    if not candidate or not reference:
        return 0.0
    matches = _greedy_alignment(candidate, reference)
    m = len(matches)
    if m == 0:
        return 0.0
    p = m / len(candidate)
    r = m / len(reference)
    f_mean = 10.0 * p * r / (r + 9.0 * p)
    chunks = _chunk_count(matches)
    penalty = 0.5 * (chunks**3) / (m**3)
    return f_mean * (1.0 - penalty)
