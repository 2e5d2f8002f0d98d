"""
Permutations of ``range(n)`` in one-line notation, with reduced words in the
simple transpositions.

Conventions: ``sigma[i]`` is the image of ``i``; products compose right to
left, ``(sigma * rho)[i] == sigma[rho[i]]``; the simple transposition
``tau_i`` (1-based, ``1 <= i <= n-1``) swaps ``i-1`` and ``i``. A word
``(i_1, ..., i_k)`` stands for ``tau_{i_1} * ... * tau_{i_k}``.

>>> canonical_reduced_word((1, 2, 0))
(1, 2)
>>> sorted(reduced_words((2, 1, 0)))
[(1, 2, 1), (2, 1, 2)]
"""

from __future__ import annotations

import itertools
from collections.abc import Iterator, Sequence

Perm = tuple[int, ...]


def identity(n: int) -> Perm:
    return tuple(range(n))


def is_permutation(sigma: Sequence[int]) -> bool:
    return sorted(sigma) == list(range(len(sigma)))


def compose(sigma: Sequence[int], rho: Sequence[int]) -> Perm:
    """``sigma * rho``: apply ``rho`` first."""
    if len(sigma) != len(rho):
        raise ValueError("permutations of different sizes")
    return tuple(sigma[r] for r in rho)


def transposition(n: int, i: int) -> Perm:
    if not 1 <= i <= n - 1:
        raise ValueError(f"tau_{i} is not a simple transposition of S_{n}")
    p = list(range(n))
    p[i - 1], p[i] = p[i], p[i - 1]
    return tuple(p)


def inversions(sigma: Sequence[int]) -> int:
    """Coxeter length: number of pairs ``i < j`` with ``sigma[i] > sigma[j]``."""
    return sum(1 for i, j in itertools.combinations(range(len(sigma)), 2) if sigma[i] > sigma[j])


def word_to_perm(n: int, word: Sequence[int]) -> Perm:
    p = identity(n)
    for i in word:
        p = compose(p, transposition(n, i))
    return p


def canonical_reduced_word(sigma: Sequence[int]) -> tuple[int, ...]:
    """Reduced word read off a bubble sort of the one-line notation.

    Swapping positions ``i-1, i`` of the one-line notation is right
    multiplication by ``tau_i``; sorting ``sigma`` to the identity with swaps
    ``a_1, ..., a_k`` gives ``sigma = tau_{a_k} ... tau_{a_1}``. Each swap
    removes exactly one inversion, so the word is reduced.
    """
    if not is_permutation(sigma):
        raise ValueError(f"not a permutation: {tuple(sigma)}")
    p = list(sigma)
    swaps = []
    n = len(p)
    for end in range(n - 1, 0, -1):
        for i in range(end):
            if p[i] > p[i + 1]:
                p[i], p[i + 1] = p[i + 1], p[i]
                swaps.append(i + 1)
    return tuple(reversed(swaps))


def reduced_words(sigma: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """All reduced words of ``sigma``, by peeling off right descents."""
    if not is_permutation(sigma):
        raise ValueError(f"not a permutation: {tuple(sigma)}")
    sigma = tuple(sigma)
    n = len(sigma)
    descents = [i for i in range(1, n) if sigma[i - 1] > sigma[i]]
    if not descents:
        yield ()
        return
    for i in descents:
        shorter = compose(sigma, transposition(n, i))
        for w in reduced_words(shorter):
            yield w + (i,)


def all_perms(n: int) -> list[Perm]:
    return list(itertools.permutations(range(n)))
