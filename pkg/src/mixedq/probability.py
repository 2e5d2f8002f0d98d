"""Vacuum moments, a pair-partition oracle for them, and centralizer probes."""

from __future__ import annotations

import itertools
import weakref
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as sla

from .fock import twist_kernel, word_basis
from .model import Model, deformed_inner, is_real_vector
from .ops import FockOperator, WickWord, field_s, vacuum


@dataclass
class MomentQuery:
    """Letters xi_1..xi_k (ambient coordinates) of phi(s(xi_1) ... s(xi_k))."""

    letters: list[np.ndarray]
    coords: tuple[int, ...] | None = None  # set when every letter is a coordinate vector e_k

    @classmethod
    def from_coords(cls, m: Model, coords) -> "MomentQuery":
        coords = tuple(int(k) for k in coords)
        return cls([m.basis_vector(k) for k in coords], coords)

    def __len__(self) -> int:
        return len(self.letters)


def _check_query(m: Model, query: MomentQuery) -> None:
    k = len(query)
    if k > 2 * (m.level - 1):
        raise ValueError(f"moment of order {k} overflows truncation level {m.level} (need k <= {2 * (m.level - 1)})")


def phi(m: Model, x: FockOperator) -> complex:
    """Vacuum state <Omega, x Omega>_T."""
    return complex(x.apply(vacuum(m))[0])


_FIELDS: "weakref.WeakKeyDictionary[Model, dict]" = weakref.WeakKeyDictionary()


def _field(m: Model, xi) -> FockOperator:
    cache = _FIELDS.setdefault(m, {})
    key = np.asarray(xi, dtype=complex).tobytes()
    if key not in cache:
        cache[key] = field_s(m, xi)
    return cache[key]


def vacuum_moment(m: Model, query: MomentQuery) -> complex:
    """<Omega, s(xi_1) ... s(xi_k) Omega>_T by successive matrix-vector products."""
    _check_query(m, query)
    v = vacuum(m)
    for xi in reversed(query.letters):
        v = _field(m, xi).apply(v)
    return complex(v[0])


def pair_partitions(k: int):
    """All perfect matchings of range(k) as tuples of pairs (a, b), a < b."""
    yield from _pair_partitions(k)


@lru_cache(maxsize=None)
def _pair_partitions(k: int) -> tuple:
    if k % 2:
        return ()

    def rec(rest):
        if not rest:
            yield ()
            return
        a = rest[0]
        for i in range(1, len(rest)):
            b = rest[i]
            for tail in rec(rest[1:i] + rest[i + 1:]):
                yield ((a, b),) + tail

    return tuple(rec(tuple(range(k))))


@lru_cache(maxsize=None)
def _crossing_table(k: int) -> tuple:
    """(partition, [(a, c) first points of each crossing pair of pairs]) for every matching."""
    return tuple((p, tuple((p1[0], p2[0]) for p1, p2 in crossings(p))) for p in _pair_partitions(k))


def crossings(partition) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Pairs of pairs (a, b), (c, d) with a < c < b < d."""
    out = []
    for p1, p2 in itertools.permutations(partition, 2):
        (a, b), (c, d) = p1, p2
        if a < c < b < d:
            out.append((p1, p2))
    return out


def pair_partition_moment(m: Model, query: MomentQuery) -> complex:
    """Oracle: sum over pair partitions of prod <xi_a, xi_b>_U (a < b) times
    q_{s(pair), s(pair')} for every crossing of two pairs."""
    if query.coords is None:
        raise ValueError("the pair-partition oracle only accepts coordinate basis letters")
    _check_query(m, query)
    sec = [int(m.sector_of[k]) for k in query.coords]
    cov = {}
    total = 0j
    for partition, crossed in _crossing_table(len(query)):
        w = 1 + 0j
        for a, b in partition:
            key = (query.coords[a], query.coords[b])
            if key not in cov:
                cov[key] = deformed_inner(m, query.letters[a], query.letters[b])
            w *= cov[key]
            if w == 0:
                break
        if w == 0:
            continue
        for a, c in crossed:
            w *= m.q[sec[a], sec[c]]
        total += w
    return total


def vacuum_expectation(m: Model, x: FockOperator, y: FockOperator) -> complex:
    """phi(x y) = <Omega, x y Omega>_T."""
    return complex(x.apply(y.apply(vacuum(m)))[0])


def centralizer_residual(m: Model, x: FockOperator, samples) -> float:
    """max over samples y of |phi(x y) - phi(y x)|."""
    worst = 0.0
    for y in samples:
        worst = max(worst, abs(vacuum_expectation(m, x, y) - vacuum_expectation(m, y, x)))
    return worst


@dataclass
class CentralizerProbe:
    x: FockOperator
    samples: list[FockOperator]
    residuals: list[float] = field(default_factory=list)

    @property
    def max(self) -> float:
        return max(self.residuals, default=0.0)

    @property
    def mean(self) -> float:
        return float(np.mean(self.residuals)) if self.residuals else 0.0


def run_probe(m: Model, x: FockOperator, samples) -> CentralizerProbe:
    samples = list(samples)
    res = [abs(vacuum_expectation(m, x, y) - vacuum_expectation(m, y, x)) for y in samples]
    return CentralizerProbe(x, samples, res)


def sample_family(m: Model, rng: np.random.Generator, max_length: int = 3, n_random: int = 50) -> list[FockOperator]:
    """Wick words of length <= max_length over the coordinate basis, plus random real
    combinations of them."""
    max_length = min(max_length, m.level)
    words = []
    for n in range(1, max_length + 1):
        for coords in itertools.product(range(m.dim), repeat=n):
            words.append(WickWord.from_coords(m, coords).quantize(m))
    out = list(words)
    for _ in range(n_random):
        c = rng.normal(size=len(words))
        acc = words[0] * c[0]
        for ck, w in zip(c[1:], words[1:]):
            acc = acc + w * ck
        out.append(acc)
    return out


def oscillation_probe(m: Model, xi, t_grid, tol: float = 1e-10) -> list[float]:
    """|phi(exp(i t s(xi)))| along t_grid, for a U_t-fixed real unit vector xi.

    The exponential is taken of the <.,.>_T-symmetrized matrix
    P^{1/2} s(xi) P^{-1/2}; its (0, 0) entry is the vacuum expectation.
    """
    if not is_real_vector(xi):
        raise ValueError("oscillation_probe needs a real vector")
    xi = np.real(np.asarray(xi, dtype=complex))
    for t in (0.5, 1.0, 3.0):
        if np.linalg.norm(m.U(t) @ xi - xi) > tol:
            raise ValueError("oscillation_probe needs a vector fixed by U_t")
    kern = twist_kernel(m)
    b = word_basis(m)
    root = sla.block_diag(*[kern.sqrt(n)[0] for n in range(b.level + 1)])
    root_inv = sla.block_diag(*[kern.sqrt(n)[1] for n in range(b.level + 1)])
    X = root @ field_s(m, xi).dense() @ root_inv
    X = 0.5 * (X + X.conj().T)
    mu, V = np.linalg.eigh(X)
    weights = np.abs(V[0, :]) ** 2
    return [float(abs(np.sum(weights * np.exp(1j * t * mu)))) for t in t_grid]
