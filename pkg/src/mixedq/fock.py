"""Truncated Fock space combinatorics: word bases, the twist T, the
quasi-multiplicative map pi(sigma) and the kernels P^(n).

Level ``n`` is spanned by words ``f_{a_1} (x) ... (x) f_{a_n}`` over the
U-orthonormal frame of the model. A word is stored at index
``sum_k a_k D^(n-k)`` (first letter most significant), so prepending a
letter is ``kron(c, I)`` and appending one is ``kron(I, c)``. At T = 0 the
words are orthonormal, hence the level Gram of <.,.>_T is P^(n) itself.

T and every T_i send a word to a multiple of another word; these monomial
maps are kept as ``(target, coef)`` index arrays and only densified for the
caller.
"""

from __future__ import annotations

import itertools
import logging
import math
import weakref
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import perms
from .model import Model

log = logging.getLogger(__name__)

POSITIVITY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class WordBasis:
    """Ordered words per level ``0..level`` over ``dim`` sector-labelled letters."""

    dim: int
    level: int
    letter_sector: np.ndarray

    def size(self, n: int) -> int:
        return self.dim**n

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum([self.dim**n for n in range(self.level + 1)])]).astype(int)

    @property
    def total(self) -> int:
        return int(self.offsets[-1])

    def slice(self, n: int) -> slice:
        off = self.offsets
        return slice(int(off[n]), int(off[n + 1]))

    def words(self, n: int) -> np.ndarray:
        """All level-n words as an array of shape (dim**n, n)."""
        return _words(self.dim, n)

    def word(self, n: int, index: int) -> tuple[int, ...]:
        return tuple(int(a) for a in self.words(n)[index])

    def index(self, word) -> int:
        i = 0
        for a in word:
            if not 0 <= a < self.dim:
                raise ValueError(f"letter {a} out of range")
            i = i * self.dim + int(a)
        return i

    def indices(self, words: np.ndarray) -> np.ndarray:
        n = words.shape[1]
        weights = self.dim ** np.arange(n - 1, -1, -1)
        return words @ weights

    def sectors(self, n: int) -> np.ndarray:
        return self.letter_sector[self.words(n)]

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.total, dtype=complex)
        v[0] = 1.0
        return v

    def level_of(self, position: int) -> int:
        return int(np.searchsorted(self.offsets, position, side="right") - 1)


@lru_cache(maxsize=64)
def _words(dim: int, n: int) -> np.ndarray:
    if n == 0:
        return np.zeros((1, 0), dtype=int)
    w = np.array(list(itertools.product(range(dim), repeat=n)), dtype=int)
    w.setflags(write=False)
    return w


def word_basis(m: Model, level: int | None = None) -> WordBasis:
    return WordBasis(m.dim, m.level if level is None else level, m.letter_sector)


@dataclass(frozen=True)
class LevelOperator:
    level: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise ValueError("level operators are square")

    def __matmul__(self, other: "LevelOperator") -> "LevelOperator":
        if other.level != self.level:
            raise ValueError("level mismatch")
        return LevelOperator(self.level, self.matrix @ other.matrix)


@dataclass(frozen=True)
class Monomial:
    """Map sending basis word ``w`` to ``coef[w] * e_{target[w]}``."""

    target: np.ndarray
    coef: np.ndarray

    @classmethod
    def identity(cls, size: int) -> "Monomial":
        return cls(np.arange(size), np.ones(size))

    def then(self, other: "Monomial") -> "Monomial":
        """``other @ self``: apply self, then other."""
        return Monomial(other.target[self.target], self.coef * other.coef[self.target])

    def __matmul__(self, other: "Monomial") -> "Monomial":
        return other.then(self)

    def dense(self) -> np.ndarray:
        n = self.target.size
        M = np.zeros((n, n), dtype=self.coef.dtype)
        np.add.at(M, (self.target, np.arange(n)), self.coef)
        return M

    def add_to(self, M: np.ndarray) -> None:
        np.add.at(M, (self.target, np.arange(self.target.size)), self.coef)


def _twist_monomial(words: np.ndarray, sectors: np.ndarray, q: np.ndarray, dim: int, i: int) -> Monomial:
    n = words.shape[1]
    swapped = words.copy()
    swapped[:, [i - 1, i]] = swapped[:, [i, i - 1]]
    coef = q[sectors[:, i - 1], sectors[:, i]]
    weights = dim ** np.arange(n - 1, -1, -1)
    return Monomial(swapped @ weights, coef.astype(float))


def twist_monomial(m: Model, i: int, n: int, q: np.ndarray | None = None) -> Monomial:
    """T_i on level n: T acting on slots (i, i+1), 1-based."""
    if not 1 <= i <= n - 1:
        raise ValueError(f"T_{i} is undefined on level {n}")
    words = _words(m.dim, n)
    return _twist_monomial(words, m.letter_sector[words], m.q if q is None else q, m.dim, i)


def twist_matrix(m: Model) -> LevelOperator:
    """T on level 2: f_a (x) f_b -> q_{s(a) s(b)} f_b (x) f_a."""
    return LevelOperator(2, twist_monomial(m, 1, 2).dense())


def extend_twist(m: Model, i: int, n: int) -> LevelOperator:
    return LevelOperator(n, twist_monomial(m, i, n).dense())


def _pi_word_monomial(m: Model, word, n: int, q=None) -> Monomial:
    size = m.dim**n
    out = Monomial.identity(size)
    # T_{i_1} ... T_{i_k}: the rightmost factor acts first
    for i in reversed(word):
        out = out.then(twist_monomial(m, i, n, q))
    return out


def pi_sigma(m: Model, sigma, n: int, word=None) -> LevelOperator:
    """pi(sigma) evaluated along ``word`` (default: the canonical reduced word)."""
    sigma = tuple(sigma)
    if len(sigma) != n or not perms.is_permutation(sigma):
        raise ValueError(f"{sigma} is not a permutation in S_{n}")
    if word is None:
        word = perms.canonical_reduced_word(sigma)
    elif perms.word_to_perm(n, word) != sigma or len(word) != perms.inversions(sigma):
        raise ValueError(f"{tuple(word)} is not a reduced word of {sigma}")
    return LevelOperator(n, _pi_word_monomial(m, word, n).dense())


def ladder(m: Model, n: int, q=None) -> np.ndarray:
    """R_n = 1 + T_1 + T_1 T_2 + ... + T_1 T_2 ... T_{n-1} on level n."""
    size = m.dim**n
    R = np.zeros((size, size))
    prod = Monomial.identity(size)
    prod.add_to(R)
    for k in range(1, n):
        # T_1 ... T_k = (T_1 ... T_{k-1}) T_k: apply T_k first
        prod = twist_monomial(m, k, n, q).then(prod)
        prod.add_to(R)
    return R


def p_matrix_brute(m: Model, n: int, q=None) -> np.ndarray:
    """Oracle: the literal sum over S_n of pi(sigma)."""
    size = m.dim**n
    P = np.zeros((size, size))
    for sigma in perms.all_perms(n):
        _pi_word_monomial(m, perms.canonical_reduced_word(sigma), n, q).add_to(P)
    return P


@dataclass(eq=False)
class TwistKernel:
    """P^(n) for n = 0..level, with factorizations and minimum eigenvalues."""

    model: Model
    level: int
    P: list[np.ndarray] = field(default_factory=list)
    chol: list[np.ndarray] = field(default_factory=list)
    min_eig: list[float] = field(default_factory=list)
    _sqrt: dict = field(default_factory=dict)
    _inv: dict = field(default_factory=dict)

    @classmethod
    def build(cls, m: Model, level: int | None = None, q=None) -> "TwistKernel":
        level = m.level if level is None else level
        kern = cls(m, level)
        D = m.dim
        for n in range(level + 1):
            if n <= 1:
                P = np.eye(D**n)
            else:
                # P^(n) = (1 (x) P^(n-1)) R_n
                P = np.kron(np.eye(D), kern.P[n - 1]) @ ladder(m, n, q)
            kern.P.append(P)
            w = np.linalg.eigvalsh(0.5 * (P + P.T))
            kern.min_eig.append(float(w[0]))
            if w[0] > POSITIVITY_TOL:
                kern.chol.append(np.linalg.cholesky(0.5 * (P + P.T)))
            else:
                log.warning("P^(%d) is not strictly positive: min eigenvalue %.3e", n, w[0])
                kern.chol.append(None)
        return kern

    def sqrt(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """(P^(n))^{1/2} and its inverse."""
        if n not in self._sqrt:
            P = self.P[n]
            w, V = np.linalg.eigh(0.5 * (P + P.T))
            if w[0] <= 0:
                raise np.linalg.LinAlgError(f"P^({n}) is not positive definite")
            self._sqrt[n] = ((V * np.sqrt(w)) @ V.T, (V / np.sqrt(w)) @ V.T)
        return self._sqrt[n]

    def inv(self, n: int) -> np.ndarray:
        if n not in self._inv:
            self._inv[n] = np.linalg.inv(self.P[n])
        return self._inv[n]


_KERNELS: "weakref.WeakKeyDictionary[Model, TwistKernel]" = weakref.WeakKeyDictionary()


def twist_kernel(m: Model) -> TwistKernel:
    """Kernel for the model's truncation level, cached per model."""
    kern = _KERNELS.get(m)
    if kern is None:
        kern = _KERNELS[m] = TwistKernel.build(m)
    return kern


def p_matrix(m: Model, n: int) -> LevelOperator:
    if not 0 <= n <= m.level:
        raise ValueError(f"level {n} exceeds the truncation level {m.level}")
    return LevelOperator(n, twist_kernel(m).P[n])


def level_of_vector(m: Model, v) -> int:
    v = np.asarray(v)
    n = round(math.log(v.size, m.dim)) if v.size > 1 else (0 if v.size == 1 else -1)
    if m.dim**n != v.size:
        raise ValueError(f"vector of length {v.size} is not a Fock level over dimension {m.dim}")
    return n


def inner_T(m: Model, xi, eta, m_level: int | None = None, n_level: int | None = None) -> complex:
    """<xi, eta>_T for level vectors in frame-word coordinates.

    The level is inferred from the length unless given (needed when dim = 1).
    """
    xi, eta = np.asarray(xi, dtype=complex), np.asarray(eta, dtype=complex)
    a = level_of_vector(m, xi) if m_level is None else m_level
    b = level_of_vector(m, eta) if n_level is None else n_level
    if a != b:
        return 0j
    return complex(np.vdot(xi, p_matrix(m, a).matrix @ eta))


def tensor_word(m: Model, letters) -> np.ndarray:
    """Frame-word coordinates of xi_1 (x) ... (x) xi_n (ambient letters)."""
    v = np.ones(1, dtype=complex)
    for xi in letters:
        v = np.kron(v, m.to_frame(xi))
    return v


def check_positivity(m: Model, n: int) -> float:
    if not 0 <= n <= m.level:
        raise ValueError(f"level {n} exceeds the truncation level {m.level}")
    value = twist_kernel(m).min_eig[n]
    if value <= POSITIVITY_TOL:
        log.warning("degenerate kernel: min eigenvalue of P^(%d) = %.3e", n, value)
    return value


def min_eigenvalues(m: Model, levels, q=None) -> list[float]:
    kern = TwistKernel.build(m, max(levels), q)
    return [kern.min_eig[n] for n in levels]


def yang_baxter_residual(T: np.ndarray, dim: int) -> float:
    """|| (1 (x) T)(T (x) 1)(1 (x) T) - (T (x) 1)(1 (x) T)(T (x) 1) || on level 3."""
    eye = np.eye(dim)
    T1 = np.kron(T, eye)
    T2 = np.kron(eye, T)
    return float(np.linalg.norm(T2 @ T1 @ T2 - T1 @ T2 @ T1, 2))


def check_yang_baxter(m: Model, twist: np.ndarray | None = None) -> float:
    T = twist_matrix(m).matrix if twist is None else twist
    return yang_baxter_residual(T, m.dim)


def sector_invariance_residual(m: Model, n: int) -> float:
    """Mass of P^(n) outside the blocks of words with equal sector multisets."""
    if n == 0:
        return 0.0
    S = np.sort(word_basis(m).sectors(n), axis=1)
    same = np.all(S[:, None, :] == S[None, :, :], axis=2)
    return float(np.max(np.abs(np.where(same, 0.0, twist_kernel(m).P[n]))))
