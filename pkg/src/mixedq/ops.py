"""Creation/annihilation, field and Wick operators on the truncated Fock space.

A :class:`FockOperator` is a sparse matrix on levels ``0..N`` in frame-word
coordinates. Creators that would leave level N are cut off, so a normally
ordered product is the exact compression of the untruncated operator;
identities involving total creation degree ``g`` are asserted only on inputs
of level ``<= N - g`` (the guard band).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.sparse as sp

from .fock import WordBasis, twist_kernel, word_basis
from .model import Model, conj_J, conj_J_r, in_commutant_space, is_real_vector

Side = Literal["left", "right"]


@dataclass(frozen=True, eq=False)
class FockOperator:
    basis: WordBasis
    matrix: sp.csr_matrix
    degree: int = 0  # guard band: largest level shift

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def apply(self, v) -> np.ndarray:
        return self.matrix @ np.asarray(v, dtype=complex)

    def block(self, n_out: int, n_in: int) -> np.ndarray:
        b = self.basis
        return self.matrix[b.slice(n_out), b.slice(n_in)].toarray()

    def offsets(self) -> set[int]:
        """Level shifts carried by non-zero blocks."""
        out = set()
        for a in range(self.basis.level + 1):
            for b in range(self.basis.level + 1):
                blk = self.matrix[self.basis.slice(a), self.basis.slice(b)]
                if blk.nnz and abs(blk).max() > 0:
                    out.add(a - b)
        return out

    def _wrap(self, mat, degree) -> "FockOperator":
        return FockOperator(self.basis, sp.csr_matrix(mat), degree)

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        return self._wrap(self.matrix @ other.matrix, self.degree + other.degree)

    def __add__(self, other: "FockOperator") -> "FockOperator":
        return self._wrap(self.matrix + other.matrix, max(self.degree, other.degree))

    def __sub__(self, other: "FockOperator") -> "FockOperator":
        return self._wrap(self.matrix - other.matrix, max(self.degree, other.degree))

    def __mul__(self, c) -> "FockOperator":
        return self._wrap(self.matrix * c, self.degree)

    __rmul__ = __mul__

    def __neg__(self) -> "FockOperator":
        return self * -1


def identity(m: Model) -> FockOperator:
    b = word_basis(m)
    return FockOperator(b, sp.identity(b.total, dtype=complex, format="csr"), 0)


def zero(m: Model) -> FockOperator:
    b = word_basis(m)
    return FockOperator(b, sp.csr_matrix((b.total, b.total), dtype=complex), 0)


def vacuum(m: Model) -> np.ndarray:
    return word_basis(m).vacuum()


def one_particle(m: Model, xi) -> np.ndarray:
    """Embed a one-particle vector (ambient coordinates) into the Fock space."""
    b = word_basis(m)
    v = np.zeros(b.total, dtype=complex)
    v[b.slice(1)] = m.to_frame(xi)
    return v


def fock_vector(m: Model, letters) -> np.ndarray:
    """xi_1 (x) ... (x) xi_n as a Fock space vector."""
    from .fock import tensor_word

    b = word_basis(m)
    if len(letters) > b.level:
        raise ValueError(f"word of length {len(letters)} exceeds truncation level {b.level}")
    v = np.zeros(b.total, dtype=complex)
    v[b.slice(len(letters))] = tensor_word(m, letters)
    return v


def _assemble(b: WordBasis, blocks) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for r, c, v in blocks:
        rows.append(r)
        cols.append(c)
        vals.append(v)
    if not rows:
        return sp.csr_matrix((b.total, b.total), dtype=complex)
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(b.total, b.total),
        dtype=complex,
    )


def _create(m: Model, xi, side: Side) -> FockOperator:
    b = word_basis(m)
    c = m.to_frame(xi)
    D = m.dim
    blocks = []
    for n in range(b.level):
        size = D**n
        w = np.arange(size)
        letters = np.arange(D)
        if side == "left":
            tgt = (letters[:, None] * size + w[None, :]).ravel()
        else:
            tgt = (w[None, :] * D + letters[:, None]).ravel()
        src = np.broadcast_to(w[None, :], (D, size)).ravel()
        val = np.broadcast_to(c[:, None], (D, size)).ravel()
        keep = val != 0
        blocks.append((b.slice(n + 1).start + tgt[keep], b.slice(n).start + src[keep], val[keep]))
    return FockOperator(b, _assemble(b, blocks), 1)


def _annihilate(m: Model, xi, side: Side) -> FockOperator:
    b = word_basis(m)
    cbar = np.conj(m.to_frame(xi))
    q = m.q
    blocks = []
    for n in range(1, b.level + 1):
        words = b.words(n)
        sec = m.letter_sector[words]
        src = np.arange(words.shape[0])
        for k in range(n):
            val = cbar[words[:, k]].astype(complex)
            crossed = range(k) if side == "left" else range(k + 1, n)
            for j in crossed:
                val = val * q[sec[:, k], sec[:, j]]
            rest = np.delete(words, k, axis=1)
            tgt = b.indices(rest) if n > 1 else np.zeros_like(src)
            keep = val != 0
            blocks.append((b.slice(n - 1).start + tgt[keep], b.slice(n).start + src[keep], val[keep]))
    return FockOperator(b, _assemble(b, blocks), 1)


def left_create(m: Model, xi) -> FockOperator:
    """l(xi): prepend xi; level N is sent to zero."""
    return _create(m, xi, "left")


def left_annihilate(m: Model, xi) -> FockOperator:
    """l*(xi) on a word: sum_k <xi, x_k>_U q_{i_k i_{k-1}} ... q_{i_k i_1} (word without slot k)."""
    return _annihilate(m, xi, "left")


def right_create(m: Model, xi) -> FockOperator:
    return _create(m, xi, "right")


def right_annihilate(m: Model, xi) -> FockOperator:
    """r*(xi) on a word: sum_k <xi, x_k>_U q_{i_k i_{k+1}} ... q_{i_k i_n} (word without slot k)."""
    return _annihilate(m, xi, "right")


def free_annihilate(m: Model, xi) -> FockOperator:
    """Untwisted a*(xi): remove the first letter, weight <xi, letter>_U."""
    b = word_basis(m)
    cbar = np.conj(m.to_frame(xi))
    D = m.dim
    blocks = []
    for n in range(1, b.level + 1):
        size = D ** (n - 1)
        first = np.repeat(np.arange(D), size)
        src = np.arange(D**n)
        tgt = src % size
        val = cbar[first]
        keep = val != 0
        blocks.append((b.slice(n - 1).start + tgt[keep], b.slice(n).start + src[keep], val[keep]))
    return FockOperator(b, _assemble(b, blocks), 1)


def ladder_operator(m: Model) -> FockOperator:
    """Block diagonal R_n = 1 + T_1 + T_1 T_2 + ... over all levels."""
    from .fock import ladder

    b = word_basis(m)
    blocks = [sp.identity(1, dtype=complex)]
    for n in range(1, b.level + 1):
        blocks.append(sp.csr_matrix(ladder(m, n)))
    return FockOperator(b, sp.block_diag(blocks, format="csr").astype(complex), 0)


def field_s(m: Model, xi, tol: float = 1e-12) -> FockOperator:
    """s(xi) = l(xi) + l*(xi) for xi in H_R."""
    if not is_real_vector(xi, tol):
        raise ValueError("field_s needs a vector of H_R (real coordinates)")
    xi = np.real(np.asarray(xi)).astype(complex)
    return left_create(m, xi) + left_annihilate(m, xi)


def field_d(m: Model, eta, tol: float = 1e-10) -> FockOperator:
    """d(eta) = r(eta) + r(eta)^* for eta in H_R'."""
    if not in_commutant_space(m, eta, tol):
        raise ValueError("field_d needs a vector of H_R' (<eta, x>_U real for all real x)")
    return right_create(m, eta) + right_annihilate(m, eta)


def crossing_coefficient(q, labels, I, J, side: Side = "left") -> float:
    """Product of q_{t_i t_j} over i in I, j in J with i > j (left) or i < j (right).

    ``I`` and ``J`` are 1-based and must partition ``{1, ..., n}``.
    """
    q = np.asarray(q)
    n = len(labels)
    I, J = tuple(I), tuple(J)
    if set(I) & set(J) or set(I) | set(J) != set(range(1, n + 1)) or len(I) + len(J) != n:
        raise ValueError(f"I={I}, J={J} do not partition 1..{n}")
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    out = 1.0
    for i in I:
        for j in J:
            if (i > j) if side == "left" else (i < j):
                out *= q[labels[i - 1], labels[j - 1]]
    return float(out)


def splittings(n: int):
    """All (I, J) with I, J ascending and I |_| J = {1..n}."""
    full = range(1, n + 1)
    for l in range(n + 1):
        for I in itertools.combinations(full, l):
            yield I, tuple(j for j in full if j not in I)


@dataclass(eq=False)
class WickWord:
    """A tensor word of sector-labelled one-particle vectors (ambient coordinates)."""

    letters: list[np.ndarray]
    sectors: list[int]
    side: Side = "left"
    _op: FockOperator | None = field(default=None, repr=False)

    @classmethod
    def labelled(cls, m: Model, letters, side: Side = "left") -> "WickWord":
        """Label each letter by the unique sector supporting it."""
        letters = [np.asarray(x, dtype=complex) for x in letters]
        sectors = []
        for k, x in enumerate(letters):
            s = m.sector_of_vector(x)
            if s is None:
                raise ValueError(f"letter {k} is not supported in a single sector")
            sectors.append(s)
        return cls(letters, sectors, side)

    @classmethod
    def from_coords(cls, m: Model, coords, side: Side = "left") -> "WickWord":
        """Word of real coordinate vectors e_k."""
        return cls.labelled(m, [m.basis_vector(k) for k in coords], side)

    @classmethod
    def from_frame(cls, m: Model, letters, side: Side = "left") -> "WickWord":
        """Word of frame vectors f_a."""
        return cls([m.frame[:, a].copy() for a in letters], [int(m.letter_sector[a]) for a in letters], side)

    def __len__(self) -> int:
        return len(self.letters)

    def vector(self, m: Model) -> np.ndarray:
        return fock_vector(m, self.letters)

    def quantize(self, m: Model) -> FockOperator:
        if self._op is None:
            self._op = wick_s(m, self) if self.side == "left" else wick_d(m, self)
        return self._op


def _check_word(m: Model, word: WickWord) -> None:
    if len(word.sectors) != len(word.letters) or any(s is None for s in word.sectors):
        raise ValueError("every letter of a Wick word needs a sector label")
    if len(word) > m.level:
        raise ValueError(f"Wick word of length {len(word)} exceeds truncation level {m.level}")
    for k, (x, s) in enumerate(zip(word.letters, word.sectors)):
        if not 0 <= s < m.n_sectors:
            raise ValueError(f"letter {k}: no sector {s}")
        outside = np.delete(np.asarray(x), np.arange(m.dim)[m.sector_slices[s]])
        if np.linalg.norm(outside) > 1e-12 * max(np.linalg.norm(x), 1.0):
            raise ValueError(f"letter {k} is not inside its labelled sector {s}")


def _product(ops, size):
    out = sp.identity(size, dtype=complex, format="csr")
    for op in ops:
        out = out @ op
    return out


def wick_s(m: Model, word: WickWord) -> FockOperator:
    """s(xi_1 (x) ... (x) xi_n) as the sum over splittings (I, J) of
    f_(I,J) l(xi_I ascending) l*(J xi_J ascending)."""
    _check_word(m, word)
    b = word_basis(m)
    n = len(word)
    creators = [left_create(m, x).matrix for x in word.letters]
    annihilators = [left_annihilate(m, conj_J(x)).matrix for x in word.letters]
    total = sp.csr_matrix((b.total, b.total), dtype=complex)
    for I, J in splittings(n):
        f = crossing_coefficient(m.q, word.sectors, I, J, "left")
        if f == 0:
            continue
        ops = [creators[i - 1] for i in I] + [annihilators[j - 1] for j in J]
        total = total + f * _product(ops, b.total)
    return FockOperator(b, total.tocsr(), n)


def wick_d(m: Model, word: WickWord) -> FockOperator:
    """d(eta_1 (x) ... (x) eta_n), the right-handed Wick product.

    Both monomials are taken in descending letter order,
    f~_(I,J) r(eta_{i(l)}) ... r(eta_{i(1)}) r*(J_r eta_{j(m)}) ... r*(J_r eta_{j(1)}),
    which is the mirror image of the left formula under word reversal and
    gives d(eta) Omega = eta.
    """
    _check_word(m, word)
    b = word_basis(m)
    n = len(word)
    creators = [right_create(m, x).matrix for x in word.letters]
    annihilators = [right_annihilate(m, conj_J_r(m, x)).matrix for x in word.letters]
    total = sp.csr_matrix((b.total, b.total), dtype=complex)
    for I, J in splittings(n):
        f = crossing_coefficient(m.q, word.sectors, I, J, "right")
        if f == 0:
            continue
        ops = [creators[i - 1] for i in reversed(I)] + [annihilators[j - 1] for j in reversed(J)]
        total = total + f * _product(ops, b.total)
    return FockOperator(b, total.tocsr(), n)


def gram_operator(m: Model, inverse: bool = False) -> sp.csr_matrix:
    kern = twist_kernel(m)
    blocks = [kern.inv(n) if inverse else kern.P[n] for n in range(m.level + 1)]
    return sp.block_diag(blocks, format="csr").astype(complex)


def adjoint_T(m: Model, X: FockOperator) -> FockOperator:
    """Adjoint for <.,.>_T: block (n -> n') is P^(n)^{-1} (block n' -> n)^H P^(n')."""
    P = gram_operator(m)
    Pinv = gram_operator(m, inverse=True)
    return FockOperator(X.basis, (Pinv @ X.matrix.conj().T @ P).tocsr(), X.degree)


def adjoint_apply(m: Model, X: FockOperator, v) -> np.ndarray:
    """adjoint_T(X) @ v without forming the adjoint."""
    kern = twist_kernel(m)
    b = X.basis
    v = np.asarray(v, dtype=complex)
    Pv = np.concatenate([kern.P[n] @ v[b.slice(n)] for n in range(b.level + 1)])
    w = X.matrix.conj().T @ Pv
    return np.concatenate([np.linalg.solve(kern.P[n], w[b.slice(n)]) for n in range(b.level + 1)])


def levels_mask(b: WordBasis, levels) -> np.ndarray:
    mask = np.zeros(b.total, dtype=bool)
    for n in levels:
        mask[b.slice(n)] = True
    return mask


def t_norm(m: Model, v) -> float:
    """||v||_T for a full Fock vector."""
    kern = twist_kernel(m)
    b = word_basis(m)
    v = np.asarray(v, dtype=complex)
    total = sum(np.vdot(v[b.slice(n)], kern.P[n] @ v[b.slice(n)]).real for n in range(b.level + 1))
    return float(np.sqrt(max(total, 0.0)))


def inner(m: Model, u, v) -> complex:
    """<u, v>_T for full Fock vectors."""
    kern = twist_kernel(m)
    b = word_basis(m)
    u, v = np.asarray(u, dtype=complex), np.asarray(v, dtype=complex)
    return complex(sum(np.vdot(u[b.slice(n)], kern.P[n] @ v[b.slice(n)]) for n in range(b.level + 1)))


def t_operator_norm(m: Model, X, in_levels, out_levels=None) -> float:
    """Operator norm of X from levels ``in_levels`` into ``out_levels`` for <.,.>_T.

    ``X`` may be a FockOperator, a sparse or a dense matrix on the full
    truncated space.
    """
    kern = twist_kernel(m)
    b = word_basis(m)
    if out_levels is None:
        out_levels = range(b.level + 1)
    in_levels, out_levels = list(in_levels), list(out_levels)
    mat = X.matrix if isinstance(X, FockOperator) else X
    rows = []
    for a in out_levels:
        root = kern.sqrt(a)[0]
        cols = []
        for c in in_levels:
            blk = mat[b.slice(a), b.slice(c)]
            blk = blk.toarray() if sp.issparse(blk) else np.asarray(blk)
            cols.append(root @ blk @ kern.sqrt(c)[1])
        rows.append(np.hstack(cols))
    M = np.vstack(rows)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))
