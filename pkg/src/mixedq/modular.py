"""Tomita-Takesaki data of the vacuum on the truncated Fock space, and the
state-preserving conditional expectation onto invariant-subspace subalgebras.

Antilinear maps are stored as ``K`` with ``X v = K @ conj(v)`` in
frame-word coordinates. Their adjoints for a Gram ``P`` follow from
<x, X y> = <y, X^dagger x>: the linear part of X^dagger is
``P^{-1} K^T P^T``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .fock import POSITIVITY_TOL, tensor_word, twist_kernel, word_basis
from .model import Model, conj_J, deformed_inner
from .ops import (
    FockOperator,
    WickWord,
    adjoint_apply,
    field_d,
    field_s,
    levels_mask,
    t_operator_norm,
    vacuum,
    wick_s,
)

log = logging.getLogger(__name__)

DEFAULT_GUARD = 2
INVARIANCE_TOL = 1e-10
DEFAULT_T_GRID = (-1.0, -0.3, 0.3, 1.0, 2.5)


class TruncationError(RuntimeError):
    """The truncated model is too small for the requested construction."""


@dataclass(eq=False)
class ModularData:
    model: Model
    guard: int
    top: int  # highest level carrying modular data
    S: list[np.ndarray] = field(default_factory=list)
    delta: list[np.ndarray] = field(default_factory=list)
    J: list[np.ndarray] = field(default_factory=list)
    _spectral: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = field(default_factory=list)
    diagnostics: dict[str, float] = field(default_factory=dict)

    def delta_power(self, n: int, z: complex) -> np.ndarray:
        """Delta^z on level n via the P-self-adjoint spectral decomposition."""
        mu, V, (root, root_inv) = self._spectral[n]
        return root_inv @ (V * mu.astype(complex) ** z) @ V.conj().T @ root

    def _full(self, blocks) -> np.ndarray:
        b = word_basis(self.model)
        M = np.zeros((b.total, b.total), dtype=complex)
        for n, blk in enumerate(blocks):
            s = b.slice(n)
            M[s, s] = blk
        return M

    def J_full(self) -> np.ndarray:
        """Linear part of J on levels 0..top (zero above)."""
        return self._full(self.J)

    def delta_it_full(self, t: float) -> np.ndarray:
        return self._full([self.delta_power(n, 1j * t) for n in range(self.top + 1)])

    def apply_J(self, v) -> np.ndarray:
        return self.J_full() @ np.conj(v)


def tomita_S(m: Model, guard: int = DEFAULT_GUARD) -> list[np.ndarray]:
    """Linear parts of S on levels 0..N-guard, from S(w) = adjoint_T(wick_s(w)) Omega."""
    top = m.level - guard
    if top < 0:
        raise TruncationError(f"truncation level {m.level} leaves no room for guard band {guard}")
    b = word_basis(m)
    omega = vacuum(m)
    out = []
    for n in range(top + 1):
        words = b.words(n)
        K = np.zeros((b.size(n), b.size(n)), dtype=complex)
        for idx, w in enumerate(words):
            W = wick_s(m, WickWord.from_frame(m, list(w)))
            img = adjoint_apply(m, W, omega)
            leak = np.linalg.norm(np.delete(img, np.arange(b.total)[b.slice(n)]))
            if leak > 1e-9:
                raise TruncationError(f"S leaks out of level {n} (|leak| = {leak:.2e})")
            K[:, idx] = img[b.slice(n)]
        if np.linalg.matrix_rank(K) < K.shape[0]:
            raise TruncationError(f"Wick image frame is rank deficient on level {n}")
        out.append(K)
    return out


def _antilinear_adjoint(K: np.ndarray, P: np.ndarray) -> np.ndarray:
    return np.linalg.solve(P, K.T @ P.T)


def modular_data(m: Model, guard: int = DEFAULT_GUARD) -> ModularData:
    """S, Delta = S^dagger S and J = S Delta^{-1/2} on every level up to N-guard."""
    kern = twist_kernel(m)
    S = tomita_S(m, guard)
    md = ModularData(m, guard, m.level - guard, S=S)
    polar, j2, pos, herm = 0.0, 0.0, np.inf, 0.0
    for n, K in enumerate(S):
        P = kern.P[n]
        delta = _antilinear_adjoint(K, P) @ np.conj(K)
        root, root_inv = kern.sqrt(n)
        X = root @ delta @ root_inv
        herm = max(herm, float(np.linalg.norm(X - X.conj().T, 2)))
        mu, V = np.linalg.eigh(0.5 * (X + X.conj().T))
        pos = min(pos, float(mu[0]))
        if mu[0] <= POSITIVITY_TOL:
            raise ArithmeticError(f"Delta is not positive on level {n} (min eigenvalue {mu[0]:.3e})")
        md._spectral.append((mu, V, (root, root_inv)))
        md.delta.append(delta)
        KJ = K @ np.conj(md.delta_power(n, -0.5))
        md.J.append(KJ)
        polar = max(polar, float(np.linalg.norm(K - KJ @ np.conj(md.delta_power(n, 0.5)), 2)))
        j2 = max(j2, float(np.linalg.norm(KJ @ np.conj(KJ) - np.eye(K.shape[0]), 2)))
    md.diagnostics.update(
        polar_residual=polar,
        J_squared_residual=j2,
        delta_min_eigenvalue=pos,
        delta_hermiticity=herm,
        S_squared_residual=max(float(np.linalg.norm(K @ np.conj(K) - np.eye(K.shape[0]), 2)) for K in S),
        delta_vs_A_inverse=delta_tensor_residual(md),
        S_reversal_residual=s_reversal_residual(md),
    )
    return md


def modular_delta(m: Model, guard: int = DEFAULT_GUARD) -> ModularData:
    return modular_data(m, guard)


modular_J = modular_delta


def delta_tensor_residual(md: ModularData) -> float:
    """Diagnostic: max_n || Delta|level n - (A^{-1})^{(x) n} || in frame coordinates."""
    m = md.model
    a_inv = m.frame_inv @ m.A_inv @ m.frame
    worst = 0.0
    power = np.ones((1, 1), dtype=complex)
    for n, delta in enumerate(md.delta):
        if n:
            power = np.kron(power, a_inv)
        worst = max(worst, float(np.linalg.norm(delta - power, 2)))
    return worst


def s_reversal_residual(md: ModularData) -> float:
    """Diagnostic: distance of S from  xi_1 (x) ... (x) xi_n -> J xi_n (x) ... (x) J xi_1."""
    m = md.model
    b = word_basis(m)
    worst = 0.0
    for n, K in enumerate(md.S):
        for idx, w in enumerate(b.words(n)):
            letters = [conj_J(m.frame[:, a]) for a in reversed(w)]
            worst = max(worst, float(np.linalg.norm(K[:, idx] - tensor_word(m, letters))))
    return worst


def _domain(md: ModularData, shift: int = 1) -> list[int]:
    return list(range(md.top - shift + 1))


def check_commutant_relation(m: Model, xi, md: ModularData | None = None) -> float:
    """T-operator norm of J s(xi) J - d(A^{-1/2} xi) on levels <= N - guard - 1."""
    md = modular_data(m) if md is None else md
    xi = np.real(np.asarray(xi)).astype(complex)
    if md.top < 1:
        raise TruncationError("no levels left below the guard band")
    s = field_s(m, xi).dense()
    KJ = md.J_full()
    jsj = KJ @ np.conj(s) @ np.conj(KJ)
    d = field_d(m, m.A_inv_sqrt @ xi).dense()
    dom = _domain(md)
    return t_operator_norm(m, jsj - d, dom, range(md.top + 1))


def conjugated_field(m: Model, xi, md: ModularData) -> np.ndarray:
    """Linear matrix of J s(xi) J (valid on levels <= top - 1)."""
    s = field_s(m, np.real(np.asarray(xi)).astype(complex)).dense()
    KJ = md.J_full()
    return KJ @ np.conj(s) @ np.conj(KJ)


def modular_flow(m: Model, t: float, xi, md: ModularData | None = None) -> float:
    """T-operator norm of Delta^{it} s(xi) Delta^{-it} - s(U_{-t} xi) below the guard band."""
    md = modular_data(m) if md is None else md
    xi = np.real(np.asarray(xi))
    s = field_s(m, xi).dense()
    flowed = md.delta_it_full(t) @ s @ md.delta_it_full(-t)
    target = field_s(m, np.real(m.U(-t) @ xi)).dense()
    return t_operator_norm(m, flowed - target, _domain(md), range(md.top + 1))


def delta_it_unitarity(md: ModularData, t: float) -> float:
    m = md.model
    kern = twist_kernel(m)
    worst = 0.0
    for n in range(md.top + 1):
        U = md.delta_power(n, 1j * t)
        root, root_inv = kern.sqrt(n)
        X = root @ U @ root_inv
        worst = max(worst, float(np.linalg.norm(X.conj().T @ X - np.eye(X.shape[0]), 2)))
    return worst


# -- conditional expectations ------------------------------------------------------------


@dataclass(eq=False)
class ExpectationData:
    """Projection data for F_T(D), D the complexification of an invariant D_R."""

    model: Model
    real_basis: np.ndarray  # columns spanning D_R
    letters: list[np.ndarray]  # <.,.>_U-orthonormal basis of D, one sector each
    letter_sectors: list[int]
    perp_letters: list[np.ndarray]  # basis of D^perp inside H_R'
    commutant_d_letters: list[np.ndarray]  # basis of D inside H_R'
    word_frames: list[np.ndarray] = field(default_factory=list)  # F(D) basis per level
    projections: list[np.ndarray] = field(default_factory=list)
    invariance_residual: float = 0.0

    @property
    def dim(self) -> int:
        return len(self.letters)


def invariance_residual(m: Model, basis: np.ndarray, t_grid=DEFAULT_T_GRID) -> float:
    """max_t ||(1 - P_D) U_t P_D|| for the real span of ``basis``."""
    Q = sla.orth(np.asarray(basis, dtype=float)) if basis.size else np.zeros((m.dim, 0))
    Pd = Q @ Q.T
    eye = np.eye(m.dim)
    return max(float(np.linalg.norm((eye - Pd) @ np.real(m.U(t)) @ Pd, 2)) for t in t_grid)


def _real_intersection(m: Model, span_real: np.ndarray, constraint: np.ndarray) -> list[np.ndarray]:
    """Vectors span_real @ c (c real) with constraint @ span_real @ c = 0."""
    M = constraint @ span_real
    ns = sla.null_space(np.vstack([M.real, M.imag])) if M.size else np.eye(span_real.shape[1])
    return [span_real @ c for c in ns.T]


def expectation_data(m: Model, basis, t_grid=DEFAULT_T_GRID, tol: float = INVARIANCE_TOL) -> ExpectationData:
    """Validate D_R = span(basis) and build letter bases and level projections.

    D_R must be U_t-invariant and split along the sectors (D_R equal to the sum
    of its sector projections), so that T preserves D (x) D.
    """
    basis = np.asarray(basis, dtype=float).reshape(m.dim, -1)
    res = invariance_residual(m, basis, t_grid)
    if res > tol:
        raise ValueError(f"D_R is not U_t-invariant: ||(1-P_D) U_t P_D|| = {res:.3e}")
    rank = np.linalg.matrix_rank(basis) if basis.size else 0
    G = m.gram
    letters, letter_sectors, perp, comm_d = [], [], [], []
    split_rank = 0
    for i, s in enumerate(m.sector_slices):
        proj = np.zeros_like(basis)
        proj[s] = basis[s]
        Qi = sla.orth(proj) if proj.size and np.linalg.norm(proj) > 0 else np.zeros((m.dim, 0))
        split_rank += Qi.shape[1]
        # U-orthonormal basis of D^(i) = span_C Qi
        if Qi.shape[1]:
            L = np.linalg.cholesky(Qi.T @ G @ Qi)
            Di = Qi @ sla.solve_triangular(L.conj().T, np.eye(Qi.shape[1]), lower=False)
        else:
            Di = np.zeros((m.dim, 0), dtype=complex)
        for col in Di.T:
            letters.append(col)
            letter_sectors.append(i)
        # sector part of H_R' is A^{-1/2} H_R^(i)
        span_real = m.A_inv_sqrt[:, s]
        if Di.shape[1]:
            perp += _real_intersection(m, span_real, Di.conj().T @ G)
        else:
            perp += list(span_real.T)
        # D^(i) inside H_R': orthogonal to the perp part of the sector
        sector_perp = sla.null_space((Di.conj().T @ G)[:, s]) if Di.shape[1] else np.eye(s.stop - s.start)
        if sector_perp.shape[1]:
            full_perp = np.zeros((m.dim, sector_perp.shape[1]), dtype=complex)
            full_perp[s] = sector_perp
            comm_d += _real_intersection(m, span_real, full_perp.conj().T @ G)
        else:
            comm_d += list(span_real.T)
    if split_rank != rank:
        raise ValueError("D_R must split along the sectors (D_R = sum of its sector projections)")
    ed = ExpectationData(m, basis, letters, letter_sectors, perp, comm_d, invariance_residual=res)
    kern = twist_kernel(m)
    for n in range(m.level + 1):
        if n == 0:
            B = np.ones((1, 1), dtype=complex)
        elif ed.dim == 0:
            B = np.zeros((m.dim**n, 0), dtype=complex)
        else:
            B = np.column_stack([tensor_word(m, [letters[a] for a in w])
                                 for w in itertools.product(range(ed.dim), repeat=n)])
        ed.word_frames.append(B)
        if B.shape[1]:
            P = kern.P[n]
            gram = B.conj().T @ P @ B
            ed.projections.append(B @ np.linalg.solve(gram, B.conj().T @ P))
        else:
            ed.projections.append(np.zeros((m.dim**n, m.dim**n), dtype=complex))
    return ed


def project_to_FD(ed: ExpectationData, v) -> np.ndarray:
    """<.,.>_T-orthogonal projection of a Fock vector onto F_T(D)."""
    b = word_basis(ed.model)
    v = np.asarray(v, dtype=complex)
    return np.concatenate([ed.projections[n] @ v[b.slice(n)] for n in range(b.level + 1)])


def wick_quantize(ed: ExpectationData, v, tol: float = 1e-14) -> FockOperator:
    """The Wick operator W with W Omega = v, for v in F_T(D)."""
    m = ed.model
    b = word_basis(m)
    v = np.asarray(v, dtype=complex)
    total = sp.csr_matrix((b.total, b.total), dtype=complex)
    degree = 0
    for n in range(b.level + 1):
        vn = v[b.slice(n)]
        if np.linalg.norm(vn) <= tol:
            continue
        B = ed.word_frames[n]
        if B.shape[1] == 0:
            raise ValueError(f"vector has a level-{n} component outside F_T(D)")
        coef, *_ = np.linalg.lstsq(B, vn, rcond=None)
        if np.linalg.norm(B @ coef - vn) > 1e-9 * max(1.0, np.linalg.norm(vn)):
            raise ValueError(f"vector has a level-{n} component outside F_T(D)")
        if n == 0:
            total = total + coef[0] * sp.identity(b.total, dtype=complex, format="csr")
            continue
        degree = n
        for c, w in zip(coef, itertools.product(range(ed.dim), repeat=n)):
            if abs(c) <= tol:
                continue
            word = WickWord([ed.letters[a] for a in w], [ed.letter_sectors[a] for a in w])
            total = total + c * wick_s(m, word).matrix
    return FockOperator(b, total.tocsr(), degree)


def conditional_expectation(m: Model, D_R, x: FockOperator, ed: ExpectationData | None = None) -> FockOperator:
    """E(x): Wick quantization of the T-orthogonal projection of x Omega onto F_T(D)."""
    ed = expectation_data(m, D_R) if ed is None else ed
    return wick_quantize(ed, project_to_FD(ed, x.apply(vacuum(m))))


def perp_basis(m: Model, D_R, ed: ExpectationData | None = None) -> list[np.ndarray]:
    """Per level, a basis (columns) of words over H_R' letters with at least one letter in D^perp."""
    ed = expectation_data(m, D_R) if ed is None else ed
    letters = list(ed.commutant_d_letters) + list(ed.perp_letters)
    n_d = len(ed.commutant_d_letters)
    out = []
    for n in range(m.level + 1):
        cols = [tensor_word(m, [letters[a] for a in w])
                for w in itertools.product(range(len(letters)), repeat=n)
                if any(a >= n_d for a in w)]
        out.append(np.column_stack(cols) if cols else np.zeros((m.dim**n, 0), dtype=complex))
    return out


def direct_complement(m: Model, ed: ExpectationData) -> list[np.ndarray]:
    """Per level, an orthonormal basis of the <.,.>_T-complement of F_T(D)."""
    kern = twist_kernel(m)
    out = []
    for n, B in enumerate(ed.word_frames):
        if B.shape[1] == 0:
            out.append(np.eye(m.dim**n, dtype=complex))
        else:
            out.append(sla.null_space(B.conj().T @ kern.P[n]))
    return out


def perp_angle(m: Model, D_R, ed: ExpectationData | None = None) -> float:
    """Largest principal angle between perp_basis and the direct complement, over levels."""
    ed = expectation_data(m, D_R) if ed is None else ed
    worst = 0.0
    for n, (A, B) in enumerate(zip(perp_basis(m, D_R, ed), direct_complement(m, ed))):
        rank = np.linalg.matrix_rank(A) if A.shape[1] else 0
        if rank != B.shape[1]:
            return float(np.pi / 2)
        if B.shape[1] == 0:
            continue
        worst = max(worst, float(np.max(sla.subspace_angles(A, B))))
    return worst


def letters_orthogonality(ed: ExpectationData) -> float:
    """Max |<perp letter, D letter>_U|, a sanity value for the letter split."""
    m = ed.model
    if not ed.perp_letters or not ed.letters:
        return 0.0
    return max(abs(deformed_inner(m, p, d)) for p in ed.perp_letters for d in ed.letters)


__all__ = [
    "ExpectationData",
    "ModularData",
    "TruncationError",
    "check_commutant_relation",
    "conditional_expectation",
    "delta_it_unitarity",
    "expectation_data",
    "levels_mask",
    "modular_data",
    "modular_delta",
    "modular_flow",
    "modular_J",
    "perp_angle",
    "perp_basis",
    "tomita_S",
]
