"""One-particle data: sectors, the Q-matrix, the orthogonal representation
U_t, its analytic generator A and the deformed inner product.

Coordinates. The real space H_R is R^D with D = sum of the sector
dimensions; sector ``i`` owns a contiguous range of coordinates. Vectors of
the complexification H_C = C^D are plain complex arrays in these
coordinates ("ambient" coordinates), and the ambient inner product is the
standard one, conjugate-linear in the first slot.

Every rotation block ``(sector, (a, b), lam)`` makes U_t act on the pair of
coordinates ``(a, b)`` as the rotation by angle ``t log lam``; all other
coordinates are fixed. On the block, A has eigenvalue ``lam`` on
``e_a - i e_b`` and ``1/lam`` on ``e_a + i e_b``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import scipy.linalg as sla

RECONSTRUCTION_TOL = 1e-13


class SpecError(ValueError):
    """Raised when a model spec violates one or more of its invariants."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class RotationBlock:
    sector: int
    coords: tuple[int, int]  # local coordinates inside the sector
    lam: float

    def to_dict(self) -> dict[str, Any]:
        return {"sector": self.sector, "coords": list(self.coords), "lambda": self.lam}


@dataclass(frozen=True)
class ModelSpec:
    sectors: tuple[int, ...]
    q: tuple[tuple[float, ...], ...]
    rotation_blocks: tuple[RotationBlock, ...] = ()
    level: int = 6

    @classmethod
    def create(cls, sectors, q, rotation_blocks=(), level: int = 6) -> "ModelSpec":
        blocks = []
        for b in rotation_blocks:
            if isinstance(b, RotationBlock):
                blocks.append(b)
            elif isinstance(b, dict):
                blocks.append(RotationBlock(int(b["sector"]), tuple(int(c) for c in b["coords"]),
                                            float(b["lambda"])))
            else:
                sector, coords, lam = b
                blocks.append(RotationBlock(int(sector), tuple(int(c) for c in coords), float(lam)))
        q = np.atleast_2d(np.asarray(q, dtype=float))
        return cls(
            sectors=tuple(int(d) for d in sectors),
            q=tuple(tuple(float(x) for x in row) for row in q),
            rotation_blocks=tuple(blocks),
            level=int(level),
        )

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ModelSpec":
        missing = [k for k in ("sectors", "q") if k not in data]
        if missing:
            raise SpecError([f"missing field {k!r}" for k in missing])
        try:
            return cls.create(
                data["sectors"], data["q"], data.get("rotation_blocks", ()), data.get("level", 6)
            )
        except (TypeError, ValueError, KeyError) as exc:
            raise SpecError([f"malformed spec: {exc}"]) from exc

    @classmethod
    def from_json(cls, path: str | Path) -> "ModelSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict[str, Any]:
        return {
            "sectors": list(self.sectors),
            "q": [list(row) for row in self.q],
            "rotation_blocks": [b.to_dict() for b in self.rotation_blocks],
            "level": self.level,
        }

    def with_level(self, level: int) -> "ModelSpec":
        return ModelSpec(self.sectors, self.q, self.rotation_blocks, int(level))

    def with_q(self, q) -> "ModelSpec":
        return ModelSpec.create(self.sectors, q, self.rotation_blocks, self.level)

    @property
    def q_matrix(self) -> np.ndarray:
        return np.array(self.q, dtype=float).reshape(len(self.q), -1)

    def violations(self) -> list[str]:
        """Every violated invariant, as a human readable message."""
        out = []
        r = len(self.sectors)
        if r == 0:
            out.append("at least one sector is required")
        for i, d in enumerate(self.sectors):
            if d < 1:
                out.append(f"sector {i} has dimension {d} < 1")
        q = self.q_matrix
        if q.shape != (r, r):
            out.append(f"q must be a {r}x{r} matrix indexed by sector pairs, got shape {q.shape}")
        else:
            if not np.all(np.isfinite(q)):
                out.append("q has non-finite entries")
            elif not np.array_equal(q, q.T):
                bad = [(i, j) for i in range(r) for j in range(i + 1, r) if q[i, j] != q[j, i]]
                out.append(f"q must be symmetric (q_ij = q_ji); differs at {bad}")
            if np.all(np.isfinite(q)) and q.size and np.max(np.abs(q)) >= 1:
                out.append(f"sup_ij |q_ij| < 1 is required, got max |q_ij| = {np.max(np.abs(q))}")
        if self.level < 1:
            out.append(f"truncation level must be >= 1, got {self.level}")
        used: dict[tuple[int, int], int] = {}
        for k, b in enumerate(self.rotation_blocks):
            if not 0 <= b.sector < r:
                out.append(f"rotation block {k}: sector {b.sector} does not exist")
                continue
            a, c = b.coords
            d = self.sectors[b.sector]
            if a == c or not (0 <= a < d and 0 <= c < d):
                out.append(f"rotation block {k}: coordinate pair {b.coords} is not inside sector "
                           f"{b.sector} (dimension {d})")
                continue
            for coord in (a, c):
                if (b.sector, coord) in used:
                    out.append(f"rotation block {k} overlaps block {used[(b.sector, coord)]} "
                               f"at sector {b.sector} coordinate {coord}")
                used[(b.sector, coord)] = k
            if not (math.isfinite(b.lam) and b.lam > 1):
                out.append(f"rotation block {k}: lambda must be > 1, got {b.lam}")
        return out

    def validate(self) -> None:
        v = self.violations()
        if v:
            raise SpecError(v)


@dataclass(frozen=True, eq=False)
class Model:
    """Immutable one-particle data built from a :class:`ModelSpec`.

    ``frame`` holds a <.,.>_U-orthonormal basis of H (columns), obtained by
    Gram-Schmidt on the coordinate basis inside each sector; ``letter_sector``
    labels its columns. Fock space words are indexed over this frame.
    """

    spec: ModelSpec
    dim: int
    sector_of: np.ndarray
    sector_slices: tuple[slice, ...]
    q: np.ndarray
    generator: np.ndarray
    A: np.ndarray
    A_inv: np.ndarray
    A_sqrt: np.ndarray
    A_inv_sqrt: np.ndarray
    gram: np.ndarray
    frame: np.ndarray
    frame_inv: np.ndarray
    fixed_coords: tuple[int, ...]
    report: dict[str, float] = field(default_factory=dict)

    @property
    def level(self) -> int:
        return self.spec.level

    @property
    def n_sectors(self) -> int:
        return len(self.spec.sectors)

    @property
    def letter_sector(self) -> np.ndarray:
        return self.sector_of

    @property
    def q_max(self) -> float:
        return float(np.max(np.abs(self.q)))

    @property
    def is_trivial(self) -> bool:
        return not self.spec.rotation_blocks

    def U(self, t: float) -> np.ndarray:
        return sla.expm(t * self.generator)

    def A_power(self, p: float) -> np.ndarray:
        return _A_power(self.spec, self.dim, self.sector_slices, p)

    def to_frame(self, xi) -> np.ndarray:
        """Ambient coordinates -> coordinates in the U-orthonormal frame."""
        xi = np.asarray(xi, dtype=complex)
        if xi.shape != (self.dim,):
            raise ValueError(f"expected a vector of length {self.dim}, got shape {xi.shape}")
        return self.frame_inv @ xi

    def from_frame(self, c) -> np.ndarray:
        return self.frame @ np.asarray(c, dtype=complex)

    def basis_vector(self, k: int) -> np.ndarray:
        e = np.zeros(self.dim)
        e[k] = 1.0
        return e

    def sector_projector(self, i: int) -> np.ndarray:
        p = np.zeros((self.dim, self.dim))
        s = self.sector_slices[i]
        p[s, s] = np.eye(s.stop - s.start)
        return p

    def sector_of_vector(self, xi, tol: float = 1e-12) -> int | None:
        """Index of the unique sector supporting ``xi``, or None."""
        xi = np.asarray(xi)
        scale = max(np.linalg.norm(xi), 1.0)
        support = [i for i, s in enumerate(self.sector_slices) if np.linalg.norm(xi[s]) > tol * scale]
        return support[0] if len(support) == 1 else None

    def summary(self) -> dict[str, Any]:
        return {
            "spec": self.spec.to_dict(),
            "dim": self.dim,
            "q_max": self.q_max,
            "eigenvalues_A": sorted(float(x) for x in np.linalg.eigvalsh(self.A)),
        }


def _rotation_generator(spec: ModelSpec, dim: int, slices) -> np.ndarray:
    K = np.zeros((dim, dim))
    for b in spec.rotation_blocks:
        off = slices[b.sector].start
        a, c = off + b.coords[0], off + b.coords[1]
        L = math.log(b.lam)
        K[a, c] = -L
        K[c, a] = L
    return K


def _A_power(spec: ModelSpec, dim: int, slices, p: float) -> np.ndarray:
    """A^p assembled from the spectral decomposition of each rotation block."""
    M = np.eye(dim, dtype=complex)
    for b in spec.rotation_blocks:
        off = slices[b.sector].start
        a, c = off + b.coords[0], off + b.coords[1]
        v_plus = np.array([1.0, -1.0j]) / math.sqrt(2)  # e_a - i e_b, eigenvalue lam
        v_minus = np.array([1.0, 1.0j]) / math.sqrt(2)
        block = b.lam**p * np.outer(v_plus, v_plus.conj()) + b.lam ** (-p) * np.outer(v_minus, v_minus.conj())
        idx = np.ix_([a, c], [a, c])
        M[idx] = block
    return M


def build_model(spec: ModelSpec) -> Model:
    spec.validate()
    dims = spec.sectors
    offsets = np.concatenate([[0], np.cumsum(dims)]).astype(int)
    slices = tuple(slice(int(offsets[i]), int(offsets[i + 1])) for i in range(len(dims)))
    D = int(offsets[-1])
    sector_of = np.concatenate([np.full(d, i) for i, d in enumerate(dims)]).astype(int)

    K = _rotation_generator(spec, D, slices)
    A = _A_power(spec, D, slices, 1.0)
    A_inv = _A_power(spec, D, slices, -1.0)
    A_sqrt = _A_power(spec, D, slices, 0.5)
    A_inv_sqrt = _A_power(spec, D, slices, -0.5)

    eye = np.eye(D)
    report = {
        "A_inverse_residual": float(np.linalg.norm(A @ A_inv - eye, 2)),
        "A_inv_sqrt_residual": float(np.linalg.norm(A_inv_sqrt @ A_inv_sqrt @ A - eye, 2)),
        "A_sqrt_residual": float(np.linalg.norm(A_sqrt @ A_sqrt - A, 2)),
    }
    worst = max(report.values())
    if worst > RECONSTRUCTION_TOL:
        raise ArithmeticError(f"spectral reconstruction of A failed: residual {worst:.3e}")

    # <xi, eta>_U = xi^* G eta with G = 2 (1 + A^{-1})^{-1}
    G = 2.0 * np.linalg.inv(eye + A_inv)
    G = 0.5 * (G + G.conj().T)

    frame = np.zeros((D, D), dtype=complex)
    for s in slices:
        # Gram-Schmidt on the coordinate basis: G_s = L L^*, frame = L^{-*}
        L = np.linalg.cholesky(G[s, s])
        frame[s, s] = sla.solve_triangular(L.conj().T, np.eye(s.stop - s.start), lower=False)
    frame_inv = np.linalg.inv(frame)
    report["frame_orthonormality"] = float(np.linalg.norm(frame.conj().T @ G @ frame - eye, 2))
    report["gram_min_eigenvalue"] = float(np.min(np.linalg.eigvalsh(G)))

    rotated = set()
    for b in spec.rotation_blocks:
        off = slices[b.sector].start
        rotated.update({off + b.coords[0], off + b.coords[1]})
    fixed = tuple(k for k in range(D) if k not in rotated)

    return Model(
        spec=spec,
        dim=D,
        sector_of=sector_of,
        sector_slices=slices,
        q=spec.q_matrix,
        generator=K,
        A=A,
        A_inv=A_inv,
        A_sqrt=A_sqrt,
        A_inv_sqrt=A_inv_sqrt,
        gram=G,
        frame=frame,
        frame_inv=frame_inv,
        fixed_coords=fixed,
        report=report,
    )


def _check_vec(m: Model, xi) -> np.ndarray:
    xi = np.asarray(xi)
    if xi.shape != (m.dim,):
        raise ValueError(f"expected a vector of length {m.dim}, got shape {xi.shape}")
    return xi


def deformed_inner(m: Model, xi, eta) -> complex:
    """<xi, eta>_U, conjugate-linear in ``xi`` and linear in ``eta``."""
    xi, eta = _check_vec(m, xi), _check_vec(m, eta)
    return complex(np.vdot(xi, m.gram @ eta))


def deformed_norm(m: Model, xi) -> float:
    return math.sqrt(max(deformed_inner(m, xi, xi).real, 0.0))


def apply_Ut(m: Model, t: float, xi) -> np.ndarray:
    return m.U(t) @ _check_vec(m, xi)


def conj_J(xi) -> np.ndarray:
    """Complex conjugation with respect to H_R."""
    return np.conj(np.asarray(xi))


def conj_J_r(m: Model, eta) -> np.ndarray:
    """Complex conjugation with respect to the real structure H_R'.

    Written in the real frame ``A^{-1/2} e_k`` of H_R': if eta = B z with
    B = A^{-1/2}, then J_r eta = B conj(z).
    """
    eta = _check_vec(m, eta)
    z = np.linalg.solve(m.A_inv_sqrt, eta)
    return m.A_inv_sqrt @ np.conj(z)


def is_real_vector(xi, tol: float = 1e-12) -> bool:
    xi = np.asarray(xi)
    return bool(np.linalg.norm(np.imag(xi)) <= tol * max(np.linalg.norm(xi), 1.0))


def in_commutant_space(m: Model, eta, tol: float = 1e-10) -> bool:
    """Membership test for H_R': <eta, x>_U is real for all real x, i.e. G eta is real."""
    eta = _check_vec(m, eta)
    g = m.gram @ eta
    return bool(np.linalg.norm(np.imag(g)) <= tol * max(np.linalg.norm(g), 1.0))


def commutant_vector(m: Model, xi) -> np.ndarray:
    xi = _check_vec(m, xi)
    if not is_real_vector(xi):
        raise ValueError("commutant_vector expects a vector of H_R (real coordinates)")
    return m.A_inv_sqrt @ np.real(xi).astype(complex)


def commutant_subspace_basis(m: Model, sector: int) -> list[np.ndarray]:
    """Real basis of (H_R^(j))' from the linear system Im <xi, e_k>_U = 0.

    Writing xi = x + i y on the sector's coordinates and G = Gr + i Gi, the
    condition over all real coordinate vectors e_k reads Gi^T x - Gr^T y = 0.
    """
    if not 0 <= sector < m.n_sectors:
        raise ValueError(f"no sector {sector}")
    s = m.sector_slices[sector]
    G = m.gram[s, s]
    system = np.hstack([G.imag.T, -G.real.T])
    ns = sla.null_space(system)
    d = s.stop - s.start
    out = []
    for col in ns.T:
        v = np.zeros(m.dim, dtype=complex)
        v[s] = col[:d] + 1j * col[d:]
        out.append(v)
    return out


def realify(vectors) -> np.ndarray:
    """Stack complex vectors as columns of a real matrix [Re; Im]."""
    V = np.column_stack([np.asarray(v, dtype=complex) for v in vectors])
    return np.vstack([V.real, V.imag])


def commutant_span_angle(m: Model, sector: int) -> float:
    """Largest principal angle between the solved basis and A^{-1/2} H_R^(j)."""
    s = m.sector_slices[sector]
    solved = commutant_subspace_basis(m, sector)
    direct = [m.A_inv_sqrt @ m.basis_vector(k) for k in range(s.start, s.stop)]
    return float(np.max(sla.subspace_angles(realify(solved), realify(direct))))


def complexified_rank(m: Model, sector: int, tol: float = 1e-10) -> int:
    """Complex rank of (H_R^(j))' + i (H_R^(j))'."""
    V = np.column_stack(commutant_subspace_basis(m, sector))
    return int(np.linalg.matrix_rank(V, tol=tol))
