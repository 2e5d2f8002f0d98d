"""Verification suites shared by the ``check`` command, the tests and the scripts.

Each suite takes a built model plus a :class:`SuiteContext` and returns a
:class:`SuiteResult` holding named residuals. A residual passes when its value
is at most its tolerance, except for ``lower`` bounds (positivity), which pass
when the value exceeds the tolerance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fock import (
    POSITIVITY_TOL,
    check_yang_baxter,
    min_eigenvalues,
    p_matrix_brute,
    twist_kernel,
    twist_matrix,
    word_basis,
)
from .modular import (
    check_commutant_relation,
    conditional_expectation,
    expectation_data,
    modular_data,
    modular_flow,
    perp_angle,
)
from .model import Model, commutant_vector, deformed_norm
from .ops import (
    FockOperator,
    WickWord,
    adjoint_T,
    field_d,
    field_s,
    identity,
    left_annihilate,
    left_create,
    t_norm,
    t_operator_norm,
    vacuum,
)
from .probability import (
    MomentQuery,
    pair_partition_moment,
    phi,
    run_probe,
    sample_family,
    vacuum_moment,
)

ALGEBRAIC_TOL = 1e-10
MODULAR_TOL = 1e-8
BRUTE_FORCE_MAX_LEVEL = 5


@dataclass
class Residual:
    check: str
    value: float
    tol: float
    lower: bool = False

    @property
    def passed(self) -> bool:
        if not np.isfinite(self.value):
            return False
        return self.value > self.tol if self.lower else self.value <= self.tol


@dataclass
class SuiteResult:
    name: str
    residuals: list[Residual] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.residuals)

    def add(self, check: str, value: float, tol: float, lower: bool = False) -> None:
        self.residuals.append(Residual(check, float(value), float(tol), lower))

    def worst(self) -> float:
        return max((r.value for r in self.residuals if not r.lower), default=0.0)


@dataclass
class SuiteContext:
    seed: int = 0
    algebraic_tol: float = ALGEBRAIC_TOL
    modular_tol: float = MODULAR_TOL
    n_samples: int = 20
    t_grid: tuple[float, ...] = (-1.0, -0.3, 0.3, 1.0)
    max_moment_order: int = 6
    corrupt_twist: bool = False
    _modular: object = None

    def rng(self, salt: int) -> np.random.Generator:
        """Independent stream per suite, so suite order does not change the samples."""
        return np.random.default_rng([self.seed, salt])

    def modular(self, m: Model):
        if self._modular is None:
            self._modular = modular_data(m)
        return self._modular


# -- samplers -----------------------------------------------------------------------------


def random_vector(m: Model, rng: np.random.Generator, real: bool = False) -> np.ndarray:
    xi = rng.normal(size=m.dim)
    return xi.astype(complex) if real else xi + 1j * rng.normal(size=m.dim)


def random_sector_letter(m: Model, rng: np.random.Generator) -> np.ndarray:
    s = m.sector_slices[int(rng.integers(m.n_sectors))]
    x = np.zeros(m.dim, dtype=complex)
    x[s] = rng.normal(size=s.stop - s.start) + 1j * rng.normal(size=s.stop - s.start)
    return x


def random_level_vector(m: Model, rng: np.random.Generator, top: int) -> np.ndarray:
    b = word_basis(m)
    v = np.zeros(b.total, dtype=complex)
    for n in range(top + 1):
        k = b.size(n)
        v[b.slice(n)] = rng.normal(size=k) + 1j * rng.normal(size=k)
    return v


def invariant_subspaces(m: Model) -> list[np.ndarray]:
    """Real U_t-invariant subspaces built from whole sectors, rotation planes and fixed axes.

    Only proper, nonzero pieces are returned when the space allows it.
    """
    eye = np.eye(m.dim)
    out = []
    if m.n_sectors > 1:
        s = m.sector_slices[0]
        out.append(eye[:, s])
    for blk in m.spec.rotation_blocks:
        start = m.sector_slices[blk.sector].start
        out.append(eye[:, [start + blk.coords[0], start + blk.coords[1]]])
    fixed = list(m.fixed_coords)
    if fixed:
        out.append(eye[:, fixed[:1]])
    proper = [B for B in out if 0 < B.shape[1] < m.dim]
    return proper or [eye]


def fixed_vector_words(m: Model, max_length: int = 2) -> list[FockOperator]:
    """Wick words over U_t-fixed coordinates."""
    fixed = list(m.fixed_coords)
    words = []
    for n in range(1, max_length + 1):
        for coords in itertools.product(fixed, repeat=n):
            words.append(WickWord.from_coords(m, coords).quantize(m))
    return words


# -- suites -------------------------------------------------------------------------------


def suite_positivity(m: Model, ctx: SuiteContext) -> SuiteResult:
    res = SuiteResult("positivity")
    for n, ev in enumerate(min_eigenvalues(m, range(m.level + 1))):
        res.add(f"min_eigenvalue_level_{n}", ev, POSITIVITY_TOL, lower=True)
    return res


def suite_yang_baxter(m: Model, ctx: SuiteContext) -> SuiteResult:
    res = SuiteResult("yang_baxter")
    twist = None
    if ctx.corrupt_twist:
        twist = twist_matrix(m).matrix.copy()
        twist[0, -1] += 0.25
        twist[-1, 0] += 0.25
    res.add("braid_identity", check_yang_baxter(m, twist), ctx.algebraic_tol)
    return res


def suite_ladder(m: Model, ctx: SuiteContext) -> SuiteResult:
    res = SuiteResult("ladder_vs_brute_force")
    for n in range(1, min(m.level, BRUTE_FORCE_MAX_LEVEL) + 1):
        diff = np.linalg.norm(twist_kernel(m).P[n] - p_matrix_brute(m, n), 2)
        res.add(f"level_{n}", diff, ctx.algebraic_tol)
    return res


def adjointness_residual(m: Model, xi) -> float:
    diff = adjoint_T(m, left_create(m, xi)) - left_annihilate(m, xi)
    return t_operator_norm(m, diff, range(m.level + 1))


def norm_bound_excess(m: Model, xi) -> float:
    """measured ||l(xi)||_T minus ||xi||_U (1 - q)^{-1/2}, q = max |q_ij|."""
    measured = t_operator_norm(m, left_create(m, xi), range(m.level))
    return measured - deformed_norm(m, xi) / np.sqrt(1.0 - m.q_max)


def suite_adjointness(m: Model, ctx: SuiteContext) -> SuiteResult:
    res = SuiteResult("adjointness")
    rng = ctx.rng(4)
    worst = max(adjointness_residual(m, random_vector(m, rng)) for _ in range(ctx.n_samples))
    res.add(f"left_creation_adjoint_max_over_{ctx.n_samples}", worst, ctx.algebraic_tol)
    return res


def suite_norm_bound(m: Model, ctx: SuiteContext) -> SuiteResult:
    res = SuiteResult("norm_bound")
    rng = ctx.rng(5)
    worst = max(norm_bound_excess(m, random_vector(m, rng)) for _ in range(ctx.n_samples))
    res.add(f"excess_over_bound_max_over_{ctx.n_samples}", max(worst, 0.0), ctx.algebraic_tol)
    return res


def wick_vacuum_residual(m: Model, word: WickWord) -> float:
    return float(np.linalg.norm(word.quantize(m).apply(vacuum(m)) - word.vector(m)))


def suite_wick_vacuum(m: Model, ctx: SuiteContext) -> SuiteResult:
    res = SuiteResult("wick_vacuum")
    rng = ctx.rng(6)
    for side in ("left", "right"):
        worst = 0.0
        for length in range(1, min(3, m.level) + 1):
            for _ in range(max(ctx.n_samples // 4, 1)):
                w = WickWord.labelled(m, [random_sector_letter(m, rng) for _ in range(length)], side)
                worst = max(worst, wick_vacuum_residual(m, w))
        res.add(f"{side}_words", worst, ctx.algebraic_tol)
    return res


def commutator_residual(m: Model, xi, eta) -> float:
    """||[s(xi), d(eta)]|| in <.,.>_T on levels <= N - 2."""
    s, d = field_s(m, xi), field_d(m, eta)
    return t_operator_norm(m, s @ d - d @ s, range(max(m.level - 1, 0)))


def suite_commutant(m: Model, ctx: SuiteContext) -> SuiteResult:
    res = SuiteResult("commutant")
    rng = ctx.rng(7)
    md = ctx.modular(m)
    comm, conj = 0.0, 0.0
    for _ in range(max(ctx.n_samples // 4, 1)):
        xi = rng.normal(size=m.dim)
        eta = commutant_vector(m, rng.normal(size=m.dim))
        comm = max(comm, commutator_residual(m, xi, eta))
        conj = max(conj, check_commutant_relation(m, xi, md))
    res.add("s_d_commutator", comm, ctx.algebraic_tol)
    res.add("J_s_J_equals_d", conj, ctx.modular_tol)
    return res


def suite_modular(m: Model, ctx: SuiteContext) -> SuiteResult:
    res = SuiteResult("modular")
    d = ctx.modular(m).diagnostics
    for key in ("polar_residual", "J_squared_residual", "S_squared_residual", "delta_hermiticity",
                "delta_vs_A_inverse", "S_reversal_residual"):
        res.add(key, d[key], ctx.modular_tol)
    res.add("delta_min_eigenvalue", d["delta_min_eigenvalue"], POSITIVITY_TOL, lower=True)
    return res


def suite_modular_flow(m: Model, ctx: SuiteContext) -> SuiteResult:
    res = SuiteResult("modular_flow")
    rng = ctx.rng(9)
    md = ctx.modular(m)
    xis = [rng.normal(size=m.dim) for _ in range(3)]
    for t in ctx.t_grid:
        res.add(f"t={t:+.2f}", max(modular_flow(m, t, xi, md) for xi in xis), ctx.modular_tol)
    return res


def random_wick_words(m: Model, rng: np.random.Generator, count: int, max_length: int = 2) -> list[FockOperator]:
    out = []
    for _ in range(count):
        n = int(rng.integers(0, max_length + 1))
        coords = rng.integers(0, m.dim, size=n)
        out.append(WickWord.from_coords(m, coords).quantize(m) if n else identity(m))
    return out


def expectation_residuals(m: Model, D_R, words, rng: np.random.Generator) -> dict[str, float]:
    """phi(E(x)) - phi(x), E(E(x)) - E(x) and the bimodule identity, maximised over ``words``.

    The bimodule identity is compared on the vacuum: E(a x b) Omega = a E(x) b Omega
    for a, b single letters of D, which stays inside the truncation for words of length <= N - 2.
    """
    ed = expectation_data(m, D_R)
    om = vacuum(m)
    mods = [WickWord([ed.letters[k]], [ed.letter_sectors[k]]).quantize(m) for k in range(ed.dim)]
    state, idem, module = 0.0, 0.0, 0.0
    for x in words:
        E = conditional_expectation(m, D_R, x, ed)
        state = max(state, abs(phi(m, E) - phi(m, x)))
        EE = conditional_expectation(m, D_R, E, ed)
        idem = max(idem, t_norm(m, (EE - E).apply(om)))
        if mods and x.degree + 2 <= m.level:
            a, b = mods[int(rng.integers(len(mods)))], mods[int(rng.integers(len(mods)))]
            lhs = conditional_expectation(m, D_R, a @ x @ b, ed).apply(om)
            rhs = (a @ E @ b).apply(om)
            module = max(module, t_norm(m, lhs - rhs))
    return {"state_preserved": state, "idempotent": idem, "bimodule": module,
            "perp_angle": perp_angle(m, D_R, ed)}


def suite_expectation(m: Model, ctx: SuiteContext) -> SuiteResult:
    res = SuiteResult("expectation")
    rng = ctx.rng(10)
    for k, D_R in enumerate(invariant_subspaces(m)):
        words = random_wick_words(m, rng, ctx.n_samples, max_length=min(2, m.level - 2) if m.level > 2 else 0)
        for key, value in expectation_residuals(m, D_R, words, rng).items():
            tol = ctx.algebraic_tol if key == "state_preserved" else 10 * ctx.algebraic_tol
            res.add(f"D{k}_{key}", value, tol)
    return res


def moment_queries(m: Model, max_order: int):
    """Every coordinate query of even length <= max_order."""
    for k in range(2, max_order + 1, 2):
        for coords in itertools.product(range(m.dim), repeat=k):
            yield MomentQuery.from_coords(m, coords)


def suite_moments(m: Model, ctx: SuiteContext) -> SuiteResult:
    res = SuiteResult("moments")
    order = min(ctx.max_moment_order, 2 * (m.level - 1))
    worst = {}
    for q in moment_queries(m, order):
        k = len(q)
        worst[k] = max(worst.get(k, 0.0), abs(vacuum_moment(m, q) - pair_partition_moment(m, q)))
    for k in sorted(worst):
        res.add(f"order_{k}_oracle_discrepancy", worst[k], ctx.algebraic_tol)
    return res


def suite_centralizer(m: Model, ctx: SuiteContext) -> SuiteResult:
    """Tracial residual when U is trivial, otherwise fixed-vector words against the sample family."""
    res = SuiteResult("centralizer")
    rng = ctx.rng(12)
    samples = sample_family(m, rng, max_length=min(2, m.level), n_random=10)
    xs = fixed_vector_words(m, max_length=min(2, m.level - 2)) if m.level > 2 else []
    if not xs:
        return res
    worst = max(run_probe(m, x, samples).max for x in xs)
    res.add("fixed_vector_words" if not m.is_trivial else "tracial", worst, ctx.algebraic_tol)
    return res


SUITES: dict[str, Callable[[Model, SuiteContext], SuiteResult]] = {
    "positivity": suite_positivity,
    "yang_baxter": suite_yang_baxter,
    "ladder_vs_brute_force": suite_ladder,
    "adjointness": suite_adjointness,
    "norm_bound": suite_norm_bound,
    "wick_vacuum": suite_wick_vacuum,
    "commutant": suite_commutant,
    "modular": suite_modular,
    "modular_flow": suite_modular_flow,
    "expectation": suite_expectation,
    "moments": suite_moments,
    "centralizer": suite_centralizer,
}

# suites needing creation/annihilation operators require N >= 2
OPERATOR_SUITES = frozenset(SUITES) - {"positivity", "yang_baxter", "ladder_vs_brute_force"}
