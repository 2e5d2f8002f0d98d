"""Command line entry point: ``validate``, ``check``, ``moments`` and ``scan``.

Exit codes: 0 pass, 1 suite failure, 2 configuration or usage error.

Spec files are JSON objects::

    {"sectors": [2, 1],
     "q": [[0.5, 0.2], [0.2, -0.3]],
     "rotation_blocks": [{"sector": 0, "coords": [0, 1], "lambda": 2.0}],
     "level": 5}
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .fock import min_eigenvalues
from .model import ModelSpec, SpecError, build_model
from .probability import MomentQuery, pair_partition_moment, vacuum_moment
from .suites import ALGEBRAIC_TOL, MODULAR_TOL, OPERATOR_SUITES, SUITES, SuiteContext, SuiteResult

log = logging.getLogger("mixedq")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
REPORT_NAME = "report.json"
TIMINGS_NAME = "timings.json"
SIGNIFICANT_DIGITS = 3


class UsageError(Exception):
    """Bad configuration; maps to exit code 2."""


@dataclass
class RunConfig:
    spec: ModelSpec
    level: int | None = None
    algebraic_tol: float = ALGEBRAIC_TOL
    modular_tol: float = MODULAR_TOL
    suites: tuple[str, ...] = tuple(SUITES)
    t_grid: tuple[float, ...] = (-1.0, -0.3, 0.3, 1.0)
    q_grid: tuple[float, ...] = ()
    out_dir: Path = Path(".")
    seed: int = 0
    n_samples: int = 20
    max_moment_order: int = 6
    corrupt_twist: bool = False

    def __post_init__(self):
        if self.level is not None:
            self.spec = self.spec.with_level(self.level)
        if self.algebraic_tol <= 0 or self.modular_tol <= 0:
            raise UsageError("tolerances must be positive")
        unknown = [s for s in self.suites if s not in SUITES]
        if unknown:
            raise UsageError(f"unknown suites {unknown}; choose from {sorted(SUITES)}")
        if self.spec.level < 2 and any(s in OPERATOR_SUITES for s in self.suites):
            raise UsageError(f"operator suites need truncation level N >= 2, got {self.spec.level}")
        if any(abs(q) >= 1 for q in self.q_grid):
            raise UsageError("scan grid values must satisfy |q| < 1")


@dataclass
class Report:
    model: dict[str, Any]
    suites: list[SuiteResult] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    def to_dict(self) -> dict[str, Any]:
        return {
            "model": _round_tree(self.model),
            "suites": [
                {
                    "name": s.name,
                    "residuals": [
                        {"check": r.check, "value": fmt(r.value), "tol": fmt(r.tol), "pass": r.passed}
                        for r in s.residuals
                    ],
                    "pass": s.passed,
                }
                for s in self.suites
            ],
            "pass": self.passed,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def fmt(x: float) -> float:
    """Round to a few significant digits so that reports do not carry rounding noise."""
    if not np.isfinite(x) or x == 0:
        return float(x) if np.isfinite(x) else str(x)
    return float(f"{x:.{SIGNIFICANT_DIGITS - 1}e}")


def _round_tree(obj, digits: int = 12):
    if isinstance(obj, float):
        return float(f"{obj:.{digits - 1}e}") if np.isfinite(obj) else str(obj)
    if isinstance(obj, dict):
        return {k: _round_tree(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_tree(v, digits) for v in obj]
    return obj


# -- spec loading ---------------------------------------------------------------------------


def load_spec(path: str | Path) -> ModelSpec:
    """Parse and validate; raises UsageError with every diagnostic."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{path}: cannot read spec ({exc.strerror})") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"{path}: spec must be a JSON object")
    try:
        spec = ModelSpec.from_dict(data)
        spec.validate()
    except SpecError as exc:
        raise UsageError("\n".join(f"{path}: {v}" for v in exc.violations)) from exc
    return spec


# -- commands -------------------------------------------------------------------------------


def cmd_validate(args) -> int:
    spec = load_spec(args.spec)
    print(f"{args.spec}: valid ({len(spec.sectors)} sectors, dimension {sum(spec.sectors)}, N = {spec.level})")
    return EXIT_OK


def run_check(config: RunConfig) -> Report:
    m = build_model(config.spec)
    ctx = SuiteContext(
        seed=config.seed,
        algebraic_tol=config.algebraic_tol,
        modular_tol=config.modular_tol,
        n_samples=config.n_samples,
        t_grid=config.t_grid,
        max_moment_order=config.max_moment_order,
        corrupt_twist=config.corrupt_twist,
    )
    report = Report(model=m.summary())
    # sequential on purpose: the modular data is shared and BLAS already uses the cores
    for name in config.suites:
        t0 = time.perf_counter()
        result = SUITES[name](m, ctx)
        report.timings[name] = time.perf_counter() - t0
        report.suites.append(result)
        log.info("%-22s %s  (%.2fs)", name, "pass" if result.passed else "FAIL", report.timings[name])
    return report


def cmd_check(args) -> int:
    config = RunConfig(
        spec=load_spec(args.spec),
        level=args.level,
        algebraic_tol=args.tol if args.tol is not None else ALGEBRAIC_TOL,
        modular_tol=args.modular_tol,
        suites=tuple(args.suites.split(",")) if args.suites else tuple(SUITES),
        out_dir=Path(args.out),
        seed=args.seed,
        n_samples=args.samples,
        max_moment_order=args.max_order,
        corrupt_twist=args.corrupt_twist,
    )
    report = run_check(config)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    (config.out_dir / REPORT_NAME).write_text(report.dumps(), encoding="utf-8")
    timings = {k: round(v, 4) for k, v in report.timings.items()}
    (config.out_dir / TIMINGS_NAME).write_text(json.dumps(timings, indent=2) + "\n", encoding="utf-8")
    for s in report.suites:
        line = f"{'PASS' if s.passed else 'FAIL'}  {s.name}"
        failing = [r for r in s.residuals if not r.passed]
        if failing:
            line += "  " + ", ".join(f"{r.check}={r.value:.3e} (tol {r.tol:.1e})" for r in failing)
        print(line)
    print(f"report: {config.out_dir / REPORT_NAME}")
    return EXIT_OK if report.passed else EXIT_FAIL


def check_moment_order(spec: ModelSpec, max_order: int) -> None:
    if max_order < 1 or max_order > spec.level - 1:
        raise UsageError(f"--max-order {max_order} needs 1 <= K <= N - 1 = {spec.level - 1} "
                         f"(words of length 2K must fit in 2(N - 1))")


def moment_rows(spec: ModelSpec, max_order: int):
    """Rows (letters, matrix value, oracle value, discrepancy) for every coordinate word
    of even length up to 2 * max_order."""
    check_moment_order(spec, max_order)
    m = build_model(spec)
    for k in range(2, 2 * max_order + 1, 2):
        for coords in itertools.product(range(m.dim), repeat=k):
            q = MomentQuery.from_coords(m, coords)
            a, b = vacuum_moment(m, q), pair_partition_moment(m, q)
            yield " ".join(map(str, coords)), a, b, abs(a - b)


def cmd_moments(args) -> int:
    spec = load_spec(args.spec)
    if args.level is not None:
        spec = spec.with_level(args.level)
    check_moment_order(spec, args.max_order)
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["letters", "matrix_re", "matrix_im", "oracle_re", "oracle_im", "discrepancy"])
        for letters, a, b, d in moment_rows(spec, args.max_order):
            w.writerow([letters, f"{a.real:.15g}", f"{a.imag:.15g}", f"{b.real:.15g}", f"{b.imag:.15g}", f"{d:.3e}"])
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def scan_row(spec: ModelSpec, q: float, level: int) -> list[tuple[float, int, float]]:
    """Min eigenvalue of P^(n), n = 1..level, with every q_ij set to q."""
    r = len(spec.sectors)
    m = build_model(spec.with_q(np.full((r, r), q)).with_level(level))
    levels = list(range(1, level + 1))
    return [(q, n, ev) for n, ev in zip(levels, min_eigenvalues(m, levels))]


def cmd_scan(args) -> int:
    spec = load_spec(args.spec)
    try:
        grid = tuple(float(x) for x in args.q.split(","))
    except ValueError as exc:
        raise UsageError(f"--q must be comma separated numbers: {exc}") from exc
    if any(abs(q) >= 1 for q in grid):
        raise UsageError("scan grid values must satisfy |q| < 1")
    level = args.level if args.level is not None else spec.level
    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        rows = list(pool.map(lambda q: scan_row(spec, q, level), grid))
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["q", "level", "min_eigenvalue"])
        for row in rows:
            for q, n, ev in row:
                w.writerow([repr(q), n, f"{ev:.12e}"])
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


# -- argument parsing -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mixedq", description="Mixed-q deformed Fock space workbench.")
    p.add_argument("-v", "--verbose", action="store_true", help="log per-suite progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a spec file against its invariants")
    v.add_argument("spec")
    v.set_defaults(func=cmd_validate)

    c = sub.add_parser("check", help="run the verification suites and write report.json")
    c.add_argument("spec")
    c.add_argument("--level", type=int, help="truncation level N (overrides the spec)")
    c.add_argument("--tol", type=float, help=f"algebraic tolerance (default {ALGEBRAIC_TOL:g})")
    c.add_argument("--modular-tol", type=float, default=MODULAR_TOL,
                   help=f"tolerance for modular reconstructions (default {MODULAR_TOL:g})")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", default=".", help="output directory for report.json and timings.json")
    c.add_argument("--suites", help=f"comma separated subset of {','.join(SUITES)}")
    c.add_argument("--samples", type=int, default=20, help="random samples per suite")
    c.add_argument("--max-order", type=int, default=6, help="longest moment word in the moments suite")
    c.add_argument("--corrupt-twist", action="store_true", help=argparse.SUPPRESS)
    c.set_defaults(func=cmd_check)

    mo = sub.add_parser("moments", help="CSV of vacuum moments against the pair-partition oracle")
    mo.add_argument("spec")
    mo.add_argument("--max-order", type=int, required=True, help="K: words up to length 2K")
    mo.add_argument("--level", type=int)
    mo.add_argument("--out", help="CSV path (default stdout)")
    mo.set_defaults(func=cmd_moments)

    s = sub.add_parser("scan", help="CSV of min eigenvalues of P^(n) over a grid of uniform q")
    s.add_argument("spec")
    s.add_argument("--q", required=True, help="comma separated q values")
    s.add_argument("--level", type=int)
    s.add_argument("--workers", type=int, default=4)
    s.add_argument("--out", help="CSV path (default stdout)")
    s.set_defaults(func=cmd_scan)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
