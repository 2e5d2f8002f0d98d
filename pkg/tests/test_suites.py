import numpy as np

from mixedq.model import ModelSpec, build_model
from mixedq.modular import invariance_residual
from mixedq.suites import Residual, SuiteContext, SuiteResult, invariant_subspaces, suite_positivity


def test_residual_directions():
    assert Residual("x", 1e-12, 1e-10).passed
    assert not Residual("x", 1e-9, 1e-10).passed
    assert Residual("x", 0.3, 1e-10, lower=True).passed
    assert not Residual("x", -0.1, 1e-10, lower=True).passed
    assert not Residual("x", float("nan"), 1.0).passed


def test_suite_result_is_conjunction():
    res = SuiteResult("s")
    assert res.passed
    res.add("a", 0.0, 1.0)
    res.add("b", 2.0, 1.0)
    assert not res.passed and res.worst() == 2.0


def test_invariant_subspaces_are_invariant(mixed):
    spaces = invariant_subspaces(mixed)
    assert len(spaces) == 3
    for B in spaces:
        assert invariance_residual(mixed, B) <= 1e-12


def test_invariant_subspaces_fallback():
    m = build_model(ModelSpec.create([1], [[0.3]], level=3))
    (B,) = invariant_subspaces(m)
    assert B.shape == (1, 1)


def test_rng_streams_independent_of_order():
    ctx = SuiteContext(seed=5)
    a = ctx.rng(3).normal(size=4)
    ctx.rng(7).normal(size=100)
    assert np.array_equal(ctx.rng(3).normal(size=4), a)


def test_positivity_suite(mixed):
    res = suite_positivity(mixed, SuiteContext())
    assert res.passed and len(res.residuals) == mixed.level + 1
