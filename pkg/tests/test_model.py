import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mixedq.model import (
    ModelSpec,
    SpecError,
    apply_Ut,
    build_model,
    commutant_span_angle,
    commutant_subspace_basis,
    commutant_vector,
    complexified_rank,
    conj_J_r,
    deformed_inner,
    in_commutant_space,
)

BLOCK = ModelSpec.create([2, 1], [[0.3, 0.1], [0.1, 0.2]], [(0, (0, 1), 2.0)], level=3)


@pytest.fixture(scope="module")
def block():
    return build_model(BLOCK)


def test_trivial_U_gives_identity():
    m = build_model(ModelSpec.create([2, 2], [[0.1, 0.2], [0.2, 0.3]]))
    assert np.allclose(m.A, np.eye(4))
    assert np.allclose(m.gram, np.eye(4))
    assert m.is_trivial and m.fixed_coords == (0, 1, 2, 3)


def test_block_eigenvalues(block):
    assert np.allclose(np.linalg.eigvalsh(block.A), [0.5, 1.0, 2.0])
    v = np.array([1, -1j, 0]) / math.sqrt(2)
    assert np.allclose(block.A @ v, 2 * v)
    assert np.allclose(block.A @ v.conj(), 0.5 * v.conj())


@pytest.mark.parametrize("t", [0.0, 0.4, -1.3, 2.0])
def test_U_is_the_rotation(block, t):
    c, s = math.cos(t * math.log(2)), math.sin(t * math.log(2))
    assert np.allclose(block.U(t)[:2, :2], [[c, -s], [s, c]], atol=1e-14)
    assert block.U(t)[2, 2] == pytest.approx(1.0)


@pytest.mark.parametrize("t", [0.3, -0.8, 1.7])
def test_U_is_A_to_the_it(block, t):
    assert np.allclose(block.U(t), block.A_power(1j * t), atol=1e-13)


def test_half_turn_negates_block(block):
    xi = np.array([0.3, -1.2, 0.7])
    out = apply_Ut(block, math.pi / math.log(2), xi)
    assert np.allclose(out, [-0.3, 1.2, 0.7], atol=1e-13)


def test_deformed_inner_on_eigenvectors(block):
    e = np.array([1, -1j, 0])
    f = np.array([1, 1j, 0])
    assert deformed_inner(block, e, e) == pytest.approx(4 / 3 * np.vdot(e, e))
    assert deformed_inner(block, f, f) == pytest.approx(2 / 3 * np.vdot(f, f))
    assert abs(deformed_inner(block, e, f)) < 1e-15


def test_gram_closed_form(block):
    lam = 2.0
    assert block.gram[0, 0] == pytest.approx(1.0)
    assert block.gram[0, 1] == pytest.approx(1j * (lam - 1) / (lam + 1))


def test_frame_is_orthonormal(block):
    F = block.frame
    assert np.allclose(F.conj().T @ block.gram @ F, np.eye(3), atol=1e-14)
    assert block.report["frame_orthonormality"] < 1e-14


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_commutant_vector_linear_and_in_space(a, b):
    m = build_model(BLOCK)
    a, b = np.array(a), np.array(b)
    assert np.allclose(commutant_vector(m, a + b), commutant_vector(m, a) + commutant_vector(m, b))
    assert in_commutant_space(m, commutant_vector(m, a))


def test_commutant_vector_explicit(block):
    # real 2x2 block of A^{-1/2}: sqrt(A^{-1}) = [[c, -s'], [s', c]] with c = (l^{1/2} + l^{-1/2})/2
    lam = 2.0
    c = (lam**-0.5 + lam**0.5) / 2
    s = (lam**0.5 - lam**-0.5) / 2
    out = commutant_vector(block, [1.0, 0.0, 0.0])
    assert np.allclose(out, [c, 1j * s, 0.0])


def test_commutant_vector_trivial():
    m = build_model(ModelSpec.create([3], [[0.4]]))
    xi = np.array([0.1, 0.2, -0.3])
    assert np.allclose(commutant_vector(m, xi), xi)
    with pytest.raises(ValueError):
        commutant_vector(m, xi * 1j)


def test_commutant_subspace(block):
    basis = commutant_subspace_basis(block, 0)
    assert len(basis) == 2
    assert complexified_rank(block, 0) == 2
    assert commutant_span_angle(block, 0) < 1e-12
    rng = np.random.default_rng(0)
    for v in basis:
        for _ in range(5):
            eta = rng.normal(size=3)
            assert abs(deformed_inner(block, v, eta).imag) < 1e-12


def test_conj_J_r_is_involution(block):
    rng = np.random.default_rng(1)
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    assert np.allclose(conj_J_r(block, conj_J_r(block, v)), v)
    eta = commutant_vector(block, rng.normal(size=3))
    assert np.allclose(conj_J_r(block, eta), eta)


@pytest.mark.parametrize(
    "kwargs, fragment",
    [
        (dict(sectors=[2, 1], q=[[0.5, 1.0], [1.0, 0.1]]), "sup_ij |q_ij| < 1"),
        (dict(sectors=[2, 1], q=[[0.5, 0.2], [0.3, 0.1]]), "q_ij = q_ji"),
        (dict(sectors=[2], q=[[0.1]], rotation_blocks=[(0, (0, 1), 0.5)]), "lambda must be > 1"),
        (dict(sectors=[2], q=[[0.1]], rotation_blocks=[(0, (0, 2), 2.0)]), "not inside sector"),
        (dict(sectors=[3], q=[[0.1]], rotation_blocks=[(0, (0, 1), 2.0), (0, (1, 2), 3.0)]), "overlaps"),
        (dict(sectors=[2], q=[[0.1, 0.0]]), "matrix"),
        (dict(sectors=[2], q=[[0.1]], level=0), "level"),
    ],
)
def test_violations(kwargs, fragment):
    spec = ModelSpec.create(**kwargs)
    assert any(fragment in v for v in spec.violations())
    with pytest.raises(SpecError):
        build_model(spec)


def test_spec_roundtrip(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps(BLOCK.to_dict()))
    assert ModelSpec.from_json(p) == BLOCK


def test_from_dict_errors():
    with pytest.raises(SpecError, match="missing field 'q'"):
        ModelSpec.from_dict({"sectors": [1]})
    with pytest.raises(SpecError, match="malformed"):
        ModelSpec.from_dict({"sectors": [1], "q": [[0.1]], "rotation_blocks": [{"sector": 0}]})
