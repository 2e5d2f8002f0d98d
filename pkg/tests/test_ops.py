import numpy as np
import pytest
from hypothesis import given, strategies as st

from mixedq.fock import word_basis
from mixedq.model import ModelSpec, build_model, commutant_vector, deformed_inner, deformed_norm
from mixedq.ops import (
    WickWord,
    adjoint_T,
    crossing_coefficient,
    field_d,
    field_s,
    fock_vector,
    free_annihilate,
    identity,
    inner,
    ladder_operator,
    left_annihilate,
    left_create,
    one_particle,
    right_annihilate,
    right_create,
    splittings,
    t_norm,
    t_operator_norm,
    vacuum,
    wick_d,
    wick_s,
)


def frob(X):
    return float(np.max(np.abs(X.dense()))) if hasattr(X, "dense") else float(np.max(np.abs(X)))


@pytest.fixture(scope="module")
def flat():
    """Single sector, q = 0.4, trivial U: the frame is the coordinate basis."""
    return build_model(ModelSpec.create([2], [[0.4]], level=4))


def word_vec(m, word):
    return fock_vector(m, [m.basis_vector(k) for k in word])


def test_creation_on_vacuum_and_level_one(mixed, rng):
    xi = rng.normal(size=3) + 1j * rng.normal(size=3)
    eta = rng.normal(size=3)
    L = left_create(mixed, xi)
    assert np.allclose(L.apply(vacuum(mixed)), one_particle(mixed, xi))
    assert np.allclose(L.apply(one_particle(mixed, eta)), fock_vector(mixed, [xi, eta]))
    R = right_create(mixed, xi)
    assert np.allclose(R.apply(one_particle(mixed, eta)), fock_vector(mixed, [eta, xi]))


def test_annihilation_low_levels(mixed, rng):
    xi = rng.normal(size=3) + 1j * rng.normal(size=3)
    eta = rng.normal(size=3) + 1j * rng.normal(size=3)
    for A in (left_annihilate(mixed, xi), right_annihilate(mixed, xi)):
        assert np.allclose(A.apply(vacuum(mixed)), 0)
        out = A.apply(one_particle(mixed, eta))
        assert out[0] == pytest.approx(deformed_inner(mixed, xi, eta))
        assert np.allclose(out[1:], 0)


def test_crossed_letter_weights(flat):
    e1, e2 = flat.basis_vector(0), flat.basis_vector(1)
    # l*(e1)(e2 (x) e1): only the second slot matches and it crosses e2
    assert np.allclose(left_annihilate(flat, e1).apply(word_vec(flat, (1, 0))), 0.4 * one_particle(flat, e2))
    # r*(e1)(e1 (x) e2): the first slot matches and crosses e2 to its right
    assert np.allclose(right_annihilate(flat, e1).apply(word_vec(flat, (0, 1))), 0.4 * one_particle(flat, e2))


def test_left_annihilation_is_free_times_ladder(mixed, rng):
    xi = rng.normal(size=3) + 1j * rng.normal(size=3)
    diff = left_annihilate(mixed, xi) - free_annihilate(mixed, xi) @ ladder_operator(mixed)
    assert frob(diff) < 1e-14


@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6))
def test_adjointness(vals):
    m = build_model(ModelSpec.create([2, 1], [[0.5, 0.2], [0.2, -0.3]], [(0, (0, 1), 2.0)], level=4))
    xi = np.array(vals[:3]) + 1j * np.array(vals[3:])
    assert t_operator_norm(m, adjoint_T(m, left_create(m, xi)) - left_annihilate(m, xi), range(5)) <= 1e-10
    assert t_operator_norm(m, adjoint_T(m, right_create(m, xi)) - right_annihilate(m, xi), range(5)) <= 1e-10


def test_adjoint_identity_and_involution(mixed_small, rng):
    assert frob(adjoint_T(mixed_small, identity(mixed_small)) - identity(mixed_small)) < 1e-12
    X = left_create(mixed_small, rng.normal(size=3)) @ left_annihilate(mixed_small, rng.normal(size=3) * 1j)
    assert frob(adjoint_T(mixed_small, adjoint_T(mixed_small, X)) - X) < 1e-11


def test_field_formulas(mixed, rng):
    xi = rng.normal(size=3)
    eta = rng.normal(size=3) + 1j * rng.normal(size=3)
    s = field_s(mixed, xi)
    assert np.allclose(s.apply(vacuum(mixed)), one_particle(mixed, xi))
    expected = fock_vector(mixed, [xi, eta])
    expected[0] = deformed_inner(mixed, xi, eta)
    assert np.allclose(s.apply(one_particle(mixed, eta)), expected)
    with pytest.raises(ValueError):
        field_s(mixed, xi * 1j)
    with pytest.raises(ValueError):
        field_d(mixed, np.array([1.0, 0, 0]))


def test_field_symmetric(mixed, rng):
    b = word_basis(mixed)
    s = field_s(mixed, rng.normal(size=3))
    for _ in range(5):
        u = np.zeros(b.total, complex)
        v = np.zeros(b.total, complex)
        top = b.offsets[mixed.level - 1]
        u[:top] = rng.normal(size=top) + 1j * rng.normal(size=top)
        v[:top] = rng.normal(size=top) + 1j * rng.normal(size=top)
        assert abs(inner(mixed, u, s.apply(v)) - inner(mixed, s.apply(u), v)) < 1e-10


def test_norm_bound(mixed, rng):
    for _ in range(10):
        xi = rng.normal(size=3) + 1j * rng.normal(size=3)
        measured = t_operator_norm(mixed, left_create(mixed, xi), range(mixed.level))
        assert measured <= deformed_norm(mixed, xi) / np.sqrt(1 - mixed.q_max) + 1e-10


def test_commutator_vanishes(mixed, rng):
    for _ in range(5):
        s = field_s(mixed, rng.normal(size=3))
        d = field_d(mixed, commutant_vector(mixed, rng.normal(size=3)))
        assert t_operator_norm(mixed, s @ d - d @ s, range(mixed.level - 1)) <= 1e-10


def test_crossing_coefficient_examples():
    q = np.array([[0.3, 0.7], [0.7, -0.5]])
    assert crossing_coefficient(q, [0, 1], (1, 2), ()) == 1.0
    assert crossing_coefficient(q, [0, 1], (2,), (1,)) == pytest.approx(0.7)
    assert crossing_coefficient([[0.3]], [0, 0, 0], (2, 3), (1,)) == pytest.approx(0.09)
    assert crossing_coefficient(q, [0, 1], (1,), (2,), "right") == pytest.approx(0.7)
    with pytest.raises(ValueError):
        crossing_coefficient(q, [0, 1], (1,), (1,))


def test_splittings_count():
    assert len(list(splittings(4))) == 16
    assert list(splittings(1)) == [((), (1,)), ((1,), ())]


def test_wick_length_one_is_field(mixed):
    x = np.array([0.0, 0.0, 1.3])
    assert frob(wick_s(mixed, WickWord.labelled(mixed, [x])) - field_s(mixed, x)) < 1e-14


def test_wick_length_two_expansion(mixed, rng):
    x1 = np.array([0.3 + 0.2j, -1.1, 0])
    x2 = np.array([0, 0, 0.8 - 0.5j])
    word = WickWord.labelled(mixed, [x1, x2])
    l, ls = left_create, left_annihilate
    J = np.conj
    expected = (l(mixed, x1) @ l(mixed, x2) + l(mixed, x1) @ ls(mixed, J(x2))
                + mixed.q[1, 0] * l(mixed, x2) @ ls(mixed, J(x1)) + ls(mixed, J(x1)) @ ls(mixed, J(x2)))
    assert frob(wick_s(mixed, word) - expected) < 1e-14


@pytest.mark.parametrize("side", ["left", "right"])
@pytest.mark.parametrize("coords", [(0,), (2, 1), (0, 2, 0), (1, 1, 2)])
def test_wick_vacuum(mixed, side, coords, rng):
    letters = []
    for k in coords:
        v = np.zeros(3, complex)
        s = mixed.sector_slices[mixed.sector_of[k]]
        v[s] = rng.normal(size=s.stop - s.start) + 1j * rng.normal(size=s.stop - s.start)
        letters.append(v)
    w = WickWord.labelled(mixed, letters, side)
    assert np.linalg.norm(w.quantize(mixed).apply(vacuum(mixed)) - w.vector(mixed)) <= 1e-10


def test_right_wick_literal_ascending_order_reverses(flat):
    """Ascending creators r(e1) r(e2) put e2 first, which is why wick_d reverses them."""
    e1, e2 = flat.basis_vector(0), flat.basis_vector(1)
    om = vacuum(flat)
    ascending = (right_create(flat, e1) @ right_create(flat, e2)).apply(om)
    assert np.allclose(ascending, word_vec(flat, (1, 0)))
    w = WickWord.from_coords(flat, (0, 1), side="right")
    assert np.allclose(wick_d(flat, w).apply(om), word_vec(flat, (0, 1)))


def test_right_wick_words_commute_with_fields(mixed, rng):
    etas = [commutant_vector(mixed, rng.normal(size=3) * np.isin(np.arange(3), idx)) for idx in ([0, 1], [2])]
    word = WickWord(etas, [0, 1], "right")
    D = wick_d(mixed, word)
    s = field_s(mixed, rng.normal(size=3))
    assert t_operator_norm(mixed, D @ s - s @ D, range(mixed.level - 2)) <= 1e-10


def test_word_validation(mixed):
    with pytest.raises(ValueError):
        WickWord.labelled(mixed, [np.ones(3)])
    with pytest.raises(ValueError):
        wick_s(mixed, WickWord([np.array([0, 0, 1.0])], [0]))
    with pytest.raises(ValueError):
        wick_s(mixed, WickWord.from_coords(mixed, [0] * 6))


def test_t_norm_of_vacuum(mixed):
    assert t_norm(mixed, vacuum(mixed)) == 1.0
