import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from freeconv import catalog
from freeconv.measure import Semicircle, atomic, point_mass, shift_scale, single
from freeconv.subordination import (
    NonConvergenceError,
    denjoy_wolff,
    fz_step,
    subordinate,
    sweep,
)

SC = single(Semicircle(0.0, 2.0))
RAD = atomic((-1.0, 0.5), (1.0, 0.5))
NON_POINT = [n for n, m in catalog.MEASURES.items() if not m.is_point_mass()]


def sc_sum_F(z):
    # F of the semicircle of radius 2 sqrt 2: (z + sqrt(z^2 - 8)) / 2, branch ~ z
    s = cmath.sqrt(z - 2 * math.sqrt(2)) * cmath.sqrt(z + 2 * math.sqrt(2))
    return (z + s) / 2


def test_fz_collapses_for_point_mass_partner():
    for w in (1j, 3 + 0.2j, -2 + 5j):
        assert fz_step(SC, point_mass(3.0), 1 + 1j, w) == pytest.approx(1 + 1j - 3.0, abs=1e-14)


def test_fz_step_example():
    assert fz_step(RAD, RAD, 2j, 2j) == pytest.approx(2.4j, abs=1e-14)


def test_fz_fixed_point_example():
    w = (1 + math.sqrt(2)) * 1j
    assert fz_step(RAD, RAD, 2j, w) == pytest.approx(w, abs=1e-14)


def test_denjoy_wolff_rademacher():
    res = denjoy_wolff(RAD, RAD, 2j, w0=2j, tol=1e-12)
    assert res.omega1 == pytest.approx((1 + math.sqrt(2)) * 1j, abs=1e-11)
    assert res.converged


def test_denjoy_wolff_point_mass_partner():
    res = denjoy_wolff(SC, point_mass(3.0), 1j)
    assert res.omega1 == pytest.approx(1j - 3.0)
    assert res.iterations == 1
    assert res.f_value == pytest.approx(complex(1 / SC.cauchy(1j - 3.0)))


def test_denjoy_wolff_semicircle_pair():
    res = denjoy_wolff(SC, SC, 3j)
    assert res.residual <= 1e-12
    assert abs(res.omega1 - res.omega2) <= 1e-10
    assert res.f_value == pytest.approx(sc_sum_F(3j), abs=1e-12)


def test_bad_arguments():
    with pytest.raises(ValueError):
        denjoy_wolff(SC, SC, 1j, tol=0.0)
    with pytest.raises(NonConvergenceError) as info:
        denjoy_wolff(SC, RAD, 0.1 + 0.01j, max_iter=2)
    assert info.value.residual > 0


def test_two_atom_pairs_are_delegated():
    res = subordinate(RAD, catalog.MEASURES["bernoulli"], 1 + 2j)
    plain = denjoy_wolff(RAD, catalog.MEASURES["bernoulli"], 1 + 2j)
    assert res.iterations == 0
    assert res.omega1 == pytest.approx(plain.omega1, abs=1e-10)


@given(st.sampled_from(NON_POINT), st.sampled_from(NON_POINT), st.floats(-4, 4), st.floats(0.05, 3))
def test_invariants(a, b, x, y):
    mu, nu = catalog.pair(a, b)
    res = subordinate(mu, nu, complex(x, y))
    assert res.satisfies_invariants(mu, nu, tol=1e-10)


@given(st.sampled_from(NON_POINT), st.sampled_from(NON_POINT), st.floats(-4, 4), st.floats(0.1, 3))
def test_commutativity(a, b, x, y):
    mu, nu = catalog.pair(a, b)
    z = complex(x, y)
    f1 = subordinate(mu, nu, z).f_value
    f2 = subordinate(nu, mu, z).f_value
    assert abs(f1 - f2) <= 1e-9 * (1 + abs(f1))


@given(st.sampled_from(NON_POINT), st.sampled_from(NON_POINT), st.floats(-2, 2), st.floats(-3, 3), st.floats(0.2, 3))
def test_translation_equivariance(a, b, s, x, y):
    mu, nu = catalog.pair(a, b)
    z = complex(x, y)
    shifted = subordinate(shift_scale(mu, s, 1.0), nu, z).f_value
    assert abs(shifted - subordinate(mu, nu, z - s).f_value) <= 1e-9 * (1 + abs(shifted))


def test_sweep_single_entry_matches_point_solver():
    table = sweep(RAD, RAD, [0.0], [2.0])
    assert table.omega1.shape == (1, 1)
    assert table.omega1[0, 0] == pytest.approx((1 + math.sqrt(2)) * 1j, abs=1e-12)


def test_sweep_empty_grid():
    table = sweep(SC, SC, [], [1.0, 0.5])
    assert len(table) == 0


def test_sweep_validates_levels():
    with pytest.raises(ValueError):
        sweep(SC, SC, [0.0], [0.5, 1.0])
    with pytest.raises(ValueError):
        sweep(SC, SC, [1.0, 0.0], [1.0])


def test_sweep_symmetry_for_even_measures():
    x = np.linspace(-3, 3, 13)
    table = sweep(SC, SC, x, [1.0, 0.1, 0.01])
    np.testing.assert_allclose(table.omega1, -np.conj(table.omega1[:, ::-1]), atol=1e-9)


@pytest.mark.parametrize("pair", catalog.PAIRS)
def test_sweep_agrees_with_point_solver(pair):
    mu, nu = catalog.pair(*pair)
    x = np.linspace(-3, 3, 7)
    table = sweep(mu, nu, x, [0.5, 0.05])
    assert table.converged.all()
    for i, j in [(0, 1), (1, 3), (1, 6)]:
        res = table.result(i, j)
        ref = subordinate(mu, nu, res.z)
        assert res.f_value == pytest.approx(ref.f_value, abs=1e-9)
        assert res.satisfies_invariants(mu, nu)
