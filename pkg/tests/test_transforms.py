import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from freeconv import catalog
from freeconv.measure import Arcsine, PiecewiseLinear, Semicircle, Uniform, atomic, point_mass, single
from freeconv.transforms import (
    ConeDomain,
    DomainError,
    ExtrapolationError,
    HalfPlanePoint,
    InconclusiveLimitError,
    Ladder,
    atom_mass_estimate,
    cauchy_G,
    density_from_G,
    f_transform,
    f_transform_deriv,
    jc_derivative,
    nevanlinna_diagnostics,
    require_upper,
    richardson,
)

SC = single(Semicircle(0.0, 2.0))
RADEMACHER = atomic((-1.0, 0.5), (1.0, 0.5))


def test_half_plane_point_rejects_real_axis():
    with pytest.raises(DomainError):
        HalfPlanePoint(1.0, 0.0)
    with pytest.raises(DomainError):
        require_upper(np.array([1j, 2 - 1e-3j]))
    assert HalfPlanePoint(1, 2) == 1 + 2j


def test_cone_membership():
    cone = ConeDomain(2.0, 1.0)
    assert 5j in cone
    assert 3 + 2.5j not in cone
    assert 1j not in cone


@pytest.mark.parametrize(
    "m, z, expected",
    [
        (point_mass(0.0), 1j, -1j),
        (SC, 1j, 1j * (1 - math.sqrt(5)) / 2),
        (RADEMACHER, 1j, -0.5j),
    ],
)
def test_cauchy_examples(m, z, expected):
    assert complex(cauchy_G(m, z)) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize(
    "m, z, expected",
    [
        (point_mass(2.5), 1 + 1j, 1 + 1j - 2.5),
        (RADEMACHER, 1j, 2j),
        (SC, 2j, (1 + math.sqrt(2)) * 1j),
        (SC, 1j, 1j * (1 + math.sqrt(5)) / 2),
    ],
)
def test_f_transform_examples(m, z, expected):
    assert complex(f_transform(m, z)) == pytest.approx(expected, abs=1e-13)


def test_cauchy_rejects_lower_half_plane():
    with pytest.raises(DomainError):
        cauchy_G(SC, -1j)


@pytest.mark.parametrize("name", list(catalog.MEASURES))
def test_f_derivative_by_difference(name):
    m = catalog.MEASURES[name]
    z, h = 0.3 + 0.8j, 1e-6
    fd = (f_transform(m, z + h) - f_transform(m, z - h)) / (2 * h)
    assert complex(f_transform_deriv(m, z)) == pytest.approx(complex(fd), rel=1e-6)


@given(st.sampled_from(list(catalog.MEASURES)), st.floats(-5, 5), st.floats(1e-3, 50))
def test_f_dominates_identity(name, x, y):
    # Im F(z) >= Im z for every probability measure
    fz = complex(f_transform(catalog.MEASURES[name], x + 1j * y))
    assert fz.imag >= y - 1e-12 * (1 + y)


@given(st.sampled_from(list(catalog.MEASURES)), st.floats(-5, 5), st.floats(1e-2, 50))
def test_conjugate_symmetry(name, x, y):
    m = catalog.MEASURES[name]
    z = x + 1j * y
    # G(conj z) = conj G(z); the closed forms must agree off the half-plane too
    assert complex(m.cauchy(np.conj(z))) == pytest.approx(np.conj(complex(m.cauchy(z))), rel=1e-12, abs=1e-15)


def test_ladder_defaults():
    np.testing.assert_allclose(Ladder().heights, 1e-2 * 0.5 ** np.arange(7))
    with pytest.raises(ValueError):
        Ladder(ratio=1.5)


def test_richardson_exact_for_quadratics():
    ys = np.array([0.4, 0.2, 0.1])
    est, err = richardson(ys, 3.0 - 2.0 * ys + 5.0 * ys**2)
    assert est == pytest.approx(3.0, abs=1e-13)
    assert err > 0


def test_richardson_columns():
    ys = np.array([0.1, 0.05, 0.025])
    vals = np.stack([1 + ys, 2 - ys**2], axis=-1)
    est, _ = richardson(ys, vals)
    np.testing.assert_allclose(est, [1.0, 2.0], atol=1e-13)


@pytest.mark.parametrize(
    "m, x, expected",
    [
        (single(Uniform(0.0, 1.0)), 0.5, 1.0),
        (SC, 0.0, 1 / math.pi),
    ],
)
def test_density_examples(m, x, expected):
    assert density_from_G(m.cauchy, x) == pytest.approx(expected, abs=1e-6)


def test_density_of_atom_away_from_it():
    assert density_from_G(point_mass(0.0).cauchy, 1.0) == pytest.approx(0.0, abs=1e-8)


def test_negative_extrapolant_is_an_error():
    with pytest.raises(ExtrapolationError):
        density_from_G(lambda z: 1j * np.ones_like(z), 0.0)


@pytest.mark.parametrize(
    "m, x, expected",
    [
        (point_mass(0.0), 0.0, 1.0),
        (atomic((0.0, 0.6), (1.0, 0.4)), 0.0, 0.6),
        (SC, 0.0, 0.0),
    ],
)
def test_atom_mass_examples(m, x, expected):
    mass, confident = atom_mass_estimate(m.cauchy, x, full_output=True)
    assert mass == pytest.approx(expected, abs=1e-8)
    assert confident


@pytest.mark.parametrize(
    "m, a, expected",
    [
        (point_mass(0.0), 0.0, 1.0),
        (atomic((0.0, 0.5), (1.0, 0.5)), 0.0, 2.0),
        (SC, 0.0, math.inf),
    ],
)
def test_jc_derivative_examples(m, a, expected):
    def f_eval(z):
        return 1.0 / m.cauchy(z)

    assert jc_derivative(f_eval, a) == pytest.approx(expected, rel=1e-8)


def test_jc_derivative_flags_non_monotone_ladders():
    with pytest.raises(InconclusiveLimitError):
        jc_derivative(lambda z: 1j * np.imag(z) * (1 + np.imag(z) * 1e3), 0.0)


@pytest.mark.parametrize("name", list(catalog.MEASURES))
def test_nevanlinna_report_for_catalog(name):
    m = catalog.MEASURES[name]
    z = np.array([x + 1j * y for x in np.linspace(-4, 4, 9) for y in (1e-3, 0.1, 1.0, 10.0)])
    rep = nevanlinna_diagnostics(m, z)
    assert rep.ok
    assert rep.min_ratio >= 1.0 - 1e-12
    assert rep.asymptotic_error < 1e-3
    assert rep.point_mass == m.is_point_mass()
    assert set(rep.to_dict()) >= {"min_ratio", "ok", "asymptotic"}


def test_nevanlinna_examples():
    rep = nevanlinna_diagnostics(point_mass(0.0), [1j, 10j, 100j])
    assert rep.min_ratio == pytest.approx(1.0, abs=1e-15)
    assert rep.asymptotic_error == pytest.approx(0.0, abs=1e-15)
    rep = nevanlinna_diagnostics(RADEMACHER, [1j])
    assert rep.asymptotic_error == pytest.approx(1e-8, rel=1e-6)
    rep = nevanlinna_diagnostics(SC, [1j])
    assert rep.min_ratio == pytest.approx((1 + math.sqrt(5)) / 2, rel=1e-12)
    assert rep.real_part_a == pytest.approx(0.0, abs=1e-14)


SHAPES = [
    Semicircle(0.0, 2.0),
    Arcsine(0.0, 2.0),
    Uniform(-1.0, 1.0),
    PiecewiseLinear(((-1.0, 0.0), (0.0, 1.0), (1.0, 0.0))),
]


@pytest.mark.parametrize("shape", SHAPES, ids=lambda s: type(s).__name__)
def test_self_inversion_interior(shape):
    lo, hi = shape.support()
    xs = np.linspace(lo, hi, 22)[1:-1]
    if isinstance(shape, PiecewiseLinear):
        xs = xs[np.abs(xs) > 0.05]
    got = [density_from_G(shape.cauchy, x) for x in xs]
    np.testing.assert_allclose(got, shape.density(xs), atol=1e-6)
