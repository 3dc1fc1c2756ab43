import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from freeconv.measure import (
    AcComponent,
    Arcsine,
    Atom,
    DegenerateMapError,
    Measure,
    MeasureParseError,
    MeasureValidationError,
    NormalizationError,
    PiecewiseLinear,
    Semicircle,
    Uniform,
    atomic,
    moment,
    parse_measure,
    point_mass,
    render_measure,
    shift_scale,
    single,
)

SHAPES = [
    Semicircle(0.0, 2.0),
    Semicircle(1.5, 0.5),
    Arcsine(0.0, 2.0),
    Uniform(-1.0, 3.0),
    PiecewiseLinear(((-1.0, 0.0), (0.0, 1.0), (1.0, 0.0))),
    PiecewiseLinear(((0.0, 0.4), (1.0, 0.2), (2.0, 0.6), (3.0, 0.0))),
]


def quad_cauchy(shape, z):
    """Reference Cauchy transform by adaptive quadrature of the density."""
    lo, hi = shape.support()
    pts = [lo, hi]
    if isinstance(shape, PiecewiseLinear):
        pts = [x for x, _ in shape.nodes]
    if isinstance(shape, Arcsine):
        # substitute t = lo + (hi - lo) sin^2(s) to remove the edge singularities
        def integrand(s):
            t = lo + (hi - lo) * mpmath.sin(s) ** 2
            return 2 / (mpmath.pi * (z - t))

        return complex(mpmath.quad(integrand, [0, mpmath.pi / 2]))
    # split at Re z, where the integrand peaks for z near the axis
    pts = sorted(set(pts) | ({z.real} if lo < z.real < hi else set()))
    return complex(mpmath.quad(lambda t: float(shape.density(float(t))) / (z - t), pts))


@pytest.mark.parametrize("shape", SHAPES, ids=lambda s: type(s).__name__)
@pytest.mark.parametrize("z", [0.3 + 1j, -2 + 0.2j, 5 + 4j, 1e-3 + 0.05j])
def test_cauchy_matches_quadrature(shape, z):
    assert complex(shape.cauchy(z)) == pytest.approx(quad_cauchy(shape, z), rel=1e-8, abs=1e-10)


@pytest.mark.parametrize("shape", SHAPES, ids=lambda s: type(s).__name__)
def test_cauchy_derivative_by_difference(shape):
    z, h = 0.4 + 0.7j, 1e-5
    fd = (shape.cauchy(z + h) - shape.cauchy(z - h)) / (2 * h)
    assert complex(shape.cauchy_deriv(z)) == pytest.approx(complex(fd), rel=1e-6)


@pytest.mark.parametrize("shape", SHAPES, ids=lambda s: type(s).__name__)
def test_far_field_is_one_over_z(shape):
    z = 1e7j
    assert complex(shape.cauchy(z) * z) == pytest.approx(1.0, abs=1e-6)


def test_semicircle_closed_form_at_i():
    g = complex(single(Semicircle(0.0, 2.0)).cauchy(1j))
    assert g == pytest.approx(1j * (1 - math.sqrt(5)) / 2, abs=1e-14)


def test_vectorized_cauchy_shape():
    m = Measure(atoms=(Atom(0.0, 0.5),), ac=(AcComponent(0.5, Uniform(0, 1)),))
    z = np.array([[1j, 2 + 1j], [0.5 + 0.1j, -1 + 3j]])
    out = m.cauchy(z)
    assert out.shape == (2, 2)
    assert out[1, 1] == pytest.approx(complex(m.cauchy(-1 + 3j)))


def test_point_mass_moment():
    assert moment(point_mass(3.0), 1) == 3.0


def test_semicircle_second_moment():
    assert moment(single(Semicircle(0.0, 2.0)), 2) == pytest.approx(1.0, abs=1e-12)
    # independent check by quadrature
    q = mpmath.quad(lambda t: t**2 * mpmath.sqrt(4 - t**2) / (2 * mpmath.pi), [-2, 2])
    assert float(q) == pytest.approx(1.0, abs=1e-12)


def test_rademacher_second_moment():
    assert moment(atomic((-1.0, 0.5), (1.0, 0.5)), 2) == 1.0


@pytest.mark.parametrize("shape", SHAPES, ids=lambda s: type(s).__name__)
@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_shape_moments_match_quadrature(shape, k):
    m = single(shape)
    lo, hi = shape.support()
    if isinstance(shape, Arcsine):
        ref = mpmath.quad(lambda s: (lo + (hi - lo) * mpmath.sin(s) ** 2) ** k * 2 / mpmath.pi, [0, mpmath.pi / 2])
    else:
        pts = [x for x, _ in shape.nodes] if isinstance(shape, PiecewiseLinear) else [lo, hi]
        ref = mpmath.quad(lambda t: t**k * float(shape.density(float(t))), pts)
    assert moment(m, k) == pytest.approx(float(ref), rel=1e-10, abs=1e-12)


def test_shift_scale_examples():
    assert shift_scale(point_mass(0.0), 3.0, 1.0).atoms == (Atom(3.0, 1.0),)
    r = shift_scale(atomic((-1.0, 0.5), (1.0, 0.5)), 1.0, 0.5)
    assert [(a.location, a.mass) for a in r.atoms] == [(0.5, 0.5), (1.5, 0.5)]
    sc = shift_scale(single(Semicircle(0.0, 2.0)), 0.0, math.sqrt(2))
    assert sc.ac[0].shape.radius == pytest.approx(2 * math.sqrt(2))
    assert moment(sc, 2) == pytest.approx(2.0)


def test_shift_scale_rejects_zero_scale():
    with pytest.raises(DegenerateMapError):
        shift_scale(point_mass(1.0), 0.0, 0.0)


@given(
    st.floats(-3, 3),
    st.floats(0.2, 3) | st.floats(-3, -0.2),
    st.sampled_from(range(len(SHAPES))),
)
def test_pushforward_transforms_cauchy(shift, scale, idx):
    # G_{T#m}(z) = G_m((z - shift)/scale) / scale for T(t) = scale t + shift
    m = single(SHAPES[idx])
    pm = shift_scale(m, shift, scale)
    z = 0.3 + 0.9j
    w = (z - shift) / scale
    expected = m.cauchy(w) / scale if scale > 0 else np.conj(m.cauchy(np.conj(w))) / scale
    assert complex(pm.cauchy(z)) == pytest.approx(complex(expected), rel=1e-9, abs=1e-12)


def test_total_mass_validation():
    with pytest.raises(NormalizationError):
        atomic((0.0, 0.5), (1.0, 0.4))
    # tiny rounding is absorbed
    m = atomic((0.0, 0.7), (1.0, 0.3))
    assert m.atoms[0].mass == 0.7


def test_atoms_merge_and_sort():
    m = Measure(atoms=(Atom(1.0, 0.25), Atom(0.0, 0.5), Atom(1.0 + 1e-14, 0.25)))
    assert [(a.location, a.mass) for a in m.atoms] == [(0.0, 0.5), (1.0, 0.5)]
    assert m.is_two_atom()


def test_pwl_validation():
    with pytest.raises(NormalizationError):
        PiecewiseLinear(((0.0, 1.0), (1.0, 2.0)))
    with pytest.raises(MeasureValidationError):
        PiecewiseLinear(((0.0, 1.0), (0.0, 1.0)))
    with pytest.raises(MeasureValidationError):
        PiecewiseLinear(((0.0, 2.0), (1.0, -0.5), (2.0, 0.5)))


def test_parse_round_trip():
    text = '{"atoms": [[0, 0.7]], "ac": [{"w": 0.3, "uniform": {"a": -1, "b": 1}}]}'
    m = parse_measure(text)
    assert m.atoms == (Atom(0.0, 0.7),)
    assert parse_measure(render_measure(m)) == m


def test_parse_bare_keys():
    m = parse_measure("{ac: [{w: 1, semicircle: {center: 0, radius: 2}}]}")
    assert m.ac[0].shape == Semicircle(0.0, 2.0)


def test_parse_pwl():
    m = parse_measure('{"ac": [{"w": 1, "pwl": {"nodes": [[-1, 0], [0, 1], [1, 0]]}}]}')
    assert m.density(0.5) == pytest.approx(0.5)


@pytest.mark.parametrize(
    "text, field",
    [
        ('{"atoms": [[0, 0.5], [0, 0.5]]}', None),
        ('{"ac": [{"w": 1, "triangle": {"a": 0}}]}', "ac[0]"),
        ('{"ac": [{"w": 1, "uniform": {"a": 0}}]}', "ac[0].uniform"),
        ('{"atoms": [[0, "x"]]}', "atoms[0]"),
        ('{"atom": []}', "atom"),
    ],
)
def test_parse_errors_name_the_field(text, field):
    with pytest.raises((MeasureParseError, MeasureValidationError)) as info:
        parse_measure(text)
    if field is not None:
        assert info.value.field == field


def test_parse_error_reports_line():
    with pytest.raises(MeasureParseError) as info:
        parse_measure('{\n"atoms": [[0, 1]\n')
    assert info.value.line is not None
