"""Cauchy and F-transforms on the upper half-plane, boundary limits along
vertical ladders, and Nevanlinna-type sanity checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class DomainError(ValueError):
    pass


class ExtrapolationError(ArithmeticError):
    """A boundary limit could not be extracted from the ladder."""


class InconclusiveLimitError(ExtrapolationError):
    pass


class HalfPlanePoint(complex):
    """A complex number with strictly positive imaginary part."""

    def __new__(cls, re, im=None):
        z = complex(re) if im is None else complex(re, im)
        if not z.imag > 0 or not math.isfinite(z.real) or not math.isfinite(z.imag):
            raise DomainError(f"{z!r} is not in the upper half-plane")
        return super().__new__(cls, z.real, z.imag)


def require_upper(z):
    """Validate scalar or array input lies in C+; returns it as complex."""
    if np.ndim(z) == 0:
        return HalfPlanePoint(z)
    z = np.asarray(z, dtype=complex)
    if not np.all(z.imag > 0):
        raise DomainError("all evaluation points must satisfy Im z > 0")
    return z


@dataclass(frozen=True)
class ConeDomain:
    """Truncated cone ``{Im z > alpha, |Re z| < beta Im z}``."""

    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha < 0 or self.beta <= 0:
            raise ValueError("cone needs alpha >= 0 and beta > 0")

    def __contains__(self, z):
        z = complex(z)
        return z.imag > self.alpha and abs(z.real) < self.beta * z.imag


def cauchy_G(m, z):
    return m.cauchy(require_upper(z))


def cauchy_G_deriv(m, z):
    return m.cauchy_deriv(require_upper(z))


def f_transform(m, z):
    return 1.0 / m.cauchy(require_upper(z))


def f_transform_deriv(m, z):
    z = require_upper(z)
    g = m.cauchy(z)
    return -m.cauchy_deriv(z) / (g * g)


# ---------------------------------------------------------------------------
# vertical ladders


@dataclass(frozen=True)
class Ladder:
    """Geometric heights ``y0 * ratio**k`` for ``k = 0..levels``."""

    y0: float = 1e-2
    ratio: float = 0.5
    levels: int = 6
    degree: int = 2

    def __post_init__(self):
        if not (self.y0 > 0 and 0 < self.ratio < 1 and self.levels >= self.degree):
            raise ValueError("ladder needs y0 > 0, 0 < ratio < 1, levels >= degree")

    @property
    def heights(self):
        return self.y0 * self.ratio ** np.arange(self.levels + 1)


def _lagrange_at_zero(ys):
    # weights w_i with p(0) = sum w_i v_i for the interpolant through (ys, v)
    ys = np.asarray(ys, dtype=float)
    w = np.ones(len(ys))
    for i in range(len(ys)):
        for j in range(len(ys)):
            if i != j:
                w[i] *= ys[j] / (ys[j] - ys[i])
    return w


def richardson(ys, values, degree=2):
    """Extrapolate ``values(y)`` to ``y = 0`` from the smallest heights.

    ``values`` may carry trailing axes (one column per point). Returns the
    degree-``degree`` extrapolant and ``|p_degree(0) - p_{degree-1}(0)|`` as
    an error estimate.
    """
    ys = np.asarray(ys, dtype=float)
    values = np.asarray(values)
    order = np.argsort(ys)
    ys, values = ys[order], values[order]
    hi = _lagrange_at_zero(ys[: degree + 1])
    lo = _lagrange_at_zero(ys[:degree])
    est = np.tensordot(hi, values[: degree + 1], axes=1)
    coarse = np.tensordot(lo, values[:degree], axes=1)
    return est, np.abs(est - coarse)


def _ladder_points(x, ladder):
    ys = ladder.heights
    return ys, x + 1j * ys


def density_from_G(g_eval, x, ladder=Ladder(), clamp=1e-8):
    """Density at ``x`` as the vertical limit of ``-Im G(x+iy)/pi``."""
    ys, pts = _ladder_points(x, ladder)
    vals = -np.imag(np.asarray(g_eval(pts))) / np.pi
    est, _ = richardson(ys, vals, ladder.degree)
    est = float(est)
    if est < -clamp:
        raise ExtrapolationError(f"density extrapolant {est:.3e} < 0 at x={x}")
    return max(est, 0.0)


def atom_mass_estimate(g_eval, x, ladder=Ladder(), full_output=False):
    """Mass of the atom at ``x`` as the limit of ``Re(iy G(x+iy))``.

    With ``full_output`` also returns a confidence flag that is False when
    the extrapolation error estimate exceeds 1e-6.
    """
    ys, pts = _ladder_points(x, ladder)
    vals = np.real(1j * ys * np.asarray(g_eval(pts)))
    est, err = richardson(ys, vals, ladder.degree)
    mass = float(min(max(est, 0.0), 1.0))
    if mass < 1e-6:
        mass = 0.0
    if full_output:
        return mass, bool(err <= 1e-6)
    return mass


JC_INFINITY = 1e12


def jc_derivative(f_eval, a, ladder=Ladder(), mono_tol=1e-6):
    """Boundary derivative ``lim Im F(a+iy)/y`` along the vertical at ``a``.

    The ratio is nondecreasing as ``y`` shrinks for any Nevanlinna function;
    a ladder violating that by more than ``mono_tol`` is inconclusive.
    Returns ``math.inf`` when the limit exceeds ``JC_INFINITY`` or cannot
    be told apart from infinity at the ladder's resolution.
    """
    ys, pts = _ladder_points(a, ladder)
    ratios = np.imag(np.asarray(f_eval(pts))) / ys
    steps = np.diff(ratios)
    if np.any(steps < -mono_tol * np.maximum(1.0, np.abs(ratios[:-1]))):
        raise InconclusiveLimitError(f"Im F/y not monotone along the ladder at {a}")
    # extrapolate the reciprocal, which tends to the atom mass and stays bounded
    recip, err = richardson(ys, ys / np.imag(np.asarray(f_eval(pts))), ladder.degree)
    recip = float(recip)
    if recip <= max(1.0 / JC_INFINITY, float(err)):
        return math.inf
    return 1.0 / recip


# ---------------------------------------------------------------------------
# Nevanlinna checks


@dataclass
class NevanlinnaReport:
    min_ratio: float
    ratio_ok: bool
    asymptotic: list = field(default_factory=list)
    asymptotic_error: float = math.nan
    asymptotic_ok: bool = False
    real_part_a: float = math.nan
    b_plus_rho: float = math.nan
    excess_at_i: float = math.nan
    point_mass: bool = False

    @property
    def ok(self):
        return self.ratio_ok and self.asymptotic_ok

    def to_dict(self):
        return {
            "min_ratio": self.min_ratio,
            "ratio_ok": self.ratio_ok,
            "asymptotic": [[y, r.real, r.imag] for y, r in self.asymptotic],
            "asymptotic_error": self.asymptotic_error,
            "asymptotic_ok": self.asymptotic_ok,
            "real_part_a": self.real_part_a,
            "b_plus_rho": self.b_plus_rho,
            "excess_at_i": self.excess_at_i,
            "point_mass": self.point_mass,
            "ok": self.ok,
        }


def nevanlinna_diagnostics(m, samples, ratio_tol=1e-10, asym_tol=1e-3):
    """Check ``Im F >= Im z``, ``F(iy)/iy -> 1`` and read off ``Re F(i)``
    and ``Im F(i)``. Failures are recorded in the report, never raised."""
    samples = require_upper(np.atleast_1d(np.asarray(samples, dtype=complex)))
    if samples.size == 0:
        raise ValueError("need at least one sample point")
    fz = f_transform(m, samples)
    min_ratio = float(np.min(fz.imag / samples.imag))
    asym = []
    for y in (1e1, 1e2, 1e3, 1e4):
        asym.append((y, complex(f_transform(m, 1j * y) / (1j * y))))
    err = abs(asym[-1][1] - 1.0)
    fi = complex(f_transform(m, 1j))
    return NevanlinnaReport(
        min_ratio=min_ratio,
        ratio_ok=min_ratio >= 1.0 - ratio_tol,
        asymptotic=asym,
        asymptotic_error=err,
        asymptotic_ok=err < asym_tol,
        real_part_a=fi.real,
        b_plus_rho=fi.imag,
        excess_at_i=fi.imag - 1.0,
        point_mass=m.is_point_mass(),
    )
