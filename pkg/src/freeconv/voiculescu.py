"""Right inverses of F-transforms on truncated cones and the Voiculescu
transform ``phi(z) = F^{-1}(z) - z``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .subordination import subordinate
from .transforms import ConeDomain, require_upper

NEWTON_MAX_STEPS = 100
INVERSE_TOL = 1e-12
ADDITIVITY_TOL = 1e-8


class ConeTooSmallError(ArithmeticError):
    """Newton left C+ or did not settle; retry with a larger cone height."""


class AdditivityError(AssertionError):
    pass


@dataclass(frozen=True)
class PhiSample:
    z: complex
    phi_mu: complex
    phi_nu: complex
    phi_conv: complex
    inverse_im_ok: bool = True

    @property
    def residual(self):
        return abs(self.phi_conv - self.phi_mu - self.phi_nu)

    def to_dict(self):
        return {
            "z": [self.z.real, self.z.imag],
            "phi_mu": [self.phi_mu.real, self.phi_mu.imag],
            "phi_nu": [self.phi_nu.real, self.phi_nu.imag],
            "phi_conv": [self.phi_conv.real, self.phi_conv.imag],
            "residual": self.residual,
        }


def default_cone(m):
    lo, hi = m.support_bounds()
    return ConeDomain(alpha=2.0 * (1.0 + (hi - lo)), beta=1.0)


def newton_invert(F, dF, z, w0=None, tol=INVERSE_TOL, max_steps=NEWTON_MAX_STEPS):
    """Solve ``F(w) = z`` from ``w0`` (default ``z``)."""
    w = z if w0 is None else w0
    target = tol * (1.0 + abs(z))
    for _ in range(max_steps):
        gap = F(w) - z
        if abs(gap) <= target:
            return w
        w = w - gap / dF(w)
        if not w.imag > 0:
            raise ConeTooSmallError(f"Newton iterate {w} left the upper half-plane")
    if abs(F(w) - z) <= target:
        return w
    raise ConeTooSmallError(f"Newton did not converge for z={z}")


def _check_cone(z, cone):
    if cone is not None and z not in cone:
        raise ValueError(f"{z} is outside the cone Im z > {cone.alpha}, |Re z| < {cone.beta} Im z")


def invert_F(m, z, cone=None):
    """``w`` with ``F_m(w) = z``, the right inverse that is close to ``z``."""
    z = complex(require_upper(z))
    _check_cone(z, cone)
    if m.is_point_mass():
        return z + m.atoms[0].location

    def F(w):
        return complex(1.0 / m.cauchy(w))

    def dF(w):
        g = m.cauchy(w)
        return complex(-m.cauchy_deriv(w) / (g * g))

    return newton_invert(F, dF, z)


def phi(m, z, cone=None):
    return invert_F(m, z, cone) - complex(z)


class ConvolutionF:
    """``F`` of ``mu ⊞ nu`` through the subordination engine, with the
    derivative from implicit differentiation of the fixed point:
    ``omega1' = F_nu'(omega2) / (1 - (F_nu'(omega2) - 1)(F_mu'(omega1) - 1))``.
    """

    def __init__(self, mu, nu):
        self.mu = mu
        self.nu = nu
        self._seed = None

    def _solve(self, w):
        res = subordinate(self.mu, self.nu, w, w0=self._seed)
        self._seed = res.omega1
        return res

    def __call__(self, w):
        return self._solve(w).f_value

    def deriv(self, w):
        res = self._solve(w)
        dfm = _dF(self.mu, res.omega1)
        dfn = _dF(self.nu, res.omega2)
        domega = dfn / (1.0 - (dfn - 1.0) * (dfm - 1.0))
        return dfm * domega


def _dF(m, w):
    g = complex(m.cauchy(w))
    return complex(-m.cauchy_deriv(w)) / (g * g)


def invert_convolution_F(mu, nu, z, cone=None):
    z = complex(require_upper(z))
    _check_cone(z, cone)
    F = ConvolutionF(mu, nu)
    return newton_invert(F, F.deriv, z)


def check_additivity(mu, nu, points, cone=None, tol=ADDITIVITY_TOL):
    """Compare ``phi_{mu ⊞ nu}`` with ``phi_mu + phi_nu`` at each point.

    Raises ``AdditivityError`` if any residual exceeds ``tol (1 + |z|)``.
    """
    samples = []
    for z in points:
        z = complex(require_upper(z))
        w_mu = invert_F(mu, z, cone)
        w_nu = invert_F(nu, z, cone)
        w_conv = invert_convolution_F(mu, nu, z, cone)
        im_ok = all(w.imag <= z.imag + INVERSE_TOL for w in (w_mu, w_nu, w_conv))
        samples.append(PhiSample(z, w_mu - z, w_nu - z, w_conv - z, im_ok))
    bad = [s for s in samples if s.residual > tol * (1.0 + abs(s.z))]
    if bad:
        worst = max(bad, key=lambda s: s.residual)
        raise AdditivityError(f"phi additivity residual {worst.residual:.3e} at z={worst.z}")
    return samples
