"""Closed forms for convex combinations of two point masses.

For ``mu = t delta_u + (1-t) delta_v`` the map ``h(w) = F_mu(w) - w + a`` is
a real Moebius transformation, so the subordination fixed point solves a
quadratic. Everything here uses ``a = 0``; the general anchor only enters
through ``z - a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measure import Atom, Measure
from .transforms import DomainError, require_upper


class RootSelectionError(ArithmeticError):
    pass


@dataclass(frozen=True)
class TwoAtomMeasure:
    u: float
    v: float
    t: float

    def __post_init__(self):
        if self.u == self.v:
            raise ValueError("two-atom measure needs distinct locations")
        if not 0.0 < self.t < 1.0:
            raise ValueError("two-atom weight t must lie in (0, 1)")

    @classmethod
    def from_measure(cls, m):
        if not m.is_two_atom():
            raise ValueError("measure is not a convex combination of two point masses")
        first, second = m.atoms
        return cls(first.location, second.location, first.mass)

    def to_measure(self):
        return Measure(atoms=(Atom(self.u, self.t), Atom(self.v, 1.0 - self.t)))

    def f_transform(self, w):
        # F(w) = (w - u)(w - v) / (w - t v - (1-t) u)
        w = np.asarray(w, dtype=complex)
        out = (w - self.u) * (w - self.v) / (w - self.t * self.v - (1 - self.t) * self.u)
        return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MobiusMap:
    """``h(z) = (b z + c) / (z + d)``."""

    b: float
    c: float
    d: float

    @property
    def determinant(self):
        return self.b * self.d - self.c

    def __call__(self, z):
        return (self.b * z + self.c) / (z + self.d)

    def compose(self, inner):
        """Coefficients of ``self(inner(z))`` as a 2x2 matrix (not normalized)."""
        outer = np.array([[self.b, self.c], [1.0, self.d]])
        inn = np.array([[inner.b, inner.c], [1.0, inner.d]])
        return outer @ inn


def h_mobius(m, a=0.0):
    first = m.t * m.u + (1 - m.t) * m.v
    second = m.t * m.v + (1 - m.t) * m.u
    return MobiusMap(b=a - first, c=m.u * m.v - a * second, d=-second)


def quadratic_coefficients(mu, nu, z):
    """Coefficients ``(A, B, C)`` of ``A w^2 + B w + C = 0`` solved by the
    first subordination function at ``z`` (anchor ``a = 0``).

    From ``w = N/D + z`` with ``N = r w + s`` and ``D = p w + q`` where
    ``p = b_mu + z + d_nu``, ``q = c_mu + (z + d_nu) d_mu``,
    ``r = b_nu b_mu + b_nu z + c_nu``, ``s = b_nu c_mu + b_nu z d_mu + c_nu d_mu``.
    """
    hm, hn = h_mobius(mu), h_mobius(nu)
    p = hm.b + z + hn.d
    q = hm.c + (z + hn.d) * hm.d
    r = hn.b * hm.b + hn.b * z + hn.c
    s = hn.b * hm.c + hn.b * z * hm.d + hn.c * hm.d
    return p, q - z * p - r, -(z * q + s)


def quadratic_roots(A, B, C):
    disc = B * B - 4 * A * C
    root = np.sqrt(disc)
    # pick the sign that avoids cancellation in -B -/+ sqrt
    flip = np.real(np.conj(B) * root) < 0
    root = np.where(flip, -root, root)
    qq = -0.5 * (B + root)
    safe = np.where(qq == 0, 1.0, qq)
    r1 = qq / A
    r2 = np.where(qq == 0, r1, C / safe)
    return r1, r2


def omega1_quadratic(mu, nu, z, full_output=False):
    """First subordination function for two two-atom measures at ``z``.

    Of the two roots the one with ``Im w >= Im z`` is returned. When both
    qualify the root whose value at ``10|z|`` scale continues to ``w ~ z``
    wins. With ``full_output`` the discarded root is returned as well.
    Accepts scalar or array ``z``.
    """
    z = require_upper(z)
    zz = np.asarray(z, dtype=complex)
    A, B, C = quadratic_coefficients(mu, nu, zz)
    r1, r2 = quadratic_roots(A, B, C)
    tol = 1e-12 * (1 + np.abs(zz))
    ok1 = r1.imag >= zz.imag - tol
    ok2 = r2.imag >= zz.imag - tol
    if np.any(~ok1 & ~ok2):
        raise RootSelectionError("no root of the subordination quadratic dominates Im z")
    pick1 = ok1 & ~ok2
    both = ok1 & ok2
    if np.any(both):
        # continuity tracking: compare with the branch at a far reference point
        ref_z = zz * 10.0 * np.maximum(1.0, np.abs(zz)) / np.abs(zz)
        ra, rb = quadratic_roots(*quadratic_coefficients(mu, nu, ref_z))
        ref = np.where(ra.imag >= rb.imag, ra, rb)
        scale = ref_z / zz
        closer1 = np.abs(r1 * scale - ref) <= np.abs(r2 * scale - ref)
        pick1 = pick1 | (both & closer1)
    chosen = np.where(pick1, r1, r2)
    other = np.where(pick1, r2, r1)
    if chosen.ndim == 0:
        chosen, other = complex(chosen), complex(other)
    if full_output:
        return chosen, other
    return chosen


def subordination_closed_form(mu, nu, z):
    """``(omega1, omega2, F_conv)`` for two-atom inputs."""
    w1 = omega1_quadratic(mu, nu, z)
    fval = mu.f_transform(w1)
    return w1, fval - w1 + np.asarray(z), fval


def arcsine_density(left, right, x):
    if not left < x < right:
        raise DomainError(f"x={x} outside ({left}, {right})")
    return 1.0 / (math.pi * math.sqrt((x - left) * (right - x)))
