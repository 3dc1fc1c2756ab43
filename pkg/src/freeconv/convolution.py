"""Free additive convolution of two measures: atoms, density, support and
mass bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal

import mpmath
import numpy as np

from .measure import Atom
from .subordination import DEFAULT_MAX_ITER, DEFAULT_TOL, sweep
from .transforms import Ladder, richardson

# sample status codes
OK = "ok"
ATOM = "atom"
NO_CONVERGENCE = "no-convergence"
NEGATIVE = "negative-extrapolant"
UNSTABLE = "extrapolation-error"


class DecompositionError(ArithmeticError):
    """Atoms plus density fail to account for the total mass."""


@dataclass(frozen=True)
class ConvolveConfig:
    grid_points: int = 2001
    padding: float = 1.0
    grid_min: float | None = None
    grid_max: float | None = None
    ladder: Ladder = field(default_factory=Ladder)
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    density_mass_tol: float = 5e-3
    atom_exclusion_radius: float = 1e-3
    support_threshold: float = 1e-6
    clamp: float = 1e-8
    extrapolation_rtol: float = 0.02
    extrapolation_atol: float = 1e-6

    def grid(self, mu, nu):
        lo_m, hi_m = mu.support_bounds()
        lo_n, hi_n = nu.support_bounds()
        lo = lo_m + lo_n - self.padding if self.grid_min is None else self.grid_min
        hi = hi_m + hi_n + self.padding if self.grid_max is None else self.grid_max
        if not lo < hi or self.grid_points < 2:
            raise ValueError("grid needs min < max and at least two points")
        return np.linspace(lo, hi, self.grid_points)


@dataclass
class DensityGrid:
    """Density samples on a grid; ``f`` is NaN wherever ``status != "ok"``."""

    x: np.ndarray
    f: np.ndarray
    status: np.ndarray

    def samples(self):
        keep = self.status == OK
        return list(zip(self.x[keep].tolist(), self.f[keep].tolist()))

    def missing(self):
        bad = self.status != OK
        return list(zip(self.x[bad].tolist(), self.status[bad].tolist()))


@dataclass
class MassReport:
    atom_mass: float
    ac_mass: float

    @property
    def deficit(self):
        return 1.0 - self.atom_mass - self.ac_mass


@dataclass
class ConvolutionResult:
    atoms: list
    density: DensityGrid
    support: list
    mass: MassReport

    @property
    def density_samples(self):
        return self.density.samples()


def _dec(v):
    return Decimal(repr(float(v)))


def convolve_atoms(mu, nu):
    """Atoms of the free convolution: ``b + c`` carries
    ``mu({b}) + nu({c}) - 1`` whenever that is strictly positive.

    Masses and locations are combined in decimal arithmetic on the shortest
    float representations, so ``0.7 + 0.3`` counts as exactly one.
    """
    out = []
    for a in mu.atoms:
        for b in nu.atoms:
            excess = _dec(a.mass) + _dec(b.mass) - 1
            if excess > 0:
                out.append(Atom(float(_dec(a.location) + _dec(b.location)), float(excess)))
    return sorted(out, key=lambda at: at.location)


def _point_mass_partner(mu, nu):
    """``(shift, other)`` when one factor is a point mass, else None."""
    if nu.is_point_mass():
        return nu.atoms[0].location, mu
    if mu.is_point_mass():
        return mu.atoms[0].location, nu
    return None


def _invert_columns(x, ys, g, ok, atoms, config):
    """Vertical Stieltjes inversion of ``g`` (rows = heights) per column.

    The poles of the known atoms are removed first so that only the
    Poisson extension of the density is extrapolated.
    """
    z = x[None, :] + 1j * ys[:, None]
    for a in atoms:
        g = g - a.mass / (z - a.location)
    f = np.full(x.shape, np.nan)
    status = np.full(x.shape, OK, dtype=object)
    vals = -np.imag(g) / np.pi
    est, err = richardson(ys, vals, config.ladder.degree)
    used = np.argsort(ys)[: config.ladder.degree + 1]
    conv = np.all(ok[used], axis=0)
    status[~conv] = NO_CONVERGENCE
    unstable = conv & (err > np.maximum(config.extrapolation_rtol * np.abs(est), config.extrapolation_atol))
    status[unstable] = UNSTABLE
    neg = conv & ~unstable & (est < -config.clamp)
    status[neg] = NEGATIVE
    good = conv & ~unstable & ~neg
    f[good] = np.maximum(est[good], 0.0)
    return f, status


def convolve_density(mu, nu, grid_x, config=ConvolveConfig(), atoms=None):
    """Density of ``mu ⊞ nu`` on ``grid_x`` by subordination and vertical
    Stieltjes inversion. Points within ``atom_exclusion_radius`` of an atom
    of the convolution are skipped."""
    x = np.asarray(grid_x, dtype=float)
    ys = config.ladder.heights
    if atoms is None:
        atoms = convolve_atoms(mu, nu)
    partner = _point_mass_partner(mu, nu)
    if partner is not None:
        shift, other = partner
        pts = (x - shift)[None, :] + 1j * ys[:, None]
        g = other.cauchy(pts)
        ok = np.ones(g.shape, dtype=bool)
    else:
        table = sweep(mu, nu, x, ys, config.tol, config.max_iter)
        g = 1.0 / table.f_value
        ok = table.converged
    f, status = _invert_columns(x, ys, g, ok, atoms, config)
    for a in atoms:
        near = np.abs(x - a.location) < config.atom_exclusion_radius
        f[near] = np.nan
        status[near] = ATOM
    return DensityGrid(x, f, status)


def support_detect(x, f, threshold=1e-6):
    """Maximal runs with ``f > threshold``, widened by half a grid step."""
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    if x.size == 0:
        return []
    half = 0.5 * (x[1] - x[0]) if x.size > 1 else 0.0
    intervals = []
    for i0, i1 in _runs(f > threshold):
        intervals.append((float(x[i0] - half), float(x[i1] + half)))
    return intervals


def _runs(mask):
    runs = []
    start = None
    for i, flag in enumerate(mask):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(mask) - 1))
    return runs


EDGE_EXPONENT = -0.5
EXPONENT_RANGE = (-0.9, 2.0)


def _power_tail(f_in, d, h, p):
    """Mass from a singular point or edge ``e`` up to the outermost sample,
    plus the trapezoid error of the cells beyond, for ``f = A |e - x|^p``
    sampled at ``d, d + h, d + 2h, ...`` from ``e``.

    Summing the trapezoid error over all cells gives the Hurwitz zeta
    expression ``A h^(p+1) (theta^p / 2 - zeta(-p, theta))`` with
    ``theta = d / h``; the trapezoid rule alone is badly biased near
    inverse square-root singularities.
    """
    theta = d / h
    amp = f_in / d**p
    return amp * h ** (p + 1.0) * (0.5 * theta**p - float(mpmath.zeta(-p, theta)))


def _tail_to_point(x_in, f_in, x_prev, f_prev, e):
    """Tail toward a known singular point ``e``, with the exponent fitted
    through the two samples nearest to it."""
    d1, d2 = abs(e - x_in), abs(e - x_prev)
    if d1 == 0 or f_in <= 0:
        return 0.0
    p = 0.0
    if f_prev > 0 and d2 > d1:
        p = math.log(f_in / f_prev) / math.log(d1 / d2)
        p = min(max(p, EXPONENT_RANGE[0]), EXPONENT_RANGE[1])
    if d2 > d1:
        return _power_tail(f_in, d1, d2 - d1, p)
    return f_in * d1 / (p + 1.0)


def _edge_distance(xs, fs, p):
    """Distance from ``xs[0]`` to the zero of ``f^(1/p)`` extrapolated
    outward from the samples ``xs`` (outermost first), or None.

    Near a power-law edge ``f^(1/p)`` is smooth and vanishes linearly, so
    a line through two samples or a parabola through three locates it.
    """
    ys = np.asarray(fs, dtype=float) ** (1.0 / p)
    t = np.abs(np.asarray(xs, dtype=float) - xs[0])
    rho = ys[0] / ys[1]
    linear = rho * t[1] / (1.0 - rho) if 0 < rho < 1 else None
    if len(xs) < 3 or linear is None:
        return linear
    # parabola through (t_k, ys_k), evaluated at -d
    c2, c1, c0 = np.polyfit(t[:3], ys[:3], 2)
    roots = [-r.real for r in np.roots([c2, c1, c0]) if abs(r.imag) < 1e-14 * (1 + abs(r)) and r.real < 0]
    if not roots:
        return linear
    return min(roots, key=lambda d: abs(d - linear))


def _tail_to_edge(xs, fs, limit):
    """Tail toward an unknown support edge at most ``limit`` beyond the
    outermost sample ``xs[0]`` (``xs``, ``fs`` run inward).

    The density is modelled as ``A |e - x|^p`` with ``p = -1/2`` when it
    grows toward the edge and ``p = +1/2`` when it decays. Without a
    usable fit, a linear ramp over the gap is assumed.
    """
    f_in = fs[0]
    if limit <= 0 or f_in <= 0:
        return 0.0
    if len(fs) >= 2 and fs[1] > 0 and fs[1] != f_in:
        p = EDGE_EXPONENT if f_in > fs[1] else -EDGE_EXPONENT
        dist = _edge_distance(xs, fs, p)
        if dist is not None and dist > 0:
            if dist <= limit:
                return _power_tail(f_in, dist, abs(xs[1] - xs[0]), p)
            return f_in * limit / (p + 1.0)
    return 0.5 * f_in * limit


def _split_runs(x, pos, breakpoints):
    runs = []
    cuts = set()
    for b in breakpoints:
        k = int(np.searchsorted(x, b))
        if 0 < k < x.size:
            cuts.add(k)
    for i0, i1 in _runs(pos):
        start = i0
        for k in sorted(c for c in cuts if i0 < c <= i1):
            runs.append((start, k - 1))
            start = k
        runs.append((start, i1))
    return runs


def _reached(x, i1, b, radius):
    """True when every grid point strictly between ``x[i1]`` and ``b`` lies
    within ``radius`` of ``b`` (those were excluded, not failed)."""
    between = x[i1 + 1 :][x[i1 + 1 :] < b]
    return bool(np.all(b - between <= radius))


def _right_tails(x, f, runs, breakpoints, radius):
    total = 0.0
    finite = np.isfinite(f)
    starts = {r[0] for r in runs}
    for i0, i1 in runs:
        if i1 + 1 >= x.size:
            continue
        prev_x = x[i1 - 1] if i1 > i0 else x[i1]
        prev_f = f[i1 - 1] if i1 > i0 else 0.0
        later = np.nonzero(finite[i1 + 1 :])[0]
        j = i1 + 1 + int(later[0]) if later.size else None
        reach = x[j] if j is not None else x[-1]
        ahead = [b for b in breakpoints if x[i1] < b <= reach and _reached(x, i1, b, radius)]
        if ahead:
            total += _tail_to_point(x[i1], f[i1], prev_x, prev_f, min(ahead))
            continue
        limit = reach - x[i1]
        if j is not None and j in starts:
            limit *= 0.5
        lo = max(i0, i1 - 2)
        total += _tail_to_edge(x[lo : i1 + 1][::-1], f[lo : i1 + 1][::-1], limit)
    return total


def ac_mass(x, f, breakpoints=(), radius=0.0):
    """Quadrature of the density over its detected support.

    Trapezoid sums over runs of positive samples, plus power-law tails from
    each run's outer samples to the support edge or to a known singular
    point in ``breakpoints`` (atoms and borderline atom pairs), where runs
    are also split. A run only ends at a breakpoint if the samples in
    between were excluded within ``radius`` of it.
    """
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    if x.size < 2:
        return 0.0
    bps = sorted(float(b) for b in breakpoints)
    runs = _split_runs(x, np.isfinite(f) & (f > 0), bps)
    total = 0.0
    for i0, i1 in runs:
        if i1 > i0:
            total += float(np.trapezoid(f[i0 : i1 + 1], x[i0 : i1 + 1]))
    total += _right_tails(x, f, runs, bps, radius)
    n = x.size - 1
    mirrored = [(n - i1, n - i0) for i0, i1 in runs]
    total += _right_tails(-x[::-1], f[::-1], mirrored, [-b for b in reversed(bps)], radius)
    return total


def singular_points(mu, nu, atoms=None):
    """Atom locations of ``mu ⊞ nu`` together with the locations ``b + c``
    where ``mu({b}) + nu({c})`` equals one exactly (no atom, but the
    density may blow up there)."""
    pts = {a.location for a in (convolve_atoms(mu, nu) if atoms is None else atoms)}
    for a in mu.atoms:
        for b in nu.atoms:
            if _dec(a.mass) + _dec(b.mass) == 1:
                pts.add(float(_dec(a.location) + _dec(b.location)))
    return sorted(pts)


def convolve(mu, nu, config=ConvolveConfig(), grid_x=None):
    """Atoms, density samples, support and mass report of ``mu ⊞ nu``.

    Raises ``DecompositionError`` when the mass deficit exceeds ten times
    ``density_mass_tol``.
    """
    atoms = convolve_atoms(mu, nu)
    atom_mass = math.fsum(a.mass for a in atoms)
    if mu.is_point_mass() and nu.is_point_mass():
        empty = np.array([])
        return ConvolutionResult(atoms, DensityGrid(empty, empty, np.array([], dtype=object)), [], MassReport(atom_mass, 0.0))
    x = config.grid(mu, nu) if grid_x is None else np.asarray(grid_x, dtype=float)
    dens = convolve_density(mu, nu, x, config, atoms)
    f = np.where(np.isfinite(dens.f) & (dens.f <= config.support_threshold), 0.0, dens.f)
    support = support_detect(x, np.nan_to_num(f), config.support_threshold)
    mass = MassReport(atom_mass, ac_mass(x, f, singular_points(mu, nu, atoms), config.atom_exclusion_radius))
    if abs(mass.deficit) > 10 * config.density_mass_tol:
        raise DecompositionError(f"mass deficit {mass.deficit:.3e} exceeds {10 * config.density_mass_tol:.1e}")
    return ConvolutionResult(atoms, dens, support, mass)
