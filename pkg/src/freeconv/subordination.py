"""Subordination functions of a free additive convolution.

For ``z`` in C+ the first subordination function is the attracting fixed
point of ``f_z(w) = F_nu(F_mu(w) - w + z) - F_mu(w) + w``; plain iteration
converges from any seed in C+. Everything here works on numpy arrays of
evaluation points so whole grid rows iterate together.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import twoatom
from .transforms import require_upper

DEFAULT_TOL = 1e-13
DEFAULT_MAX_ITER = 10_000
LIFT_TOL = 1e-14
# steps that stall below this (relative) level are rounding noise, not drift
NOISE_TOL = 1e-10
STAGNATION = 50


class LiftError(ArithmeticError):
    """The intermediate point ``F_mu(w) - w + z`` fell below the real axis."""


class NonConvergenceError(ArithmeticError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (last step {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class SubordinationResult:
    z: complex
    omega1: complex
    omega2: complex
    f_value: complex
    iterations: int
    residual: float
    converged: bool = True

    def invariant_residuals(self, mu, nu):
        """Residuals of the three defining identities (0 means exact)."""
        return {
            "im_domination": min(self.omega1.imag - self.z.imag, self.omega2.imag - self.z.imag),
            "sum_identity": abs(self.omega1 + self.omega2 - self.z - self.f_value),
            "f_equality": abs(complex(1.0 / mu.cauchy(self.omega1)) - complex(1.0 / nu.cauchy(self.omega2))),
        }

    def satisfies_invariants(self, mu, nu, tol=1e-10):
        r = self.invariant_residuals(mu, nu)
        scale = 1.0 + abs(self.f_value)
        return (
            r["im_domination"] >= -tol
            and r["sum_identity"] <= tol * (1.0 + abs(self.z))
            and r["f_equality"] <= tol * scale
        )


def _F(m, w):
    return 1.0 / m.cauchy(w)


def _fz(mu, nu, z, w):
    fm = _F(mu, w)
    u = fm - w + z
    if np.any(np.imag(u) < -LIFT_TOL):
        raise LiftError("F_mu(w) - w + z left the upper half-plane; retry at larger Im z")
    # Im(F_mu(w) - w) >= 0 exactly, so Im u >= Im z up to rounding
    u = np.real(u) + 1j * np.maximum(np.imag(u), np.imag(z))
    return _F(nu, u) - fm + w


def fz_step(mu, nu, z, w):
    """One application of ``f_z`` to ``w``."""
    z = require_upper(z)
    w = require_upper(w)
    out = _fz(mu, nu, np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
    return complex(out) if np.ndim(out) == 0 else out


def _point_mass_collapse(mu, nu, z):
    """Closed form when either input is a point mass, else None."""
    if nu.is_point_mass():
        a = nu.atoms[0].location
        w1 = z - a
        return w1, _F(mu, w1)
    if mu.is_point_mass():
        b = mu.atoms[0].location
        fval = _F(nu, z - b)
        return fval + b, fval
    return None


def iterate(mu, nu, z, w0, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Run ``w <- f_z(w)`` elementwise until ``|step| <= tol (1 + |w|)``.

    A point whose step has not improved for ``STAGNATION`` rounds while
    already below ``NOISE_TOL (1 + |w|)`` has hit its rounding floor (ill
    conditioned ``F`` near a pole) and is accepted as converged too.
    Returns ``(omega1, iterations, last_step, converged)`` arrays. Only the
    not-yet-converged entries are advanced each round.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    w = np.array(np.broadcast_to(np.asarray(w0, dtype=complex), z.shape))
    iters = np.zeros(z.shape, dtype=int)
    step = np.full(z.shape, np.inf)
    done = np.zeros(z.shape, dtype=bool)
    active = np.arange(z.size)
    checkpoint = np.full(z.shape, np.inf)
    best = np.full(z.shape, np.inf)
    best_k = np.zeros(z.shape, dtype=int)
    for k in range(1, max_iter + 1):
        if active.size == 0:
            break
        wa = w[active]
        nxt = _fz(mu, nu, z[active], wa)
        s = np.abs(nxt - wa)
        w[active] = nxt
        step[active] = s
        iters[active] = k
        better = s < best[active]
        best[active[better]] = s[better]
        best_k[active[better]] = k
        scale = 1.0 + np.abs(wa)
        stalled = (k - best_k[active] >= STAGNATION) & (best[active] <= NOISE_TOL * scale)
        fin = (s <= tol * scale) | stalled
        done[active[fin]] = True
        active = active[~fin]
        if k % STALL_WINDOW == 0 and active.size:
            active = _drop_hopeless(active, step, checkpoint, tol * (1.0 + np.abs(w)), max_iter - k)
    return w, iters, step, done


STALL_WINDOW = 500


def _drop_hopeless(active, step, checkpoint, target, remaining):
    """Stop advancing points whose observed contraction rate over the last
    window cannot reach the target within four times the remaining budget.
    They would end non-converged anyway; this only bounds latency."""
    s_now = step[active]
    s_then = checkpoint[active]
    checkpoint[active] = s_now
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = (s_now / s_then) ** (1.0 / STALL_WINDOW)
        need = np.log(target[active] / s_now) / np.log(rate)
    hopeless = np.isfinite(s_then) & (rate < 1) & (need > 4 * remaining)
    return active[~hopeless]


def denjoy_wolff(mu, nu, z, w0=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Subordination data at a single point by plain fixed-point iteration.

    Raises ``NonConvergenceError`` when ``max_iter`` is exhausted.
    """
    if tol <= 0 or max_iter < 1:
        raise ValueError("need tol > 0 and max_iter >= 1")
    z = complex(require_upper(z))
    w0 = z if w0 is None else complex(require_upper(w0))
    collapsed = _point_mass_collapse(mu, nu, z)
    if collapsed is not None:
        w1, fval = complex(collapsed[0]), complex(collapsed[1])
        iters = 1
    else:
        w, it, step, done = iterate(mu, nu, z, w0, tol, max_iter)
        if not done[0]:
            raise NonConvergenceError(f"no fixed point at z={z} after {max_iter} steps", float(step[0]))
        w1 = complex(w[0])
        fval = complex(_F(mu, w1))
        iters = int(it[0])
    residual = abs(complex(_fz(mu, nu, np.asarray(z), np.asarray(w1))) - w1)
    return SubordinationResult(z, w1, fval - w1 + z, fval, iters, residual)


def subordinate(mu, nu, z, w0=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Like :func:`denjoy_wolff` but routes two-atom pairs to the quadratic."""
    if mu.is_two_atom() and nu.is_two_atom():
        z = complex(require_upper(z))
        tm, tn = twoatom.TwoAtomMeasure.from_measure(mu), twoatom.TwoAtomMeasure.from_measure(nu)
        w1, w2, fval = twoatom.subordination_closed_form(tm, tn, z)
        residual = abs(complex(_fz(mu, nu, np.asarray(z), np.asarray(w1))) - w1)
        return SubordinationResult(z, complex(w1), complex(w2), complex(fval), 0, residual)
    return denjoy_wolff(mu, nu, z, w0, tol, max_iter)


@dataclass
class SweepTable:
    """Subordination data on a ``len(y) x len(x)`` grid (rows are heights)."""

    x: np.ndarray
    y: np.ndarray
    omega1: np.ndarray
    omega2: np.ndarray
    f_value: np.ndarray
    iterations: np.ndarray
    residual: np.ndarray
    converged: np.ndarray

    @property
    def z(self):
        return self.x[None, :] + 1j * self.y[:, None]

    def __len__(self):
        return self.omega1.size

    def result(self, i, j):
        return SubordinationResult(
            complex(self.z[i, j]),
            complex(self.omega1[i, j]),
            complex(self.omega2[i, j]),
            complex(self.f_value[i, j]),
            int(self.iterations[i, j]),
            float(self.residual[i, j]),
            bool(self.converged[i, j]),
        )

    def results(self):
        return [[self.result(i, j) for j in range(len(self.x))] for i in range(len(self.y))]


WARM_LEVELS = (1.0, 0.1)


def sweep(mu, nu, grid_x, y_levels, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, delegate=True):
    """Subordination on every ``x + iy`` of a grid.

    Heights are processed from the top down and each column is seeded with
    its own result one level higher. Above the first requested height the
    columns are started at ``w0 = z`` on the fixed warm-up heights
    ``WARM_LEVELS`` (only those above the first requested level), which
    keeps seeds at low heights close to the attracting point. Per-point
    non-convergence is recorded, not raised.
    """
    x = np.asarray(grid_x, dtype=float)
    y = np.asarray(y_levels, dtype=float)
    if x.size > 1 and np.any(np.diff(x) < 0):
        raise ValueError("grid_x must be sorted")
    if np.any(y <= 0) or (y.size > 1 and np.any(np.diff(y) >= 0)):
        raise ValueError("y_levels must be positive and strictly descending")
    shape = (y.size, x.size)
    table = SweepTable(
        x, y,
        np.zeros(shape, complex), np.zeros(shape, complex), np.zeros(shape, complex),
        np.zeros(shape, int), np.zeros(shape), np.zeros(shape, bool),
    )
    if x.size == 0 or y.size == 0:
        return table

    two_atom = delegate and mu.is_two_atom() and nu.is_two_atom()
    if two_atom:
        tm = twoatom.TwoAtomMeasure.from_measure(mu)
        tn = twoatom.TwoAtomMeasure.from_measure(nu)

    warm = [h for h in WARM_LEVELS if h > y[0]]
    seed = None
    for level, h in enumerate([*warm, *y]):
        z = x + 1j * h
        collapsed = _point_mass_collapse(mu, nu, z)
        if collapsed is not None:
            w1 = collapsed[0]
            it = np.ones(x.size, int)
            ok = np.ones(x.size, bool)
        elif two_atom:
            w1 = np.asarray(twoatom.omega1_quadratic(tm, tn, z))
            it = np.zeros(x.size, int)
            ok = np.ones(x.size, bool)
        else:
            w0 = z if seed is None else seed
            w1, it, _, ok = iterate(mu, nu, z, w0, tol, max_iter)
        seed = w1
        if level < len(warm):
            continue
        row = level - len(warm)
        fval = _F(mu, w1)
        table.omega1[row] = w1
        table.f_value[row] = fval
        table.omega2[row] = fval - w1 + z
        table.iterations[row] = it
        table.converged[row] = ok
        table.residual[row] = np.abs(_fz(mu, nu, z, w1) - w1)
    return table
