"""Probability measures on the real line: atoms plus compactly supported
absolutely continuous shapes with exact Cauchy transforms.

Every shape implements the same small evaluator surface (``density``,
``cauchy``, ``cauchy_deriv``, ``moment``, ``support``, ``pushforward``) so
new families can be added without touching the transform layer.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

MASS_TOL = 1e-9
RENORM_FLOOR = 1e-12
ATOM_MERGE_TOL = 1e-12
PWL_RENORM_TOL = 1e-6


class MeasureError(ValueError):
    """Base class for invalid measure input."""


class MeasureParseError(MeasureError):
    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


class NormalizationError(MeasureError):
    pass


class MeasureValidationError(MeasureError):
    pass


class DegenerateMapError(MeasureError):
    pass


# ---------------------------------------------------------------------------
# helpers for segment transforms


_SERIES_TERMS = 13


def _atanh_ratio(q):
    """Return ``A(q) = atanh(q)/q`` and its derivative ``A'(q)``.

    Uses the even power series for small ``|q|`` so that the far field of
    uniform and piecewise-linear transforms keeps full relative accuracy.
    """
    q = np.asarray(q, dtype=complex)
    a = np.empty_like(q)
    da = np.empty_like(q)
    small = np.abs(q) < 0.2
    if np.any(small):
        qs = q[small]
        q2 = qs * qs
        # A - 1 = sum_{n>=1} q^(2n)/(2n+1);  A' = sum_{n>=1} 2n q^(2n-1)/(2n+1)
        acc = np.zeros_like(qs)
        dacc = np.zeros_like(qs)
        for n in range(_SERIES_TERMS, 0, -1):
            acc = (acc + 1.0 / (2 * n + 1)) * q2
            dacc = dacc * q2 + 2.0 * n / (2 * n + 1)
        a[small] = 1.0 + acc
        da[small] = dacc * qs
    big = ~small
    if np.any(big):
        qb = q[big]
        ab = np.arctanh(qb) / qb
        a[big] = ab
        da[big] = (1.0 / (1.0 - qb * qb) - ab) / qb
    return a, da


def _scalarize(value, like):
    if np.ndim(like) == 0:
        return complex(value) if np.iscomplexobj(value) else float(value)
    return value


# ---------------------------------------------------------------------------
# shapes


@dataclass(frozen=True)
class Semicircle:
    center: float
    radius: float

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise MeasureValidationError("semicircle radius must be positive")

    def support(self):
        return (self.center - self.radius, self.center + self.radius)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        r2 = self.radius ** 2
        inside = np.clip(r2 - (x - self.center) ** 2, 0.0, None)
        return _scalarize(2.0 / (np.pi * r2) * np.sqrt(inside), x)

    def _root(self, zeta):
        # sqrt(zeta^2 - r^2) with the branch ~ zeta at infinity, in C+ for zeta in C+
        return np.sqrt(zeta - self.radius) * np.sqrt(zeta + self.radius)

    def cauchy(self, z):
        zeta = np.asarray(z, dtype=complex) - self.center
        return _scalarize(2.0 / (zeta + self._root(zeta)), z)

    def cauchy_deriv(self, z):
        zeta = np.asarray(z, dtype=complex) - self.center
        s = self._root(zeta)
        return _scalarize(-2.0 / ((zeta + s) * s), z)

    def central_moment(self, k):
        if k % 2:
            return 0.0
        n = k // 2
        return math.comb(2 * n, n) / (n + 1) * (self.radius / 2.0) ** k

    def pushforward(self, shift, scale):
        return Semicircle(scale * self.center + shift, abs(scale) * self.radius)

    def to_dict(self):
        return {"semicircle": {"center": self.center, "radius": self.radius}}


@dataclass(frozen=True)
class Arcsine:
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise MeasureValidationError("arcsine requires a < b")

    @property
    def center(self):
        return 0.5 * (self.a + self.b)

    def support(self):
        return (self.a, self.b)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        prod = (x - self.a) * (self.b - x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(prod > 0, 1.0 / (np.pi * np.sqrt(np.where(prod > 0, prod, 1.0))), 0.0)
        return _scalarize(out, x)

    def cauchy(self, z):
        z = np.asarray(z, dtype=complex)
        return _scalarize(1.0 / (np.sqrt(z - self.a) * np.sqrt(z - self.b)), z)

    def cauchy_deriv(self, z):
        z = np.asarray(z, dtype=complex)
        g = 1.0 / (np.sqrt(z - self.a) * np.sqrt(z - self.b))
        return _scalarize(-0.5 * g * (1.0 / (z - self.a) + 1.0 / (z - self.b)), z)

    def central_moment(self, k):
        if k % 2:
            return 0.0
        n = k // 2
        h = 0.5 * (self.b - self.a)
        return math.comb(2 * n, n) / 4 ** n * h ** k

    def pushforward(self, shift, scale):
        lo, hi = sorted((scale * self.a + shift, scale * self.b + shift))
        return Arcsine(lo, hi)

    def to_dict(self):
        return {"arcsine": {"a": self.a, "b": self.b}}


@dataclass(frozen=True)
class Uniform:
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise MeasureValidationError("uniform requires a < b")

    @property
    def center(self):
        return 0.5 * (self.a + self.b)

    def support(self):
        return (self.a, self.b)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where((x > self.a) & (x < self.b), 1.0 / (self.b - self.a), 0.0)
        return _scalarize(out, x)

    def cauchy(self, z):
        zeta = np.asarray(z, dtype=complex) - self.center
        h = 0.5 * (self.b - self.a)
        a, _ = _atanh_ratio(h / zeta)
        return _scalarize(a / zeta, z)

    def cauchy_deriv(self, z):
        zeta = np.asarray(z, dtype=complex) - self.center
        q = 0.5 * (self.b - self.a) / zeta
        a, da = _atanh_ratio(q)
        return _scalarize(-(q * da + a) / zeta ** 2, z)

    def central_moment(self, k):
        if k % 2:
            return 0.0
        h = 0.5 * (self.b - self.a)
        return h ** k / (k + 1)

    def pushforward(self, shift, scale):
        lo, hi = sorted((scale * self.a + shift, scale * self.b + shift))
        return Uniform(lo, hi)

    def to_dict(self):
        return {"uniform": {"a": self.a, "b": self.b}}


@dataclass(frozen=True)
class PiecewiseLinear:
    """Density interpolating ``(x, f)`` nodes linearly, zero outside.

    Nodes are renormalized to unit trapezoid mass when they are off by at
    most ``PWL_RENORM_TOL``; larger discrepancies are rejected.
    """

    nodes: tuple

    def __post_init__(self):
        nodes = tuple((float(x), float(f)) for x, f in self.nodes)
        if len(nodes) < 2:
            raise MeasureValidationError("pwl needs at least two nodes")
        xs = np.array([n[0] for n in nodes])
        fs = np.array([n[1] for n in nodes])
        if not np.all(np.isfinite(xs)) or not np.all(np.isfinite(fs)):
            raise MeasureValidationError("pwl nodes must be finite")
        if np.any(np.diff(xs) <= 0):
            raise MeasureValidationError("pwl nodes must be strictly increasing in x")
        if np.any(fs < 0):
            raise MeasureValidationError("pwl density values must be nonnegative")
        total = float(np.sum(0.5 * (fs[1:] + fs[:-1]) * np.diff(xs)))
        if abs(total - 1.0) > PWL_RENORM_TOL:
            raise NormalizationError(f"pwl density integrates to {total!r}, not 1")
        if total != 1.0:
            nodes = tuple((x, f / total) for x, f in nodes)
        object.__setattr__(self, "nodes", nodes)

    @property
    def xs(self):
        return np.array([n[0] for n in self.nodes])

    @property
    def fs(self):
        return np.array([n[1] for n in self.nodes])

    def support(self):
        return (self.nodes[0][0], self.nodes[-1][0])

    def density(self, x):
        x = np.asarray(x, dtype=float)
        out = np.interp(x, self.xs, self.fs, left=0.0, right=0.0)
        return _scalarize(out, x)

    def _segments(self):
        xs, fs = self.xs, self.fs
        mid = 0.5 * (xs[1:] + xs[:-1])
        half = 0.5 * np.diff(xs)
        fmid = 0.5 * (fs[1:] + fs[:-1])
        slope = np.diff(fs) / np.diff(xs)
        return mid, half, fmid, slope

    def _segment_terms(self, z):
        mid, half, fmid, slope = self._segments()
        z_arr = np.asarray(z, dtype=complex)
        zeta = z_arr[..., None] - mid
        q = half / zeta
        a, da = _atanh_ratio(q)
        return zeta, q, a, da, half, fmid, slope

    def cauchy(self, z):
        # per segment: int (fmid + slope*s)/(zeta - s) ds over [-h, h]
        #            = 2 q fmid A(q) + 2 h slope (A(q) - 1),  q = h/zeta
        _, q, a, _, half, fmid, slope = self._segment_terms(z)
        out = np.sum(2.0 * q * fmid * a + 2.0 * half * slope * (a - 1.0), axis=-1)
        return _scalarize(out, z)

    def cauchy_deriv(self, z):
        zeta, q, a, da, half, fmid, slope = self._segment_terms(z)
        dq = -q / zeta
        out = np.sum(2.0 * fmid * dq * (a + q * da) + 2.0 * half * slope * da * dq, axis=-1)
        return _scalarize(out, z)

    def raw_moment(self, k):
        xs, fs = self.xs, self.fs
        total = 0.0
        for x0, x1, f0, f1 in zip(xs[:-1], xs[1:], fs[:-1], fs[1:]):
            beta = (f1 - f0) / (x1 - x0)
            alpha = f0 - beta * x0
            total += alpha * (x1 ** (k + 1) - x0 ** (k + 1)) / (k + 1)
            total += beta * (x1 ** (k + 2) - x0 ** (k + 2)) / (k + 2)
        return float(total)

    def pushforward(self, shift, scale):
        nodes = [(scale * x + shift, f / abs(scale)) for x, f in self.nodes]
        if scale < 0:
            nodes.reverse()
        return PiecewiseLinear(tuple(nodes))

    def to_dict(self):
        return {"pwl": {"nodes": [[x, f] for x, f in self.nodes]}}


Shape = Union[Semicircle, Arcsine, Uniform, PiecewiseLinear]


def shape_moment(shape, k):
    if isinstance(shape, PiecewiseLinear):
        return shape.raw_moment(k)
    c = shape.center
    return float(sum(math.comb(k, j) * c ** (k - j) * shape.central_moment(j) for j in range(k + 1)))


# ---------------------------------------------------------------------------
# measures


@dataclass(frozen=True)
class Atom:
    location: float
    mass: float

    def __post_init__(self):
        object.__setattr__(self, "location", float(self.location))
        object.__setattr__(self, "mass", float(self.mass))
        if not math.isfinite(self.location):
            raise MeasureValidationError("atom location must be finite")
        if not (0.0 < self.mass <= 1.0 + MASS_TOL):
            raise MeasureValidationError(f"atom mass {self.mass!r} outside (0, 1]")


@dataclass(frozen=True)
class AcComponent:
    weight: float
    shape: Shape

    def __post_init__(self):
        object.__setattr__(self, "weight", float(self.weight))
        if not (0.0 < self.weight <= 1.0 + MASS_TOL):
            raise MeasureValidationError(f"ac weight {self.weight!r} outside (0, 1]")


def _merge_atoms(atoms):
    merged = []
    for atom in sorted(atoms, key=lambda a: a.location):
        if merged and atom.location - merged[-1][0] < ATOM_MERGE_TOL:
            loc, mass = merged[-1]
            merged[-1] = (loc, mass + atom.mass)
        else:
            merged.append((atom.location, atom.mass))
    return tuple(Atom(loc, mass) for loc, mass in merged)


@dataclass(frozen=True)
class Measure:
    """A Borel probability measure: sorted atoms plus weighted ac shapes.

    Total mass must equal one within ``MASS_TOL``; it is then rescaled so
    that it equals one to rounding.
    """

    atoms: tuple = ()
    ac: tuple = ()

    def __post_init__(self):
        atoms = _merge_atoms(tuple(self.atoms))
        ac = tuple(self.ac)
        if not atoms and not ac:
            raise NormalizationError("measure has no mass")
        total = math.fsum([a.mass for a in atoms] + [c.weight for c in ac])
        if abs(total - 1.0) > MASS_TOL:
            raise NormalizationError(f"total mass {total!r} differs from 1")
        # leave decimal inputs such as 0.7 + 0.3 untouched
        if abs(total - 1.0) > RENORM_FLOOR:
            atoms = tuple(Atom(a.location, a.mass / total) for a in atoms)
            ac = tuple(AcComponent(c.weight / total, c.shape) for c in ac)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "ac", ac)

    @property
    def total_mass(self):
        return math.fsum([a.mass for a in self.atoms] + [c.weight for c in self.ac])

    def is_point_mass(self):
        return len(self.atoms) == 1 and not self.ac and abs(self.atoms[0].mass - 1.0) <= MASS_TOL

    def is_two_atom(self):
        return len(self.atoms) == 2 and not self.ac

    def is_atomic(self):
        return not self.ac

    def support_bounds(self):
        pts = [a.location for a in self.atoms]
        for c in self.ac:
            pts.extend(c.shape.support())
        return (min(pts), max(pts))

    def atom_mass_at(self, x, tol=ATOM_MERGE_TOL):
        for a in self.atoms:
            if abs(a.location - x) < tol:
                return a.mass
        return 0.0

    def density(self, x):
        x_arr = np.asarray(x, dtype=float)
        out = np.zeros(x_arr.shape)
        for c in self.ac:
            out = out + c.weight * np.asarray(c.shape.density(x_arr))
        return _scalarize(out, x)

    def cauchy(self, z):
        """Cauchy transform evaluated through the closed forms at any
        complex point off the support (callers enforce the half-plane)."""
        z_arr = np.asarray(z, dtype=complex)
        out = np.zeros(z_arr.shape, dtype=complex)
        for a in self.atoms:
            out = out + a.mass / (z_arr - a.location)
        for c in self.ac:
            out = out + c.weight * c.shape.cauchy(z_arr)
        return _scalarize(out, z)

    def cauchy_deriv(self, z):
        z_arr = np.asarray(z, dtype=complex)
        out = np.zeros(z_arr.shape, dtype=complex)
        for a in self.atoms:
            out = out - a.mass / (z_arr - a.location) ** 2
        for c in self.ac:
            out = out + c.weight * c.shape.cauchy_deriv(z_arr)
        return _scalarize(out, z)

    def to_dict(self):
        doc = {}
        if self.atoms:
            doc["atoms"] = [[a.location, a.mass] for a in self.atoms]
        if self.ac:
            doc["ac"] = [{"w": c.weight, **c.shape.to_dict()} for c in self.ac]
        return doc


def point_mass(a):
    return Measure(atoms=(Atom(a, 1.0),))


def atomic(*pairs):
    """``atomic((x0, m0), (x1, m1), ...)``."""
    return Measure(atoms=tuple(Atom(x, m) for x, m in pairs))


def single(shape):
    return Measure(ac=(AcComponent(1.0, shape),))


# ---------------------------------------------------------------------------
# measure documents

_BARE_KEY = re.compile(r"([{,]\s*)([A-Za-z_][A-Za-z0-9_]*)\s*:")

_SHAPE_KEYS = {
    "semicircle": (Semicircle, ("center", "radius")),
    "arcsine": (Arcsine, ("a", "b")),
    "uniform": (Uniform, ("a", "b")),
}


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MeasureParseError(f"expected a number, got {value!r}", field=path)
    return float(value)


def _parse_shape(obj, path):
    keys = [k for k in obj if k != "w"]
    if len(keys) != 1:
        raise MeasureParseError("ac entry needs exactly one shape key", field=path)
    key = keys[0]
    body = obj[key]
    if not isinstance(body, dict):
        raise MeasureParseError("shape body must be an object", field=f"{path}.{key}")
    if key == "pwl":
        nodes = body.get("nodes")
        if not isinstance(nodes, list):
            raise MeasureParseError("pwl needs a nodes list", field=f"{path}.pwl.nodes")
        pairs = []
        for i, node in enumerate(nodes):
            npath = f"{path}.pwl.nodes[{i}]"
            if not isinstance(node, list) or len(node) != 2:
                raise MeasureParseError("node must be [x, f]", field=npath)
            pairs.append((_number(node[0], npath), _number(node[1], npath)))
        return PiecewiseLinear(tuple(pairs))
    if key not in _SHAPE_KEYS:
        raise MeasureParseError(f"unknown shape {key!r}", field=path)
    cls, names = _SHAPE_KEYS[key]
    missing = [n for n in names if n not in body]
    if missing or set(body) - set(names):
        raise MeasureParseError(f"{key} takes fields {names}", field=f"{path}.{key}")
    return cls(*(_number(body[n], f"{path}.{key}.{n}") for n in names))


def measure_from_dict(doc):
    if not isinstance(doc, dict):
        raise MeasureParseError("measure spec must be an object")
    unknown = set(doc) - {"atoms", "ac"}
    if unknown:
        raise MeasureParseError(f"unknown keys {sorted(unknown)}", field=sorted(unknown)[0])
    atoms = []
    seen = set()
    for i, pair in enumerate(doc.get("atoms", [])):
        path = f"atoms[{i}]"
        if not isinstance(pair, list) or len(pair) != 2:
            raise MeasureParseError("atom must be [location, mass]", field=path)
        loc, mass = _number(pair[0], path), _number(pair[1], path)
        if loc in seen:
            raise MeasureValidationError(f"duplicate atom location {loc!r} at {path}")
        seen.add(loc)
        atoms.append(Atom(loc, mass))
    ac = []
    for i, obj in enumerate(doc.get("ac", [])):
        path = f"ac[{i}]"
        if not isinstance(obj, dict) or "w" not in obj:
            raise MeasureParseError("ac entry needs a weight 'w'", field=path)
        ac.append(AcComponent(_number(obj["w"], f"{path}.w"), _parse_shape(obj, path)))
    return Measure(atoms=tuple(atoms), ac=tuple(ac))


def parse_measure(text):
    """Parse a measure spec document (JSON; bare object keys tolerated)."""
    quoted = _BARE_KEY.sub(r'\1"\2":', text)
    try:
        doc = json.loads(quoted)
    except json.JSONDecodeError as exc:
        raise MeasureParseError(exc.msg, line=exc.lineno) from exc
    return measure_from_dict(doc)


def render_measure(m):
    return json.dumps(m.to_dict())


def load_measure(path):
    with open(path, encoding="utf-8") as fh:
        return parse_measure(fh.read())


# ---------------------------------------------------------------------------
# elementary manipulations


def shift_scale(m, shift, scale):
    """Pushforward of ``m`` under ``t -> scale*t + shift``."""
    if scale == 0:
        raise DegenerateMapError("scale must be nonzero")
    if shift == 0 and scale == 1:
        return m
    atoms = tuple(Atom(scale * a.location + shift, a.mass) for a in m.atoms)
    ac = tuple(AcComponent(c.weight, c.shape.pushforward(shift, scale)) for c in m.ac)
    return Measure(atoms=atoms, ac=ac)


def moment(m, k):
    if k < 0 or int(k) != k:
        raise ValueError("moment order must be a nonnegative integer")
    total = sum(a.mass * a.location ** k for a in m.atoms)
    total += sum(c.weight * shape_moment(c.shape, k) for c in m.ac)
    return float(total)
