"""Named reference measures and pairs used by tests, scripts and ``verify``."""

from __future__ import annotations

import itertools

from .measure import AcComponent, Arcsine, Atom, Measure, PiecewiseLinear, Semicircle, Uniform, atomic, point_mass, single

MEASURES = {
    "semicircle": single(Semicircle(0.0, 2.0)),
    "bernoulli": atomic((0.0, 0.5), (1.0, 0.5)),
    "rademacher": atomic((-1.0, 0.5), (1.0, 0.5)),
    "two_atom_a": atomic((0.0, 0.6), (1.0, 0.4)),
    "two_atom_b": atomic((0.0, 0.7), (1.0, 0.3)),
    "uniform": single(Uniform(-1.0, 1.0)),
    "arcsine": single(Arcsine(0.0, 2.0)),
    "tent": single(PiecewiseLinear(((-1.0, 0.0), (0.0, 1.0), (1.0, 0.0)))),
    "mixed": Measure(atoms=(Atom(0.0, 0.7),), ac=(AcComponent(0.3, Uniform(-1.0, 1.0)),)),
    "three_atoms": atomic((-1.0, 0.2), (0.5, 0.5), (2.0, 0.3)),
    "point": point_mass(3.0),
}

# six representative pairs covering ac/ac, atomic/atomic, mixed and pwl inputs
PAIRS = [
    ("semicircle", "semicircle"),
    ("bernoulli", "bernoulli"),
    ("two_atom_a", "two_atom_b"),
    ("uniform", "arcsine"),
    ("semicircle", "rademacher"),
    ("mixed", "tent"),
]


def pair(name_mu, name_nu):
    return MEASURES[name_mu], MEASURES[name_nu]


def all_pairs(include_point=True):
    names = [n for n in MEASURES if include_point or not MEASURES[n].is_point_mass()]
    return list(itertools.combinations_with_replacement(names, 2))
