"""Bernoulli square against the arcsine law on (0, 2), for several ladders.

Prints the max absolute density error on interior points and near the
edges for each (y0, ratio, levels) choice."""

import argparse
from dataclasses import dataclass, field

import numpy as np

from freeconv import catalog
from freeconv.convolution import ConvolveConfig, OK, convolve_density
from freeconv.transforms import Ladder


@dataclass
class LadderStudy:
    ladders: list = field(default_factory=lambda: [Ladder(), Ladder(2e-2, 0.5, 6), Ladder(1e-2, 0.25, 6), Ladder(5e-3, 0.5, 8)])
    interior: tuple = (0.1, 1.9)
    edge: tuple = (0.005, 0.05)
    points: int = 200


def arcsine(x):
    return 1 / (np.pi * np.sqrt(x * (2 - x)))


def study(cfg):
    ber = catalog.MEASURES["bernoulli"]
    x_in = np.linspace(*cfg.interior, cfg.points)
    x_edge = np.linspace(*cfg.edge, cfg.points // 4)
    for lad in cfg.ladders:
        c = ConvolveConfig(ladder=lad)
        d_in = convolve_density(ber, ber, x_in, c)
        d_edge = convolve_density(ber, ber, x_edge, c)
        ok = d_edge.status == OK
        e_in = np.max(np.abs(d_in.f - arcsine(x_in)))
        e_edge = np.max(np.abs(d_edge.f[ok] - arcsine(x_edge[ok]))) if ok.any() else float("nan")
        print(f"y0={lad.y0:<7g} r={lad.ratio:<5g} K={lad.levels}  interior {e_in:.2e}  "
              f"edge {e_edge:.2e} ({ok.sum()}/{ok.size} kept)")


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--points", type=int, default=LadderStudy.points)
    args = p.parse_args()
    study(LadderStudy(points=args.points))


if __name__ == "__main__":
    main()
