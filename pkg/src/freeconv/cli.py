"""``freeconv`` command line: convolve, verify and oracle subcommands.

Exit codes: 0 success, 1 input error, 2 numerical decomposition failure
(``verify`` also exits 2 when any invariant family fails).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from collections import Counter
from dataclasses import asdict, dataclass, field
from importlib import resources

import jsonschema
import numpy as np

from . import __version__, twoatom
from .convolution import ConvolveConfig, DecompositionError, convolve
from .measure import MeasureError, load_measure
from .subordination import NonConvergenceError, denjoy_wolff, sweep
from .transforms import Ladder, nevanlinna_diagnostics
from .voiculescu import ConeTooSmallError, check_additivity

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERIC = 2

VERIFY_Y = (2.0, 1.0, 0.5, 0.1, 0.05)
VERIFY_X_POINTS = 21
IDENTITY_TOL = 1e-10
ADDITIVITY_POINTS = (5j, 10j, 20j)
ADDITIVITY_TOL = 1e-8
ORACLE_TOL = 1e-10
LIFT_SLACK = 1e-12


class InputError(Exception):
    """Bad files, bad flags or unsupported inputs (exit 1)."""


@dataclass
class RunConfig:
    grid_min: float | None = None
    grid_max: float | None = None
    grid_points: int = 2001
    ladder: Ladder = field(default_factory=Ladder)
    tol: float = 1e-13
    max_iter: int = 10_000
    density_mass_tol: float = 5e-3
    atom_exclusion_radius: float = 1e-3
    density_csv: str | None = "-"
    report_json: str | None = None

    def __post_init__(self):
        if self.grid_points < 2:
            raise InputError("grid needs at least two points")
        if self.grid_min is not None and self.grid_max is not None and not self.grid_min < self.grid_max:
            raise InputError("grid min must be below grid max")
        if min(self.tol, self.density_mass_tol, self.atom_exclusion_radius) <= 0 or self.max_iter < 1:
            raise InputError("tolerances must be positive")

    def convolve_config(self):
        return ConvolveConfig(
            grid_points=self.grid_points,
            grid_min=self.grid_min,
            grid_max=self.grid_max,
            ladder=self.ladder,
            tol=self.tol,
            max_iter=self.max_iter,
            density_mass_tol=self.density_mass_tol,
            atom_exclusion_radius=self.atom_exclusion_radius,
        )

    def to_dict(self):
        d = asdict(self)
        d["ladder"] = {"y0": self.ladder.y0, "ratio": self.ladder.ratio, "levels": self.ladder.levels}
        del d["density_csv"], d["report_json"]
        return d


def report_schema():
    text = resources.files("freeconv").joinpath("schemas/report.schema.json").read_text()
    return json.loads(text)


def _finite(v):
    v = float(v)
    return v if math.isfinite(v) else None


def _cpx(z):
    return [float(z.real), float(z.imag)]


def _header(command, args, config):
    return {
        "command": command,
        "version": __version__,
        "inputs": {"mu": args.mu, "nu": args.nu},
        "config": config.to_dict(),
    }


def _emit_report(report, path):
    jsonschema.validate(report, report_schema())
    text = json.dumps(report, indent=2, allow_nan=False) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def format_csv(x, f):
    """``x,f`` table with 17 significant digits; failed samples are omitted."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "f"])
    for xi, fi in zip(x, f):
        if math.isfinite(fi):
            w.writerow(["%.17g" % xi, "%.17g" % fi])
    return buf.getvalue()


def _load_pair(args):
    try:
        return load_measure(args.mu), load_measure(args.nu)
    except OSError as exc:
        raise InputError(f"cannot read measure file: {exc}") from exc
    except MeasureError as exc:
        raise InputError(str(exc)) from exc


def _run_config(args):
    try:
        ladder = Ladder(args.ladder[0], args.ladder[1], int(args.ladder[2])) if args.ladder else Ladder()
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    grid = args.grid
    return RunConfig(
        grid_min=grid[0] if grid else None,
        grid_max=grid[1] if grid else None,
        grid_points=int(grid[2]) if grid else 2001,
        ladder=ladder,
        density_csv=getattr(args, "out_csv", None),
        report_json=args.out_json,
    )


def cmd_convolve(args):
    mu, nu = _load_pair(args)
    config = _run_config(args)
    try:
        res = convolve(mu, nu, config.convolve_config())
    except DecompositionError as exc:
        print(f"decomposition failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    dens = res.density
    status = [str(s) for s in dens.status]
    report = _header("convolve", args, config)
    report.update(
        atoms=[[a.location, a.mass] for a in res.atoms],
        support=[[a, b] for a, b in res.support],
        mass={
            "atom_mass": float(res.mass.atom_mass),
            "ac_mass": float(res.mass.ac_mass),
            "deficit": float(res.mass.deficit),
            "tolerance": config.density_mass_tol,
            "ok": bool(abs(res.mass.deficit) <= config.density_mass_tol),
        },
        points={"x": dens.x.tolist(), "status": status, "counts": dict(Counter(status))},
    )
    table = format_csv(dens.x, dens.f)
    # everything is computed before anything is written
    if config.density_csv == "-":
        sys.stdout.write(table)
    elif config.density_csv:
        with open(config.density_csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(table)
    if config.report_json:
        _emit_report(report, config.report_json)
    else:
        jsonschema.validate(report, report_schema())
    return EXIT_OK


def _family(name, worst, tol, passed=None, note=None):
    worst = _finite(worst) if worst is not None else None
    if passed is None:
        passed = worst is not None and worst <= tol
    out = {"name": name, "passed": bool(passed), "worst_residual": worst, "tolerance": tol}
    if note:
        out["note"] = note
    return out


def _verify_grid(mu, nu):
    lo_m, hi_m = mu.support_bounds()
    lo_n, hi_n = nu.support_bounds()
    return np.linspace(lo_m + lo_n - 1.0, hi_m + hi_n + 1.0, VERIFY_X_POINTS)


def verify_families(mu, nu, config=RunConfig()):
    """Run every invariant family on ``(mu, nu)``; list of result dicts."""
    fams = []
    x = _verify_grid(mu, nu)
    table = sweep(mu, nu, x, VERIFY_Y, config.tol, config.max_iter)
    z = table.z
    scale = 1.0 + np.abs(z)
    sum_res = np.abs(table.omega1 + table.omega2 - z - table.f_value) / scale
    f_res = np.abs(1.0 / mu.cauchy(table.omega1) - 1.0 / nu.cauchy(table.omega2)) / scale
    lift = np.minimum(table.omega1.imag, table.omega2.imag) - z.imag
    worst = max(float(np.max(sum_res)), float(np.max(f_res)), float(np.max(-lift)))
    note = None if table.converged.all() else f"{int((~table.converged).sum())} points did not converge"
    fams.append(_family("subordination_identities", worst, IDENTITY_TOL,
                        passed=table.converged.all() and worst <= IDENTITY_TOL, note=note))

    if mu.is_point_mass() or nu.is_point_mass():
        fams.append(_family("point_mass_equality", None, None, passed=True, note="point-mass branch"))
    else:
        # Im F > Im z strictly away from point masses
        excess = np.min(table.f_value.imag - z.imag)
        fams.append(_family("point_mass_equality", -excess, 0.0, passed=excess > 0,
                            note="strict inequality Im F > Im z"))

    try:
        samples = check_additivity(mu, nu, ADDITIVITY_POINTS, tol=math.inf)
        worst = max(s.residual / (1.0 + abs(s.z)) for s in samples)
        fams.append(_family("phi_additivity", worst, ADDITIVITY_TOL))
    except (ConeTooSmallError, NonConvergenceError) as exc:
        fams.append(_family("phi_additivity", None, ADDITIVITY_TOL, passed=False, note=str(exc)))

    probe = (x[:, None] + 1j * np.asarray(VERIFY_Y)[None, :]).ravel()
    reports = [nevanlinna_diagnostics(m, probe) for m in (mu, nu)]
    conv_gap = float(np.max(z.imag - table.f_value.imag))
    worst = max([conv_gap] + [float(np.max(probe.imag - m_f.imag)) for m_f in
                              (1.0 / mu.cauchy(probe), 1.0 / nu.cauchy(probe))])
    asym = max(r.asymptotic_error for r in reports)
    fams.append(_family("nevanlinna", worst, LIFT_SLACK,
                        passed=worst <= LIFT_SLACK and all(r.ok for r in reports),
                        note=f"asymptotic error {asym:.3e}"))

    if mu.is_two_atom() and nu.is_two_atom():
        rows = oracle_rows(mu, nu, [xi + 1j * y for xi in x[::4] for y in (1.0, 2.0, 3.0)])
        fams.append(_family("two_atom_oracle", max(r["distance"] for r in rows), ORACLE_TOL))
    return fams


def cmd_verify(args):
    mu, nu = _load_pair(args)
    config = _run_config(args)
    fams = verify_families(mu, nu, config)
    report = _header("verify", args, config)
    report.update(families=fams, passed=all(f["passed"] for f in fams))
    _emit_report(report, config.report_json)
    return EXIT_OK if report["passed"] else EXIT_NUMERIC


def oracle_rows(mu, nu, zs):
    """Quadratic root against plain fixed-point iteration at each ``z``."""
    tm, tn = twoatom.TwoAtomMeasure.from_measure(mu), twoatom.TwoAtomMeasure.from_measure(nu)
    rows = []
    for z in zs:
        q = complex(twoatom.omega1_quadratic(tm, tn, z))
        e = denjoy_wolff(mu, nu, z).omega1
        rows.append({"z": _cpx(z), "oracle": _cpx(q), "engine": _cpx(e), "distance": abs(q - e)})
    return rows


def _parse_z(text):
    try:
        re_, im_ = (float(p) for p in text.split(","))
    except ValueError as exc:
        raise InputError(f"bad point {text!r}; expected re,im") from exc
    if not im_ > 0:
        raise InputError(f"point {text!r} is not in the upper half-plane")
    return complex(re_, im_)


def cmd_oracle(args):
    mu, nu = _load_pair(args)
    if not (mu.is_two_atom() and nu.is_two_atom()):
        raise InputError("oracle requires two-atom measures")
    zs = [_parse_z(t) for token in args.z for t in token.replace(";", " ").split()]
    config = RunConfig(report_json=args.out_json)
    report = _header("oracle", args, config)
    report["rows"] = oracle_rows(mu, nu, zs)
    _emit_report(report, config.report_json)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="freeconv", description="Free additive convolution of measures on the line.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--mu", required=True, help="measure spec (JSON)")
        sp.add_argument("--nu", required=True, help="measure spec (JSON)")
        sp.add_argument("--out-json", default=None, help="report path ('-' for stdout)")

    def numeric(sp):
        sp.add_argument("--grid", nargs=3, type=float, metavar=("MIN", "MAX", "N"))
        sp.add_argument("--ladder", nargs=3, type=float, metavar=("Y0", "R", "K"))

    c = sub.add_parser("convolve", help="atoms, density table and mass report")
    common(c)
    numeric(c)
    c.add_argument("--out-csv", default="-", help="density table path ('-' for stdout)")
    c.set_defaults(func=cmd_convolve)

    v = sub.add_parser("verify", help="invariant families; report goes to stdout by default")
    common(v)
    numeric(v)
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="two-atom quadratic against the iterative engine")
    common(o)
    # a negative real part needs the attached form --z=-1,2 (or "1,1;-1,2")
    o.add_argument("--z", nargs="+", action="extend", required=True, metavar="RE,IM")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; here 2 means numerical failure
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
