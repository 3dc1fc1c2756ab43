"""Run the ``verify`` invariant families on every catalog pair and print a
pass/fail matrix with the worst residual of each family."""

import argparse

from freeconv import catalog
from freeconv.cli import verify_families


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--pairs", choices=["six", "all"], default="six")
    args = p.parse_args()
    pairs = catalog.PAIRS if args.pairs == "six" else catalog.all_pairs()
    failures = 0
    for a, b in pairs:
        fams = verify_families(*catalog.pair(a, b))
        cells = []
        for f in fams:
            res = f["worst_residual"]
            cells.append(f"{f['name']}={'ok' if f['passed'] else 'FAIL'}" + (f"({res:.1e})" if res is not None else ""))
            failures += not f["passed"]
        print(f"{a:>11} + {b:<11} " + " ".join(cells))
    print(f"{failures} failing families")


if __name__ == "__main__":
    main()
