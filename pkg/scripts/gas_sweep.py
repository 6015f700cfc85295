"""Modeled gas per ledger function as n doubles, with affine fits.

    python scripts/gas_sweep.py --max-n 256 --profile test --out gas.json
"""

import argparse
import json

from zkdkg.harness import gas_probe
from zkdkg.harness.scenario import fit_affine

FUNCTIONS = ("register", "distribute", "dispute", "justify", "derive")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--min-n", type=int, default=4)
    ap.add_argument("--max-n", type=int, default=256)
    ap.add_argument("--profile", default="test", choices=["toy", "test", "production"])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args()

    ns = []
    n = args.min_n
    while n <= args.max_n:
        ns.append(n)
        n *= 2
    rows = {n: gas_probe(n, profile=args.profile, seed=args.seed) for n in ns}

    print("n".rjust(5) + "".join(f.rjust(12) for f in FUNCTIONS))
    for n in ns:
        print(str(n).rjust(5) + "".join(str(rows[n][f]).rjust(12) for f in FUNCTIONS))
    print()
    fits = {}
    for f in FUNCTIONS:
        fit = fit_affine(ns, [rows[n][f] for n in ns])
        fits[f] = vars(fit)
        print(f"{f:>10}: {fit.intercept:10.1f} + {fit.slope:8.2f} n   residual {fit.max_residual:.2g}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"profile": args.profile, "gas": {str(n): rows[n] for n in ns},
                       "fits": fits}, fh, indent=2)


if __name__ == "__main__":
    main()
