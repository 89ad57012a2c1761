"""Fit the operator of tr((w w*)^j) against the Maass operators for every supported (n, j).

Prints the single-constant fit and the best combination of H_1..H_j.

    python scripts/conjecture_sweep.py --samples 40 --seed 0 [--json out.json]
"""

import argparse
import json

from siegeljacobi.correspondence import conjecture_probe


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=40)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json")
    args = ap.parse_args()
    rows = []
    for n in (1, 2):
        for j in range(1, n + 1):
            r = conjecture_probe(n, j, samples=args.samples, seed=args.seed)
            rows.append(r)
            comb = " + ".join(f"{v:.6g} {k}" for k, v in r["combination"].items())
            print(f"n={n} j={j}  c_j={r['c_j']:.6g}  residual={r['residual']:.2e}  "
                  f"best combination: {comb} (residual {r['combination_residual']:.2e})")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
