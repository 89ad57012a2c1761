"""Run every verification suite at a list of sizes and write one JSON report per run.

    python scripts/run_all_suites.py --sizes 1,1 2,1 2,2 --samples 50 --out reports/
"""

import argparse
import sys
from pathlib import Path

from siegeljacobi.harness import SUITES, report_json, run_suite


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", nargs="+", default=["1,1", "2,1", "2,2"])
    ap.add_argument("--samples", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--suites", nargs="+", default=sorted(SUITES), choices=sorted(SUITES))
    ap.add_argument("--out", type=Path, default=Path("reports"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    failed = 0
    for size in args.sizes:
        n, m = (int(v) for v in size.split(","))
        for name in args.suites:
            reports = run_suite(name, n, m, args.seed, args.samples)
            bad = [r.check for r in reports if not r.passed]
            failed += len(bad)
            secs = sum(r.wall_time for r in reports)
            print(f"{name:<11} n={n} m={m}  {len(reports):>3} checks  {secs:6.1f}s  "
                  + ("ok" if not bad else "FAILED: " + ", ".join(bad)))
            cmd = f"run_all_suites {name} n={n} m={m} samples={args.samples}"
            (args.out / f"{name}_n{n}_m{m}.json").write_text(report_json(cmd, args.seed, reports) + "\n")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
