"""Compare the term-by-term second-order cross operators with the horizontal-coframe forms.

At n = 1 the two agree; from n = 2 on only the horizontal forms stay invariant.
Prints the worst invariance defect of each over random (g, f, p).

    python scripts/cross_operator_forms.py --samples 14
"""

import argparse

import numpy as np

from siegeljacobi.diffops import build_operator, invariance_pair
from siegeljacobi.frames import CoordFrame
from siegeljacobi.harness import relative_defect
from siegeljacobi.testfunctions import standard_library


def worst_defect(op, frame, samples, seed):
    rng = np.random.default_rng(seed)
    lib = standard_library(frame)
    return max(relative_defect(*invariance_pair(op, frame, frame.random_group_element(rng),
                                                lib[i % len(lib)], frame.random_point(rng)))
               for i in range(samples))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=14)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for n, m in ((1, 1), (2, 1), (2, 2)):
        for model, names in (("HC", ("M2", "M2_termwise")), ("D", ("S2", "S2_termwise"))):
            frame = CoordFrame(model, n, m)
            for name in names:
                d = worst_defect(build_operator(name, n, m), frame, args.samples, args.seed)
                print(f"n={n} m={m}  {name:<11} worst invariance defect {d:.2e}")


if __name__ == "__main__":
    main()
