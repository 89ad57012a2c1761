"""Command-line entry point: ``python -m siegeljacobi <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import re
import sys

import numpy as np

from . import __version__
from .correspondence import (
    conjecture_probe,
    fingerprint,
    fit_constant,
    poly_to_op_H,
    poly_to_op_HC,
    sample_pairs,
)
from .diffops import OPERATOR_NAMES, build_operator, maass_generators, operator_frame
from .frames import CoordFrame
from .harness import SUITES, report_json, run_suite
from .invariants import FAMILIES, InvariantPolynomial, catalog_json, example_polynomial

_POLY_RE = re.compile(r"^([a-z]+\d?)\[([\d,\s]+)\]$|^([a-z]+)(\d+)$")


def parse_polynomial(name: str, m: int):
    """Accepts ``q``/``xi``/``phi``/``psi``/``q1`` shorthands or ``family[i,j]``.

    Families that need a parameter matrix get the identity.
    """
    try:
        return example_polynomial(name)
    except KeyError:
        pass
    hit = _POLY_RE.match(name.strip())
    if not hit:
        raise ValueError(f"cannot parse polynomial {name!r}")
    if hit.group(1):
        family, idx = hit.group(1), tuple(int(v) for v in hit.group(2).split(","))
    else:
        family, idx = hit.group(3), (int(hit.group(4)),)
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    S = np.eye(m) if FAMILIES[family][1] else None
    return InvariantPolynomial(family, idx, S, "identity" if S is not None else "")


def _operator_by_name(name: str, n: int, m: int):
    if re.fullmatch(r"H\d+", name):
        j = int(name[1:])
        return maass_generators(n, j).H[j - 1], CoordFrame("H", n)
    op = build_operator(name, n, m)
    return op, operator_frame(name, n, m)


def _write(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_verify(args) -> int:
    reports = run_suite(args.suite, args.n, args.m, args.seed, args.samples, args.tol)
    command = f"verify --suite {args.suite} --n {args.n} --m {args.m} --seed {args.seed} --samples {args.samples}"
    if args.tol is not None:
        command += f" --tol {args.tol!r}"
    ok = all(r.passed for r in reports)
    for r in reports:
        flag = "PASS" if r.passed else "FAIL"
        print(f"{flag}  {r.check:<42} defect={r.max_defect:.3e} tol={r.tol:.1e} ({r.kind}, {r.wall_time:.2f}s)",
              file=sys.stderr if args.json == "-" else sys.stdout)
    if args.json:
        _write(report_json(command, args.seed, reports), None if args.json == "-" else args.json)
    return 0 if ok else 1


def cmd_maass(args) -> int:
    if not 1 <= args.j <= args.n:
        raise ValueError("need 1 <= j <= n")
    frame = CoordFrame("H", args.n)
    op = maass_generators(args.n, args.j).H[args.j - 1]
    print(fingerprint(op, frame, frame.base_point()).to_json())
    return 0


def cmd_catalog(args) -> int:
    text = catalog_json(args.n, args.m, samples=args.samples, seed=args.seed)
    _write(text, args.json)
    return 0 if all(e["invariant"] for e in json.loads(text)["polynomials"]) else 1


def cmd_correspond(args) -> int:
    P = parse_polynomial(args.poly, args.m)
    if args.m:
        op, frame = poly_to_op_HC(P, args.n, args.m), CoordFrame("HC", args.n, args.m)
    else:
        op, frame = poly_to_op_H(P, args.n), CoordFrame("H", args.n)
    out = {"poly": P.name, "n": args.n, "m": args.m,
           "fingerprint": json.loads(fingerprint(op, frame, frame.base_point()).to_json())}
    if args.fit_against:
        ref, ref_frame = _operator_by_name(args.fit_against, args.n, args.m)
        if ref_frame != frame:
            raise ValueError(f"{args.fit_against} lives on a different model than the polynomial operator")
        c, resid = fit_constant(op, ref, frame, sample_pairs(frame, args.samples, args.seed))
        out["fit"] = {"against": args.fit_against, "c": c, "residual": resid,
                      "samples": args.samples, "seed": args.seed}
    print(json.dumps(out, indent=2))
    return 0


def cmd_conjecture(args) -> int:
    print(json.dumps(conjecture_probe(args.n, args.j, samples=args.samples, seed=args.seed), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="siegeljacobi", description="Invariant operators on the Siegel-Jacobi space.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    v = sub.add_parser("verify", help="run a randomized verification suite")
    v.add_argument("--suite", choices=sorted(SUITES), required=True)
    v.add_argument("--n", type=int, default=1)
    v.add_argument("--m", type=int, default=1)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--samples", type=int, default=50)
    v.add_argument("--tol", type=float, default=None, help="override every per-check default tolerance")
    v.add_argument("--json", metavar="PATH", help="write the JSON report here ('-' for stdout)")
    v.set_defaults(func=cmd_verify)

    mq = sub.add_parser("maass", help="fingerprint of a Maass operator at the base point")
    mq.add_argument("--n", type=int, required=True)
    mq.add_argument("--j", type=int, required=True)
    mq.set_defaults(func=cmd_maass)

    c = sub.add_parser("catalog", help="list invariant polynomials with their invariance defects")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--samples", type=int, default=100)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--json", metavar="PATH")
    c.set_defaults(func=cmd_catalog)

    r = sub.add_parser("correspond", help="operator attached to an invariant polynomial")
    r.add_argument("--n", type=int, required=True)
    r.add_argument("--m", type=int, default=0)
    r.add_argument("--poly", required=True, help="q1, q, xi, phi, psi, or family[i,j] such as psi1[1]")
    r.add_argument("--fit-against", metavar="NAME",
                   help="operator name (" + ", ".join(sorted({x for v in OPERATOR_NAMES.values() for x in v}))
                   + ") or a Maass operator H<j>")
    r.add_argument("--samples", type=int, default=40)
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(func=cmd_correspond)

    q = sub.add_parser("conjecture", help="fit the operator of tr((w w*)^j) against H_j")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--j", type=int, required=True)
    q.add_argument("--samples", type=int, default=40)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=cmd_conjecture)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
