"""Randomized verification suites and their reports.

Every check draws from its own generator derived from the root seed and the
check id, so reports are reproducible and independent of check order.  The
defect of a sample is ``|a - b| / max(1, |a|, |b|)``; control checks pass when
their defect is *large*, showing the check can see a broken object.
"""

from __future__ import annotations

import json
import time
import zlib
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from . import groups as grp
from .correspondence import (
    correspondence_value,
    poly_to_op_H,
    poly_to_op_HC,
    standard_pbasis,
)
from .diffops import (
    Coeff,
    CoeffMul,
    OpMatrix,
    Partial,
    apply_at,
    build_operator,
    commutator,
    invariance_pair,
    maass_generators,
)
from .frames import CoordFrame
from .invariants import (
    InvariantPolynomial,
    catalog,
    check_u_invariance,
    example_polynomial,
    jacobian_rank,
    non_invariant_control,
    random_tpoint,
)
from .metrics import (
    cayley_coords,
    laplace_beltrami,
    metric_D,
    metric_D11_closed_form,
    metric_H,
    metric_HC,
    pullback,
)
from .testfunctions import standard_library

__all__ = ["CheckReport", "SuiteConfig", "SUITES", "DEFAULT_TOL", "run_suite", "report_json", "relative_defect"]

CONTROL_THRESHOLD = 1e-2

DEFAULT_TOL = {
    "group": 1e-9,
    "cayley": 1e-9,
    "polys": 1e-10,
    "metrics": 1e-8,
    "laplacian": 1e-7,
    "closed_form": 1e-10,
    "operators": 1e-7,
    "maass_identity": 1e-9,
    "maass": 1e-7,
    "correspond": 1e-8,
}


@dataclass
class CheckReport:
    check: str
    anchor: str
    samples: int
    seed: int
    max_defect: float
    tol: float
    passed: bool
    kind: str = "identity"
    wall_time: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("wall_time")  # keeps JSON byte-identical across runs
        return d


@dataclass(frozen=True)
class SuiteConfig:
    n: int = 1
    m: int = 1
    seed: int = 0
    samples: int = 50
    tol: float | None = None


def relative_defect(a, b) -> float:
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    if a.size == 0:
        return 0.0
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b))) / scale


def _rng(seed: int, check: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(zlib.crc32(check.encode()),)))


class _Suite:
    """Collects checks; each one maps ``(rng, samples)`` to a list of defects."""

    def __init__(self, cfg: SuiteConfig):
        self.cfg = cfg
        self.reports: list[CheckReport] = []

    def run(self, check: str, anchor: str, tol_key: str, body: Callable, samples: int | None = None,
            control: bool = False):
        k = self.cfg.samples if samples is None else samples
        tol = self.cfg.tol if self.cfg.tol is not None else DEFAULT_TOL[tol_key]
        t0 = time.perf_counter()
        defects = list(body(_rng(self.cfg.seed, check), k)) if k > 0 else []
        worst = float(max(defects)) if defects else 0.0
        if control:
            ok = worst > CONTROL_THRESHOLD
            tol = CONTROL_THRESHOLD
        else:
            ok = bool(np.isfinite(worst) and worst <= tol)
        self.reports.append(CheckReport(check, anchor, k, self.cfg.seed, worst, tol, ok,
                                        "control" if control else "identity", time.perf_counter() - t0))


# ---------------------------------------------------------------------------
# suites


def _suite_group(s: _Suite):
    n, m = s.cfg.n, s.cfg.m
    rj = lambda rng: grp.random_jacobi(rng, 0.5, n, m)  # noqa: E731

    def assoc(rng, k):
        for _ in range(k):
            a, b, c = rj(rng), rj(rng), rj(rng)
            yield relative_defect(grp.embed_sp_mn(grp.group_mul(grp.group_mul(a, b), c)),
                                  grp.embed_sp_mn(grp.group_mul(a, grp.group_mul(b, c))))

    def ident(rng, k):
        e = grp.identity(n, m)
        for _ in range(k):
            g = rj(rng)
            E = grp.embed_sp_mn(g)
            yield max(relative_defect(grp.embed_sp_mn(grp.group_mul(e, g)), E),
                      relative_defect(grp.embed_sp_mn(grp.group_mul(g, e)), E),
                      relative_defect(grp.embed_sp_mn(grp.group_mul(g, grp.group_inverse(g))),
                                      grp.embed_sp_mn(e)))

    def action(rng, k):
        for _ in range(k):
            a, b = rj(rng), rj(rng)
            p = grp.random_hpoint(rng, n, m)
            lhs = grp.act_H(grp.group_mul(a, b), p)
            rhs = grp.act_H(a, grp.act_H(b, p))
            yield max(relative_defect(lhs.Omega, rhs.Omega), relative_defect(lhs.Z, rhs.Z))

    def embed(rng, k):
        for _ in range(k):
            a, b = rj(rng), rj(rng)
            yield relative_defect(grp.embed_sp_mn(grp.group_mul(a, b)), grp.embed_sp_mn(a) @ grp.embed_sp_mn(b))

    s.run("group.associativity", "group law", "group", assoc)
    s.run("group.identity_inverse", "group law", "group", ident)
    s.run("group.action_composition", "action on the upper half space", "group", action)
    s.run("group.embedding_homomorphism", "embedding into Sp(m+n)", "group", embed)


def _suite_cayley(s: _Suite):
    n, m = s.cfg.n, s.cfg.m

    def roundtrip(rng, k):
        for _ in range(k):
            p = grp.random_dpoint(rng, n, m)
            q = grp.random_hpoint(rng, n, m)
            back = grp.cayley_inv(grp.cayley(p))
            fwd = grp.cayley(grp.cayley_inv(q))
            yield max(relative_defect(back.W, p.W), relative_defect(back.eta, p.eta),
                      relative_defect(fwd.Omega, q.Omega), relative_defect(fwd.Z, q.Z))

    def equivariance(rng, k):
        for _ in range(k):
            g = grp.random_jacobi(rng, 0.5, n, m)
            p = grp.random_dpoint(rng, n, m)
            lhs = grp.cayley(grp.act_D(grp.to_star(g), p))
            rhs = grp.act_H(g, grp.cayley(p))
            yield max(relative_defect(lhs.Omega, rhs.Omega), relative_defect(lhs.Z, rhs.Z))

    def star_hom(rng, k):
        for _ in range(k):
            a, b = grp.random_jacobi(rng, 0.5, n, m), grp.random_jacobi(rng, 0.5, n, m)
            x = grp.to_star(grp.group_mul(a, b))
            y = grp.star_mul(grp.to_star(a), grp.to_star(b))
            yield max(relative_defect(x.P, y.P), relative_defect(x.Q, y.Q),
                      relative_defect(x.xi, y.xi), relative_defect(x.kappa, y.kappa))

    s.run("cayley.roundtrip", "partial Cayley transform and its inverse", "cayley", roundtrip)
    s.run("cayley.equivariance", "Cayley transform intertwines the two actions", "cayley", equivariance)
    s.run("cayley.star_homomorphism", "conjugated group law", "cayley", star_hom)


def _suite_polys(s: _Suite):
    n, m = s.cfg.n, s.cfg.m
    polys = catalog(n, m)

    def invariance(rng, k):
        for P in polys:
            yield check_u_invariance(P, n, m, samples=k, seed=rng, tol=np.inf).max_defect

    def control(rng, k):
        yield check_u_invariance(non_invariant_control(), n, max(m, 1), samples=k, seed=rng, tol=np.inf).max_defect

    def rank(rng, k):
        qs = [InvariantPolynomial("q", (j,)) for j in range(1, n + 1)]
        for _ in range(k):
            yield float(abs(jacobian_rank(qs, random_tpoint(rng, n, m)) - n))

    s.run("polys.u_invariance", f"catalog of {len(polys)} invariant polynomials", "polys", invariance)
    s.run("polys.non_invariant_control", "non-invariant polynomial is rejected", "polys", control, control=True)
    if n <= 3:
        s.run("polys.q_independence", "Jacobian rank of q_1..q_n equals n", "polys", rank,
              samples=min(s.cfg.samples, 20))


def _metric_invariance(metric, frame):
    def body(rng, k):
        for _ in range(k):
            g = frame.random_group_element(rng)
            p = frame.random_point(rng)
            pulled = pullback(metric, lambda X: frame.act_coords(g, X), p)
            yield relative_defect(pulled, metric(p))
    return body


def _suite_metrics(s: _Suite):
    n, m = s.cfg.n, s.cfg.m
    H, HC, D = CoordFrame("H", n), CoordFrame("HC", n, m), CoordFrame("D", n, m)
    s.run("metrics.H_invariance", "invariant metric on H_n", "metrics", _metric_invariance(metric_H(n, 1.3), H))
    s.run("metrics.HC_invariance", "invariant metric on H_{n,m}", "metrics",
          _metric_invariance(metric_HC(n, m, 1.3, 0.7), HC))
    s.run("metrics.D_invariance", "invariant metric on the disk model", "metrics",
          _metric_invariance(metric_D(n, m, 1.3, 0.7), D))

    def cayley_pb(rng, k):
        g, phi = metric_HC(n, m, 1.3, 0.7), cayley_coords(n, m)
        gd = metric_D(n, m, 1.3, 0.7)
        for _ in range(k):
            p = D.random_point(rng)
            yield relative_defect(pullback(g, phi, p), gd(p))

    s.run("metrics.cayley_pullback", "disk metric is the Cayley pullback", "metrics", cayley_pb)
    if (n, m) == (1, 1):
        def closed(rng, k):
            ref, alt = metric_D(1, 1), metric_D11_closed_form()
            for _ in range(k):
                p = D.random_point(rng)
                yield relative_defect(ref(p), alt(p))
        s.run("metrics.disk_closed_form", "n = m = 1 disk metric in scalar form", "closed_form", closed)

    def lb(metric, op, frame):
        lib = standard_library(frame)

        def body(rng, k):
            for i in range(k):
                p = frame.random_point(rng)
                f = lib[i % len(lib)]
                yield relative_defect(laplace_beltrami(metric, f, p), apply_at(op, frame, f, p))
        return body

    s.run("metrics.laplacian_H", "Laplacian on H_n", "laplacian", lb(metric_H(n, 1.3), build_operator("Delta_H", n, A=1.3), H))
    s.run("metrics.laplacian_HC", "Laplacian on H_{n,m}", "laplacian",
          lb(metric_HC(n, m, 1.3, 0.7), build_operator("Delta_HC", n, m, 1.3, 0.7), HC))
    s.run("metrics.laplacian_D", "Laplacian on the disk model", "laplacian",
          lb(metric_D(n, m, 1.3, 0.7), build_operator("Delta_D", n, m, 1.3, 0.7), D))


def _invariance_body(op, frame, lib=None):
    lib = lib or standard_library(frame)

    def body(rng, k):
        for i in range(k):
            g = frame.random_group_element(rng)
            p = frame.random_point(rng)
            yield relative_defect(*invariance_pair(op, frame, g, lib[i % len(lib)], p))
    return body


def _entries(op):
    if isinstance(op, OpMatrix):
        return [(f"[{i + 1},{j + 1}]", op[i, j]) for i in range(op.shape[0]) for j in range(op.shape[1])]
    return [("", op)]


def _matrix_invariance_body(op: OpMatrix, frame):
    lib = standard_library(frame)

    def body(rng, k):
        for i in range(k):
            g = frame.random_group_element(rng)
            p = frame.random_point(rng)
            f = lib[i % len(lib)]
            yield max(relative_defect(*invariance_pair(e, frame, g, f, p)) for _, e in _entries(op))
    return body


def operator_list(n: int, m: int) -> list[tuple[str, str]]:
    """``(name, model)`` of every invariant operator exercised at size ``(n, m)``."""
    names = [("Delta_H", "H")]
    if m >= 1:
        names += [(x, "HC") for x in ("M1", "M2", "Delta_HC", "K", "T")]
        names += [(x, "D") for x in ("S1", "S2", "Delta_D", "K_D", "T_D")]
    if (n, m) == (1, 1):
        names += [(x, "HC") for x in ("D1", "D2", "D3", "D4")]
    return names


def _suite_operators(s: _Suite):
    n, m = s.cfg.n, s.cfg.m
    for name, model in operator_list(n, m):
        frame = CoordFrame(model, n, m if model != "H" else 0)
        op = build_operator(name, n, frame.m, A=1.3, B=0.7)
        body = _matrix_invariance_body(op, frame) if isinstance(op, OpMatrix) else _invariance_body(op, frame)
        s.run(f"operators.invariance.{name}", "invariant differential operator", "operators", body)
    if m < 1:
        return
    HC, D = CoordFrame("HC", n, m), CoordFrame("D", n, m)
    s.run("operators.broken_control", "M2 with a cross term removed is not invariant", "operators",
          _invariance_body(build_operator("M2_broken", n, m), HC), control=True)

    def intertwine(rng, k):
        phi = cayley_coords(n, m)
        lib = standard_library(HC)
        pairs = [("K", "K_D", 4.0 ** -n), ("T", "T_D", 0.25), ("Delta_HC", "Delta_D", 1.0)]
        ops = [(build_operator(a, n, m), build_operator(b, n, m), c) for a, b, c in pairs]
        for i in range(k):
            p = D.random_point(rng)
            f = lib[i % len(lib)]
            for oh, od, c in ops:
                for (_, eh), (_, ed) in zip(_entries(oh), _entries(od)):
                    yield relative_defect(apply_at(eh, HC, f, phi(p)),
                                          c * apply_at(ed, D, lambda X: f(phi(X)), p))

    s.run("operators.cayley_intertwining", "upper half space and disk operators correspond", "operators", intertwine)
    if n == 1:
        def termwise(rng, k):
            lib_h, lib_d = standard_library(HC), standard_library(D)
            pairs = [(build_operator("M2", 1, m), build_operator("M2_termwise", 1, m), HC, lib_h),
                     (build_operator("S2", 1, m), build_operator("S2_termwise", 1, m), D, lib_d)]
            for i in range(k):
                for a, b, fr, lib in pairs:
                    p = fr.random_point(rng)
                    f = lib[i % len(lib)]
                    yield relative_defect(apply_at(a, fr, f, p), apply_at(b, fr, f, p))
        s.run("operators.termwise_forms_n1", "term-by-term cross operators agree at n = 1", "operators", termwise)
    if (n, m) == (1, 1):
        def identities(rng, k):
            ops = {x: build_operator(x, 1, 1) for x in ("M1", "D1", "D2", "Delta_HC", "K")}
            lib = standard_library(HC)
            for i in range(k):
                p = HC.random_point(rng)
                f = lib[i % len(lib)]
                v = {x: apply_at(o, HC, f, p) for x, o in ops.items()}
                yield max(relative_defect(v["M1"], v["D2"] / 4), relative_defect(v["Delta_HC"], v["D1"] + v["D2"]),
                          relative_defect(v["K"], v["M1"]))
        s.run("operators.n1m1_identities", "M1 = D2/4, Laplacian = D1 + D2, K = M1", "operators", identities)


def _suite_maass(s: _Suite):
    n = s.cfg.n
    H = CoordFrame("H", n)
    jmax = min(n, 2)
    ms = maass_generators(n, jmax)
    lib = standard_library(H)

    def h1(rng, k):
        delta = build_operator("Delta_H", n)
        for i in range(k):
            p = H.random_point(rng)
            f = lib[i % len(lib)]
            yield relative_defect(apply_at(ms.H[0], H, f, p), -apply_at(delta, H, f, p))

    s.run("maass.H1_is_minus_laplacian", "first Maass operator is minus the Laplacian", "maass_identity", h1)
    for j in range(1, jmax + 1):
        s.run(f"maass.H{j}_invariance", "Maass operators are invariant", "maass",
              _invariance_body(ms.H[j - 1], H, lib))


def explicit_example_operator() -> CoeffMul:
    """``4 y^2 (d_x^2 + d_y^2)`` on ``H_1``."""
    x, y = Partial(0, "x11"), Partial(1, "y11")
    return CoeffMul(Coeff("4y^2", lambda ev, o: ev.coords(o)[1] * ev.coords(o)[1] * 4.0), x @ x + y @ y)


def _pair_body(op_a, op_b, frame, scale: float = 1.0):
    lib = standard_library(frame)

    def body(rng, k):
        for i in range(k):
            p = frame.random_point(rng)
            f = lib[i % len(lib)]
            yield relative_defect(apply_at(op_a, frame, f, p), scale * apply_at(op_b, frame, f, p))
    return body


def correspond_polys(n: int, m: int) -> list:
    """Small invariant polynomials whose operators are swept at size ``(n, m)``."""
    out = [InvariantPolynomial("q", (1,))]
    if m >= 1:
        out += [InvariantPolynomial("psi1", (1,)), InvariantPolynomial("f1", (1, 1)),
                InvariantPolynomial("f2", (1, 1))]
        if n * (n + 1) + 2 * m * n <= 8:
            out.append(InvariantPolynomial("r1", (1, 1)))
    return out


def _suite_correspond(s: _Suite):
    n, m = s.cfg.n, s.cfg.m
    if n == 1:
        H1 = CoordFrame("H", 1)
        s.run("correspond.phi_q_example", "operator of tr(w w*) on H_1 is 4y^2 times the flat Laplacian",
              "correspond", _pair_body(poly_to_op_H(example_polynomial("q1"), 1), explicit_example_operator(), H1))
    if (n, m) == (1, 1):
        HC = CoordFrame("HC", 1, 1)
        theta = {x: poly_to_op_HC(example_polynomial(x), 1, 1) for x in ("q", "xi", "phi", "psi")}
        for poly, dname in (("q", "D1"), ("xi", "D2"), ("phi", "D3"), ("psi", "D4")):
            s.run(f"correspond.{dname}", f"operator of {poly} is {dname}", "correspond",
                  _pair_body(theta[poly], build_operator(dname, 1, 1), HC))
        comm = commutator(theta["q"], theta["xi"])
        s.run("correspond.commutator", "[D1, D2] matches its closed form", "correspond",
              _pair_body(comm, build_operator("[D1,D2]", 1, 1), HC))

        def noncommuting(rng, k):
            lib = standard_library(HC)
            op = commutator(build_operator("D1", 1, 1), build_operator("D2", 1, 1))
            for i in range(k):
                yield abs(apply_at(op, HC, lib[i % len(lib)], HC.random_point(rng)))
        s.run("correspond.noncommutative", "D1 and D2 do not commute", "correspond", noncommuting, control=True)
    frame = CoordFrame("HC", n, m) if m else CoordFrame("H", n)
    to_op = (lambda P: poly_to_op_HC(P, n, m)) if m else (lambda P: poly_to_op_H(P, n))
    for P in correspond_polys(n, m):
        s.run(f"correspond.invariance.{P.name}", "operators built from invariant polynomials are invariant",
              "operators", _invariance_body(to_op(P), frame))

    def basis_free(rng, k):
        lib = standard_library(frame)
        alt = standard_pbasis(n, m, orthonormal=False)
        P = correspond_polys(n, m)[-1]
        for i in range(k):
            p = frame.random_point(rng)
            F = lib[i % len(lib)](frame.variables(p, P.degree))
            yield relative_defect(correspondence_value(P, frame, F, p).value,
                                  correspondence_value(P, frame, F, p, basis=alt).value)

    def coset_free(rng, k):
        lib = standard_library(frame)
        P = correspond_polys(n, m)[-1]
        for i in range(k):
            p = frame.random_point(rng)
            g = grp.coset_representative(frame.to_point(p))
            gk = grp.group_mul(g, grp.random_stabilizer(rng, n, m))
            F = lib[i % len(lib)](frame.variables(p, P.degree))
            yield relative_defect(correspondence_value(P, frame, F, p, g=g).value,
                                  correspondence_value(P, frame, F, p, g=gk).value)

    s.run("correspond.basis_independence", "result does not depend on the tangent basis", "correspond", basis_free)
    s.run("correspond.coset_independence", "result does not depend on the coset representative", "correspond",
          coset_free)


SUITES = {
    "group": _suite_group,
    "cayley": _suite_cayley,
    "polys": _suite_polys,
    "metrics": _suite_metrics,
    "operators": _suite_operators,
    "maass": _suite_maass,
    "correspond": _suite_correspond,
}


def run_suite(suite: str, n: int = 1, m: int = 1, seed: int = 0, samples: int = 50,
              tol: float | None = None) -> list[CheckReport]:
    """Run one named suite and return its reports (empty when ``samples == 0``)."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    if n < 1 or m < 0 or samples < 0:
        raise ValueError("need n >= 1, m >= 0 and samples >= 0")
    if n > 3 or m > 3:
        raise ValueError("sizes above 3 are outside the supported range")
    if samples == 0:
        return []
    s = _Suite(SuiteConfig(n, m, seed, samples, tol))
    SUITES[suite](s)
    return s.reports


def report_json(command: str, seed: int, reports: list[CheckReport]) -> str:
    return json.dumps({"version": __version__, "command": command, "seed": seed,
                       "checks": [r.to_dict() for r in reports]}, indent=2)
