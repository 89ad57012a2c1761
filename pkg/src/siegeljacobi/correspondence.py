"""From invariant polynomials to invariant differential operators.

For a polynomial ``P`` on the tangent space at the base point, the operator
acts on ``f`` at ``p = g . base`` by differentiating the function
``t -> f(g exp(sum t_a eta_a) . base)`` with ``P(d/dt)``.  The polynomial is
first pulled back along the inner-product identification of the tangent space
with its dual, so the result does not depend on the basis ``eta``.

Everything is carried out on jets: the exponential is a jet matrix
exponential, the action uses jet inverses, and ``f`` enters through its Taylor
jet at ``p``.  When the caller needs the output as a jet of positive order
(for composing operators), the representative ``g`` itself is expanded around
``p`` and the ``t``-derivatives are taken in a joint jet.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from math import factorial

import numpy as np

from . import groups as grp
from .diffops import EvalContext, FuncOp, LinOp
from .frames import CoordFrame
from .invariants import InvariantPolynomial, TPolynomial, check_u_invariance
from .jetring import Jet, JetContext, compose, variables
from .testfunctions import standard_library

__all__ = [
    "PBasis",
    "standard_pbasis",
    "NonInvariantPolynomial",
    "poly_to_op_H",
    "poly_to_op_HC",
    "correspondence_value",
    "OpFingerprint",
    "fingerprint",
    "fit_constant",
    "sample_pairs",
    "conjecture_probe",
    "fit_combination",
]


class NonInvariantPolynomial(ValueError):
    """The polynomial is not U(n)-invariant, so it does not define an invariant operator."""


# ---------------------------------------------------------------------------
# tangent-space bases


@dataclass(frozen=True)
class PBasis:
    """Basis of the tangent directions at the base point.

    ``omega[a]`` and ``z[a]`` are the images of ``algebra[a]`` in ``T_n`` and
    ``C^(m,n)``; the real inner product is ``Re tr(w w'^*) + Re tr(z z'^*)``.
    """

    n: int
    m: int
    algebra: tuple = field(repr=False)
    omega: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)
    labels: tuple = ()

    @property
    def N(self) -> int:
        return len(self.algebra)

    @cached_property
    def gram(self) -> np.ndarray:
        om = self.omega.reshape(self.N, -1)
        zz = self.z.reshape(self.N, -1)
        return np.real(om @ om.conj().T + zz @ zz.conj().T)

    @cached_property
    def dual(self) -> tuple[np.ndarray, np.ndarray]:
        """Images of the dual basis: ``sum_b gram^-1_ab (omega_b, z_b)``."""
        Gi = np.linalg.inv(self.gram)
        return np.tensordot(Gi, self.omega, axes=1), np.tensordot(Gi, self.z, axes=1)

    def element(self, t) -> grp.JacobiAlgebraElement:
        """``sum_a t_a eta_a`` for numeric or jet coefficients ``t``."""
        n, m = self.n, self.m
        X = sum((self.algebra[a].X * t[a] for a in range(self.N)), np.zeros((2 * n, 2 * n)))
        lam = sum((self.algebra[a].lam * t[a] for a in range(self.N)), np.zeros((m, n)))
        mu = sum((self.algebra[a].mu * t[a] for a in range(self.N)), np.zeros((m, n)))
        return grp.JacobiAlgebraElement(X, lam, mu, np.zeros((m, m)))


def _sym_basis(n: int, orthonormal: bool):
    out = []
    for i in range(n):
        for j in range(i, n):
            S = np.zeros((n, n))
            S[i, j] = S[j, i] = 1.0
            if i != j and orthonormal:
                S /= np.sqrt(2.0)
            out.append(((i, j), S))
    return out


def standard_pbasis(n: int, m: int = 0, orthonormal: bool = True, z_phase: complex = 1j) -> PBasis:
    """Symmetric elementary matrices for the ``X`` and ``Y`` blocks, elementary matrices for ``lam, mu``.

    ``X`` directions map to ``S``, ``Y`` directions to ``iS``; the Heisenberg
    direction ``(lam, mu)`` maps to ``z_phase * (lam + i mu)``.
    """
    alg, om, zz, labels = [], [], [], []
    Zmn, Znn = np.zeros((m, n)), np.zeros((n, n))
    for (i, j), S in _sym_basis(n, orthonormal):
        for kind, X, image in (("x", np.block([[S, Znn], [Znn, -S]]), S),
                               ("y", np.block([[Znn, S], [S, Znn]]), 1j * S)):
            alg.append(grp.JacobiAlgebraElement(X, Zmn, Zmn, np.zeros((m, m))))
            om.append(image)
            zz.append(np.zeros((m, n), dtype=complex))
            labels.append(f"{kind}{i + 1}{j + 1}")
    for k in range(m):
        for l in range(n):
            E = np.zeros((m, n))
            E[k, l] = 1.0
            for kind, lam, mu, image in (("lam", E, Zmn, z_phase * E), ("mu", Zmn, E, z_phase * 1j * E)):
                alg.append(grp.JacobiAlgebraElement(np.zeros((2 * n, 2 * n)), lam, mu, np.zeros((m, m))))
                om.append(np.zeros((n, n), dtype=complex))
                zz.append(image.astype(complex))
                labels.append(f"{kind}{k + 1}{l + 1}")
    N = len(alg)
    return PBasis(n, m, tuple(alg), np.array(om, dtype=complex).reshape(N, n, n),
                  np.array(zz, dtype=complex).reshape(N, m, n), tuple(labels))


# ---------------------------------------------------------------------------
# the map itself


def _derivative_weights(P: TPolynomial, basis: PBasis):
    """``{multi-index beta: coefficient of d^beta}`` for ``P(d/dt)``, pulled through the duality."""
    d = P.degree
    N = basis.N
    ctx = JetContext.anonymous(N, d, "t")
    om_d, z_d = basis.dual
    c_om = np.zeros((basis.n, basis.n, ctx.size), dtype=complex)
    c_z = np.zeros((basis.m, basis.n, ctx.size), dtype=complex)
    if d >= 1:
        c_om[..., 1 : 1 + N] = np.moveaxis(om_d, 0, -1)
        c_z[..., 1 : 1 + N] = np.moveaxis(z_d, 0, -1)
    val = P.evaluate(Jet(ctx, c_om), Jet(ctx, c_z))
    coeffs = np.real(val.c) if isinstance(val, Jet) else np.r_[np.real(val), np.zeros(ctx.size - 1)]
    return ctx, coeffs


def _check_invariant(P: TPolynomial, n: int, m: int) -> None:
    rep = check_u_invariance(P, n, m, samples=8, seed=12345, tol=1e-8)
    if not rep.passed:
        raise NonInvariantPolynomial(f"{P.name} is not U({n})-invariant (defect {rep.max_defect:.3g})")


def _orbit_coords(frame: CoordFrame, g, basis: PBasis, t: Jet):
    """Frame coordinates of ``g exp(sum t eta) . base`` as a jet."""
    e = grp.jacobi_exp(basis.element(t))
    ge = grp.group_mul(g, e)
    base = grp.base_point(frame.n, frame.m)
    return frame.from_point(grp.act_H(ge, base))


def _contract(J: Jet, weights: np.ndarray, tctx: JetContext, nfree: int):
    """Apply ``sum_beta w_beta beta! d_t^beta`` at ``t = 0`` to a joint jet in ``(s, t)``."""
    tex = tctx.exponents
    facts = np.array([np.prod([factorial(int(e)) for e in row]) for row in tex], dtype=float)
    nz = np.nonzero(weights)[0]
    out_order = J.order - tctx.order
    sctx = JetContext.anonymous(nfree, out_order, "s") if nfree else None
    if not nfree:
        total = 0.0
        for r in nz:
            total += weights[r] * facts[r] * J.c[J.ctx.rank(tuple(tex[r]))]
        return total
    s_ex = sctx.exponents
    res = np.zeros(sctx.size, dtype=complex)
    for r in nz:
        idx = [J.ctx.rank(tuple(np.r_[s_row, tex[r]])) for s_row in s_ex]
        res += weights[r] * facts[r] * J.c[idx]
    return res


def correspondence_value(P: TPolynomial, frame: CoordFrame, F: Jet, p, basis: PBasis | None = None,
                         g=None, check: bool = True) -> Jet:
    """Jet of ``(Op(P) f)`` at ``p`` from the jet ``F`` of ``f`` (order ``>= deg P``).

    ``g`` overrides the coset representative (only for order-0 output); any
    ``g`` with ``g . base = p`` must give the same value.
    """
    n, m = frame.n, frame.m
    basis = basis or standard_pbasis(n, m)
    if check:
        _check_invariant(P, n, m)
    tctx, weights = _derivative_weights(P, basis)
    d = tctx.order
    out_order = F.order - d
    if out_order < 0:
        raise ValueError(f"jet order {F.order} is below the polynomial degree {d}")
    p = np.asarray(p, dtype=float)
    if out_order == 0:
        if g is None:
            g = grp.coset_representative(frame.to_point(p))
        t = variables(tctx, np.zeros(basis.N))
        x = _orbit_coords(frame, g, basis, t)
        J = compose(F, x)
        val = _contract(J, weights, tctx, 0)
        return Jet.const(F.ctx.truncated(0), val)
    if g is not None:
        raise ValueError("an explicit representative only makes sense for order-0 output")
    k = frame.dim
    joint = JetContext(tuple(frame.names) + tuple(f"t_{a}" for a in range(basis.N)), F.order)
    V = variables(joint, np.r_[p, np.zeros(basis.N)])
    g = grp.coset_representative(frame.to_point(V[:k]))
    x = _orbit_coords(frame, g, basis, V[k:])
    J = compose(F, x)
    coeffs = _contract(J, weights, tctx, k)
    return Jet(F.ctx.truncated(out_order), coeffs)


def _poly_op(P: TPolynomial, frame: CoordFrame, basis: PBasis | None, label: str) -> LinOp:
    _check_invariant(P, frame.n, frame.m)
    basis = basis or standard_pbasis(frame.n, frame.m)

    def run(ev: EvalContext, F: Jet) -> Jet:
        return correspondence_value(P, frame, F, ev.point, basis, check=False)

    return FuncOp(P.degree, run, f"{label}({P.name})")


def poly_to_op_H(P: TPolynomial, n: int, basis: PBasis | None = None) -> LinOp:
    """Invariant operator on ``H_n`` attached to a U(n)-invariant polynomial on ``T_n``."""
    if n > 2 or P.degree > 4:
        raise ValueError("poly_to_op_H is limited to n <= 2 and degree <= 4")
    return _poly_op(P, CoordFrame("H", n), basis, "Phi")


def poly_to_op_HC(P: TPolynomial, n: int, m: int, basis: PBasis | None = None) -> LinOp:
    """Invariant operator on ``H_{n,m}`` attached to a U(n)-invariant polynomial on ``T_{n,m}``."""
    if n > 2 or m > 2 or P.degree > 4:
        raise ValueError("poly_to_op_HC is limited to n, m <= 2 and degree <= 4")
    return _poly_op(P, CoordFrame("HC", n, m), basis, "Theta")


# ---------------------------------------------------------------------------
# fingerprints and fits


@dataclass(frozen=True)
class OpFingerprint:
    """Coefficients of ``d^alpha`` at ``basepoint`` for ``|alpha| <= maxdeg``."""

    basepoint: tuple
    maxdeg: int
    names: tuple
    table: dict

    def vector(self) -> np.ndarray:
        return np.array(list(self.table.values()))

    def to_json(self) -> str:
        rows = [{"index": list(k), "re": float(np.real(v)), "im": float(np.imag(v))}
                for k, v in self.table.items()]
        return json.dumps({"basepoint": list(self.basepoint), "maxdeg": self.maxdeg,
                           "coordinates": list(self.names), "table": rows}, indent=2)


def fingerprint(op: LinOp, frame: CoordFrame, basepoint, maxdeg: int | None = None) -> OpFingerprint:
    """Apply ``op`` to every centred monomial ``(x - p)^alpha`` and divide by ``alpha!``."""
    maxdeg = op.degree if maxdeg is None else maxdeg
    if maxdeg < op.degree:
        raise ValueError("maxdeg must be at least the operator degree")
    p = np.asarray(basepoint, dtype=float)
    ctx = frame.context(maxdeg)
    ev = EvalContext(frame, p)
    table = {}
    for r, alpha in enumerate(ctx.exponents):
        c = np.zeros(ctx.size, dtype=complex)
        c[r] = 1.0
        val = complex(op.apply(ev, Jet(ctx, c)).value)
        fac = float(np.prod([factorial(int(a)) for a in alpha]))
        table[tuple(int(a) for a in alpha)] = val / fac
    return OpFingerprint(tuple(float(v) for v in p), maxdeg, tuple(frame.names), table)


def sample_pairs(frame: CoordFrame, samples: int, seed=0, spread: float = 0.5):
    """``(f, p)`` pairs cycling through the standard library at seeded random points."""
    rng = np.random.default_rng(seed)
    lib = standard_library(frame)
    return [(lib[i % len(lib)], frame.random_point(rng, spread)) for i in range(samples)]


def fit_constant(op1: LinOp, op2: LinOp, frame: CoordFrame, pairs) -> tuple[float, float]:
    """Least-squares ``c`` with ``op1 f(p) ~ c op2 f(p)``; rows are scaled to comparable size.

    Returns ``(c, residual)`` with the residual relative to the weighted norm of ``op1``.
    """
    from .diffops import apply_at

    a = np.array([apply_at(op1, frame, f, p) for f, p in pairs])
    b = np.array([apply_at(op2, frame, f, p) for f, p in pairs])
    if not len(b) or np.max(np.abs(b)) == 0:
        raise ValueError("the reference operator vanishes on every sample")
    scale = np.maximum(np.abs(a), np.abs(b))
    # rows where both operators vanish to roundoff carry no information
    w = np.where(scale > 1e-9 * scale.max(), 1.0 / np.maximum(scale, 1e-300), 0.0)
    aw, bw = a * w, b * w
    c = float(np.real(np.vdot(bw, aw) / np.vdot(bw, bw)))
    denom = np.linalg.norm(aw)
    resid = float(np.linalg.norm(aw - c * bw) / denom) if denom > 0 else float(np.linalg.norm(c * bw))
    return c, resid


def fit_combination(op: LinOp, basis_ops, frame: CoordFrame, pairs) -> tuple[np.ndarray, float]:
    """Least-squares ``c`` with ``op f(p) ~ sum_k c_k basis_ops[k] f(p)``, rows scaled as in :func:`fit_constant`."""
    from .diffops import apply_at

    a = np.array([apply_at(op, frame, f, p) for f, p in pairs])
    B = np.array([[apply_at(b, frame, f, p) for b in basis_ops] for f, p in pairs]).reshape(len(pairs), -1)
    scale = np.maximum(np.abs(a), np.max(np.abs(B), axis=1))
    w = np.where(scale > 1e-9 * scale.max(), 1.0 / np.maximum(scale, 1e-300), 0.0)
    Bw = np.vstack([(B * w[:, None]).real, (B * w[:, None]).imag])
    aw = np.r_[(a * w).real, (a * w).imag]
    c, *_ = np.linalg.lstsq(Bw, aw, rcond=None)
    denom = np.linalg.norm(aw)
    return c, float(np.linalg.norm(aw - Bw @ c) / denom) if denom > 0 else 0.0


def conjecture_probe(n: int, j: int, samples: int = 40, seed: int = 0) -> dict:
    """Fit the operator of ``tr((w w^*)^j)`` against the Maass operator ``H_j``.

    Also reports the best combination of ``H_1 .. H_j``, which shows how far the
    single-constant relation misses when it does.
    """
    from .diffops import maass_generators

    if not 1 <= j <= n:
        raise ValueError("need 1 <= j <= n")
    frame = CoordFrame("H", n)
    op1 = poly_to_op_H(InvariantPolynomial("q", (j,)), n)
    ms = maass_generators(n, j)
    pairs = sample_pairs(frame, samples, seed)
    c, resid = fit_constant(op1, ms.H[j - 1], frame, pairs)
    comb, comb_resid = fit_combination(op1, ms.H[:j], frame, pairs)
    return {"n": n, "j": j, "c_j": c, "residual": resid,
            "combination": {f"H{k + 1}": float(v) for k, v in enumerate(comb)},
            "combination_residual": comb_resid, "samples": samples, "seed": seed}
