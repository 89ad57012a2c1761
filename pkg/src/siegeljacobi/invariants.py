"""Polynomials on ``T_{n,m}`` and the catalog of unitary invariants.

A point of ``T_{n,m}`` is a pair ``(omega, z)`` with ``omega`` complex
symmetric ``n x n`` and ``z`` complex ``m x n``; ``u`` in ``U(n)`` acts by
``(u omega u^T, z u^T)``.  Every polynomial here evaluates on numpy arrays and
on jet matrices, which is how Jacobians and the polynomial-to-operator
construction get their exact derivatives.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import _generic as G
from .jetring import Jet, JetContext, variables

__all__ = [
    "TPoint",
    "UnitaryMatrix",
    "TPolynomial",
    "InvariantPolynomial",
    "NamedPolynomial",
    "LinearCombination",
    "FAMILIES",
    "u_act",
    "eval_invariant",
    "check_u_invariance",
    "InvarianceReport",
    "jacobian_rank",
    "graded_dimension_estimate",
    "catalog",
    "catalog_json",
    "example_polynomial",
    "non_invariant_control",
    "random_tpoint",
    "random_unitary",
    "s_probes",
]


# ---------------------------------------------------------------------------
# points and the unitary action


@dataclass(frozen=True)
class TPoint:
    omega: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        om = np.asarray(self.omega, dtype=complex)
        z = np.asarray(self.z, dtype=complex)
        if om.ndim != 2 or om.shape[0] != om.shape[1] or z.ndim != 2 or z.shape[1] != om.shape[0]:
            raise ValueError("TPoint blocks have inconsistent shapes")
        object.__setattr__(self, "omega", (om + om.T) / 2)
        object.__setattr__(self, "z", z)

    @property
    def n(self) -> int:
        return self.omega.shape[0]

    @property
    def m(self) -> int:
        return self.z.shape[0]


@dataclass(frozen=True)
class UnitaryMatrix:
    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=complex)
        object.__setattr__(self, "u", u)
        if np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) > 1e-10:
            raise ValueError("matrix is not unitary")


def u_act(u: UnitaryMatrix, p: TPoint) -> TPoint:
    uu = u.u if isinstance(u, UnitaryMatrix) else np.asarray(u)
    if uu.shape[0] != p.n:
        raise ValueError("unitary matrix and point have different n")
    return TPoint(uu @ p.omega @ uu.T, p.z @ uu.T)


def random_unitary(rng, n: int) -> UnitaryMatrix:
    H = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return UnitaryMatrix(scipy.linalg.expm(1j * (H + H.conj().T) / 2))


def random_tpoint(rng, n: int, m: int) -> TPoint:
    om = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    z = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
    return TPoint(om, z)


# ---------------------------------------------------------------------------
# polynomials


class TPolynomial:
    """A real-valued polynomial on ``T_{n,m}`` with a known degree.

    Subclasses provide ``name``, ``degree`` and :meth:`evaluate`.
    """

    def evaluate(self, omega, z):  # pragma: no cover - interface
        raise NotImplementedError

    def __call__(self, p: TPoint) -> float:
        return float(np.real(self.evaluate(p.omega, p.z)))

    def magnitude(self, p: TPoint) -> float:
        """Size of the computation at ``p``; the yardstick for roundoff in invariance checks."""
        return abs(self(p))

    def __mul__(self, c):
        return LinearCombination(((float(c), self),))

    __rmul__ = __mul__

    def __add__(self, other):
        return LinearCombination(((1.0, self), (1.0, other)))

    def __sub__(self, other):
        return LinearCombination(((1.0, self), (-1.0, other)))


@dataclass(frozen=True)
class NamedPolynomial(TPolynomial):
    name: str
    fn: object = field(compare=False)
    degree: int = 0

    def evaluate(self, omega, z):
        return self.fn(omega, z)


@dataclass(frozen=True)
class LinearCombination(TPolynomial):
    terms: tuple

    @property
    def name(self) -> str:
        return " + ".join(f"{c:g}*{p.name}" for c, p in self.terms)

    @property
    def degree(self) -> int:
        return max(p.degree for _, p in self.terms)

    def evaluate(self, omega, z):
        out = None
        for c, p in self.terms:
            v = p.evaluate(omega, z) * c
            out = v if out is None else out + v
        return out


def _gram(omega):
    return omega @ omega.conj()


def _zsz(z, S):
    return z.T @ S @ z.conj() if S is not None else z.T @ z.conj()


def _rect_entry(M, k, p):
    return M[k, p]


def _part(v, which: str):
    return v.real if which == "re" else v.imag


_IMAGINARY = frozenset({"psi3", "f2", "m2", "qS2", "theta2", "r2"})

# family -> (index names, takes an S parameter)
FAMILIES = {
    "q": (("j",), False),
    "p": (("j",), False),
    "psi1": (("k",), False),
    "psi2": (("k", "p"), False),
    "psi3": (("k", "p"), False),
    "f1": (("k", "p"), False),
    "f2": (("k", "p"), False),
    "m1": (("j",), True),
    "m2": (("j",), True),
    "qS1": (("k",), True),
    "qS2": (("k",), True),
    "theta1": (("i", "k", "j"), True),
    "theta2": (("i", "k", "j"), True),
    "r1": (("j", "k"), False),
    "r2": (("j", "k"), False),
}


@dataclass(frozen=True)
class InvariantPolynomial(TPolynomial):
    """A member of the invariant catalog.

    ``family`` is one of :data:`FAMILIES`; indices are 1-based as in the
    usual notation.  ``S`` is the ``m x m`` parameter for the families that
    take one, with a free-form ``S_label`` recording where it came from.
    """

    family: str
    indices: tuple
    S: np.ndarray | None = field(default=None, compare=False)
    S_label: str = ""

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        names, takes_S = FAMILIES[self.family]
        if len(self.indices) != len(names):
            raise ValueError(f"{self.family} takes indices {names}")
        if takes_S and self.S is None:
            raise ValueError(f"{self.family} needs a parameter matrix S")
        if self.S is not None:
            object.__setattr__(self, "S", np.asarray(self.S, dtype=complex))

    @property
    def name(self) -> str:
        idx = ",".join(str(i) for i in self.indices)
        return f"{self.family}[{idx}]" + (f";S={self.S_label}" if self.S is not None else "")

    @property
    def degree(self) -> int:
        f, ix = self.family, self.indices
        if f in ("q", "p", "m1", "m2"):
            return 2 * ix[0]
        if f in ("psi1", "psi2", "psi3"):
            return 2
        if f in ("f1", "f2"):
            return 3
        if f in ("qS1", "qS2"):
            return 2 * ix[0]
        if f in ("theta1", "theta2"):
            return 2 * sum(ix)
        return 2 * (ix[0] + ix[1])  # r1, r2

    def validate(self, n: int, m: int) -> None:
        f, ix = self.family, self.indices
        ok = {
            "q": lambda: 1 <= ix[0] <= n,
            "p": lambda: 1 <= ix[0] <= n,
            "psi1": lambda: 1 <= ix[0] <= m,
            "psi2": lambda: 1 <= ix[0] < ix[1] <= m,
            "psi3": lambda: 1 <= ix[0] < ix[1] <= m,
            "f1": lambda: 1 <= ix[0] <= ix[1] <= m,
            "f2": lambda: 1 <= ix[0] <= ix[1] <= m,
            "m1": lambda: 1 <= ix[0] <= n,
            "m2": lambda: 1 <= ix[0] <= n,
            "qS1": lambda: 1 <= ix[0] <= m,
            "qS2": lambda: 1 <= ix[0] <= m,
            "theta1": lambda: 1 <= ix[0] <= n and 1 <= ix[1] <= m and 1 <= ix[2] <= n,
            "theta2": lambda: 1 <= ix[0] <= n and 1 <= ix[1] <= m and 1 <= ix[2] <= n,
            "r1": lambda: 1 <= ix[0] <= n and 1 <= ix[1] <= m,
            "r2": lambda: 1 <= ix[0] <= n and 1 <= ix[1] <= m,
        }[f]()
        if not ok:
            raise ValueError(f"index {ix} out of range for {f} at n={n}, m={m}")
        if self.S is not None and self.S.shape != (m, m):
            raise ValueError("S must be m x m")

    def complex_value(self, omega, z):
        """The complex quantity whose real or imaginary part defines the polynomial."""
        f, ix = self.family, self.indices
        n = omega.shape[-1]
        if f in ("q", "p"):
            return G.tr(G.matpow(_gram(omega), ix[0], n))
        if f in ("psi1", "psi2", "psi3"):
            k, p = (ix[0], ix[0]) if f == "psi1" else ix
            return _rect_entry(z @ z.conj().T, k - 1, p - 1)
        if f in ("f1", "f2"):
            return _rect_entry(z @ omega.conj() @ z.T, ix[0] - 1, ix[1] - 1)
        if f in ("m1", "m2"):
            return G.tr(G.matpow(_gram(omega) + _zsz(z, self.S), ix[0], n))
        if f in ("qS1", "qS2"):
            return G.tr(G.matpow(_zsz(z, self.S), ix[0], n))
        if f in ("theta1", "theta2"):
            i, k, j = ix
            W, T = _gram(omega), _zsz(z, self.S)
            return G.tr(G.matpow(W, i, n) @ G.matpow(T, k, n) @ G.matpow(W + T, j, n))
        j, k = ix
        return G.tr(G.matpow(_gram(omega), j, n) @ G.matpow(_zsz(z, None), k, n))

    def evaluate(self, omega, z):
        return _part(self.complex_value(omega, z), "im" if self.family in _IMAGINARY else "re")

    def magnitude(self, p: TPoint) -> float:
        return float(abs(self.complex_value(p.omega, p.z)))


def eval_invariant(P: TPolynomial, p: TPoint) -> float:
    if isinstance(P, InvariantPolynomial):
        P.validate(p.n, p.m)
    return P(p)


def example_polynomial(name: str) -> TPolynomial:
    """The named generators used for ``n = m = 1`` and ``n = 1`` examples.

    ``"q1"`` is ``tr(omega conj(omega))`` on ``T_1``; ``"q"``, ``"xi"``,
    ``"phi"``, ``"psi"`` are the four generators of the ``n = m = 1`` invariants
    with their customary normalizations.
    """
    if name == "q1":
        return InvariantPolynomial("q", (1,))
    if name == "q":
        return 0.25 * InvariantPolynomial("p", (1,))
    if name == "xi":
        return InvariantPolynomial("psi1", (1,))
    if name == "phi":
        return 0.5 * InvariantPolynomial("f1", (1, 1))
    if name == "psi":
        return 0.5 * InvariantPolynomial("f2", (1, 1))
    raise KeyError(name)


def non_invariant_control() -> TPolynomial:
    """``Re tr(omega conj(z)^T z)``: looks similar to an invariant but is not one."""
    return NamedPolynomial(
        "control:Re tr(omega zb^T z)",
        lambda om, z: G.tr(om @ z.conj().T @ z).real,
        degree=3,
    )


# ---------------------------------------------------------------------------
# catalog


def s_probes(m: int, seed=0) -> list[tuple[str, np.ndarray]]:
    """Parameter matrices for the S families: identity, a rank-one matrix and a random Hermitian one."""
    rng = np.random.default_rng(seed)
    v = np.arange(1, m + 1, dtype=complex)
    H = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    return [
        ("identity", np.eye(m, dtype=complex)),
        ("rank1", np.outer(v, v.conj())),
        (f"hermitian(seed={seed})", (H + H.conj().T) / 2),
    ]


def catalog(n: int, m: int, S_list=None, include_q: bool = True) -> list[InvariantPolynomial]:
    """Every catalog member valid at ``(n, m)``; S families once per probe in ``S_list``."""
    if S_list is None:
        S_list = s_probes(m) if m else []
    out: list[InvariantPolynomial] = []
    if include_q:
        out += [InvariantPolynomial("q", (j,)) for j in range(1, n + 1)]
    if m == 0:
        return out
    out += [InvariantPolynomial("p", (j,)) for j in range(1, n + 1)]
    out += [InvariantPolynomial("psi1", (k,)) for k in range(1, m + 1)]
    pairs_lt = [(k, p) for k in range(1, m + 1) for p in range(k + 1, m + 1)]
    pairs_le = [(k, p) for k in range(1, m + 1) for p in range(k, m + 1)]
    out += [InvariantPolynomial(f, kp) for f in ("psi2", "psi3") for kp in pairs_lt]
    out += [InvariantPolynomial(f, kp) for f in ("f1", "f2") for kp in pairs_le]
    for label, S in S_list:
        out += [InvariantPolynomial(f, (j,), S, label) for f in ("m1", "m2") for j in range(1, n + 1)]
        out += [InvariantPolynomial(f, (k,), S, label) for f in ("qS1", "qS2") for k in range(1, m + 1)]
        out += [
            InvariantPolynomial(f, (i, k, j), S, label)
            for f in ("theta1", "theta2")
            for i in range(1, n + 1)
            for k in range(1, m + 1)
            for j in range(1, n + 1)
        ]
    out += [
        InvariantPolynomial(f, (j, k)) for f in ("r1", "r2") for j in range(1, n + 1) for k in range(1, m + 1)
    ]
    return out


@dataclass(frozen=True)
class InvarianceReport:
    name: str
    samples: int
    max_defect: float
    tol: float
    passed: bool


def check_u_invariance(P: TPolynomial, n: int, m: int, samples: int = 100, seed=0,
                       tol: float = 1e-10, identity_only: bool = False) -> InvarianceReport:
    """Largest ``|P(u.p) - P(p)| / (1 + scale)`` over random ``(u, p)``.

    ``scale`` is :meth:`TPolynomial.magnitude`; for a real or imaginary part of
    a complex trace it is the modulus of that trace, so an imaginary part that
    nearly cancels is not judged against its own tiny value.
    """
    if isinstance(P, InvariantPolynomial):
        P.validate(n, m)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        p = random_tpoint(rng, n, m)
        u = UnitaryMatrix(np.eye(n)) if identity_only else random_unitary(rng, n)
        a, b = P(p), P(u_act(u, p))
        worst = max(worst, abs(a - b) / (1 + P.magnitude(p)))
    return InvarianceReport(P.name, samples, worst, tol, worst <= tol)


def _coordinate_jets(p: TPoint, order: int):
    """``(omega, z)`` as jets in the real coordinates (upper triangle Re/Im, then z Re/Im)."""
    from .frames import CoordFrame

    frame = CoordFrame("HC", p.n, p.m)
    vec = frame.coords(p.omega, p.z)
    return frame.matrices(variables(JetContext(frame.names, order), vec))


def jacobian_rank(Ps, p: TPoint, rel_tol: float = 1e-8) -> int:
    """Numerical rank of the real Jacobian of ``Ps`` at ``p`` (exact first derivatives via jets)."""
    om, z = _coordinate_jets(p, 1)
    rows = [np.real(P.evaluate(om, z).gradient()) for P in Ps]
    if not rows:
        return 0
    J = np.array(rows)
    s = np.linalg.svd(J, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def _monomials_of_degree(polys, degree):
    by_deg = {}
    for P in polys:
        by_deg.setdefault(P.degree, []).append(P)
    items = sorted(polys, key=lambda P: P.degree)
    results = []

    def rec(start, remaining, chosen):
        if remaining == 0:
            results.append(tuple(chosen))
            return
        for i in range(start, len(items)):
            d = items[i].degree
            if d <= remaining:
                rec(i, remaining - d, chosen + [items[i]])

    rec(0, degree, [])
    return results


def graded_dimension_estimate(n: int, m: int, degree: int, seed=0, max_products: int = 4000) -> int:
    """Dimension of the span of catalog products of the given total degree.

    The span is estimated by evaluating every product on random points and
    taking the numerical rank of the value matrix.  The catalog used here has
    the S families at ``S = I`` only.  This is evidence, not a statement
    about generators.
    """
    if degree > 8 or n > 2 or m > 2:
        raise ValueError("graded_dimension_estimate is limited to degree <= 8 and n, m <= 2")
    if degree == 0:
        return 1
    polys = catalog(n, m, S_list=[("identity", np.eye(m, dtype=complex))] if m else [], include_q=(m == 0))
    products = _monomials_of_degree(polys, degree)
    if not products:
        return 0
    if len(products) > max_products:
        raise ValueError(f"{len(products)} products exceeds max_products={max_products}")
    rng = np.random.default_rng(seed)
    npts = len(products) + 20
    vals = np.empty((npts, len(products)))
    for r in range(npts):
        p = random_tpoint(rng, n, m)
        cache = {}
        for c, prod in enumerate(products):
            v = 1.0
            for P in prod:
                key = id(P)
                if key not in cache:
                    cache[key] = P(p)
                v *= cache[key]
            vals[r, c] = v
    norms = np.linalg.norm(vals, axis=0)
    keep = norms > 1e-12 * norms.max()
    if not keep.any():
        return 0
    vals = vals[:, keep] / norms[keep]
    s = np.linalg.svd(vals, compute_uv=False)
    return int(np.sum(s > 1e-9 * s[0]))


def catalog_json(n: int, m: int, samples: int = 100, seed=0) -> str:
    entries = []
    for P in catalog(n, m):
        rep = check_u_invariance(P, n, m, samples=samples, seed=seed)
        entries.append({
            "family": P.family,
            "indices": list(P.indices),
            "S": P.S_label or None,
            "degree": P.degree,
            "invariant": bool(rep.passed),
            "max_defect": rep.max_defect,
        })
    return json.dumps({"n": n, "m": m, "samples": samples, "seed": seed, "polynomials": entries}, indent=2)
