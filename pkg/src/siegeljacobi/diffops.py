"""Linear differential operators acting on jets, and matrices of them.

An operator of degree ``d`` turns the order-``k`` jet of ``f`` at ``p`` into
the order-``k - d`` jet of ``(D f)`` at ``p``.  Products of operators are
compositions in the written order, so matrix expressions read literally,
without normal ordering: in ``Y (d/dOmega-bar)``
the coefficient multiplies after differentiating, and in
``(d/dOmega-bar) o (Y d/dOmega)`` the outer derivative also hits ``Y``.

Coefficients are functions of the point evaluated as jets, so expressions such
as ``(Omega - Omega-bar)^-1`` are differentiated exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _generic as G
from .frames import CoordFrame
from .jetring import Jet, JetOrderError

__all__ = [
    "EvalContext",
    "Coeff",
    "CoeffMatrix",
    "LinOp",
    "Identity",
    "Zero",
    "Partial",
    "Scaled",
    "Sum",
    "Compose",
    "CoeffMul",
    "FuncOp",
    "OpMatrix",
    "MaassSymbols",
    "wirtinger",
    "op_algebra",
    "coordinate",
    "coefficient_matrix",
    "maass_generators",
    "build_operator",
    "OPERATOR_NAMES",
    "commutator",
    "apply_op",
    "apply_at",
    "invariance_defect",
    "invariance_pair",
    "operator_frame",
    "first_order_terms",
    "normal_compose",
    "ModelMismatch",
]


class ModelMismatch(ValueError):
    """Operator and frame (or group element) belong to different models."""


# ---------------------------------------------------------------------------
# evaluation context


class EvalContext:
    """Everything an operator needs at one point: coordinate jets and caches."""

    def __init__(self, frame: CoordFrame, point):
        self.frame = frame
        self.point = np.asarray(point, dtype=float)
        self._coords: dict[int, Jet] = {}
        self._cache: dict = {}
        self._memo: dict = {}

    def coords(self, order: int) -> Jet:
        if order not in self._coords:
            self._coords[order] = self.frame.variables(self.point, order)
        return self._coords[order]

    def cached(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def matrices(self, order: int):
        return self.cached(("matrices", order), lambda: self.frame.matrices(self.coords(order)))


@dataclass(frozen=True, eq=False)
class Coeff:
    """Scalar coefficient: ``fn(ev, order)`` returns its jet at ``ev.point``."""

    key: object
    fn: Callable = field(repr=False)

    def at(self, ev: EvalContext, order: int) -> Jet:
        def build():
            v = self.fn(ev, order)
            if not isinstance(v, Jet):
                v = Jet.const(ev.frame.context(order), v)
            return v

        return ev.cached(("coeff", self.key, order), build)


@dataclass(frozen=True, eq=False)
class CoeffMatrix:
    """Matrix-valued coefficient built from the point's two matrix blocks."""

    key: str
    builder: Callable = field(repr=False)
    shape: tuple

    def at(self, ev: EvalContext, order: int) -> Jet:
        def build():
            v = self.builder(*ev.matrices(order))
            if not isinstance(v, Jet):
                v = Jet.const(ev.frame.context(order), np.broadcast_to(v, self.shape))
            return v

        return ev.cached(("cmat", self.key, order), build)

    def entry(self, i: int, j: int) -> Coeff:
        return Coeff((self.key, i, j), lambda ev, o: self.at(ev, o)[i, j])

    def conj(self) -> "CoeffMatrix":
        return CoeffMatrix(self.key + "^*", lambda a, b: G.conj(self.builder(a, b)), self.shape)

    @property
    def T(self) -> "CoeffMatrix":
        return CoeffMatrix(self.key + "^T", lambda a, b: self.builder(a, b).T, self.shape[::-1])

    def __mul__(self, c) -> "CoeffMatrix":
        return CoeffMatrix(f"({c})*{self.key}", lambda a, b: self.builder(a, b) * c, self.shape)

    __rmul__ = __mul__

    def __matmul__(self, other: "CoeffMatrix") -> "CoeffMatrix":
        return CoeffMatrix(f"{self.key}@{other.key}", lambda a, b: self.builder(a, b) @ other.builder(a, b),
                           (self.shape[0], other.shape[1]))


def coordinate(frame: CoordFrame, name: str) -> Coeff:
    """The coordinate function ``name`` as a coefficient."""
    i = frame.index(name)
    return Coeff(("coord", name), lambda ev, o: ev.coords(o)[i])


def coefficient_matrix(frame: CoordFrame, name: str) -> CoeffMatrix:
    """Named coefficient matrices of a frame (``Y``, ``V``, ``2iY``, ``I-WWb``, ...)."""
    n, m = frame.n, frame.m
    table = {
        "H": {
            "Y": (lambda a, b: a.imag, (n, n)),
            "Yinv": (lambda a, b: G.inv(a.imag), (n, n)),
            "V": (lambda a, b: b.imag, (m, n)),
            "Omega-Omegabar": (lambda a, b: a - a.conj(), (n, n)),
            "(Omega-Omegabar)^-1": (lambda a, b: G.inv(a - a.conj()), (n, n)),
        },
        "D": {
            "I-WWb": (lambda a, b: np.eye(n) - a @ a.conj(), (n, n)),
            "I-WbW": (lambda a, b: np.eye(n) - a.conj() @ a, (n, n)),
            "(I-WWb)^-1": (lambda a, b: G.inv(np.eye(n) - a @ a.conj()), (n, n)),
            "(I-WbW)^-1": (lambda a, b: G.inv(np.eye(n) - a.conj() @ a), (n, n)),
            "W": (lambda a, b: a, (n, n)),
            "Wb": (lambda a, b: a.conj(), (n, n)),
            "eta": (lambda a, b: b, (m, n)),
            "etab": (lambda a, b: b.conj(), (m, n)),
        },
    }["D" if frame.model == "D" else "H"]
    if name not in table:
        raise ModelMismatch(f"no coefficient {name!r} on model {frame.model}")
    fn, shape = table[name]
    return CoeffMatrix(name, fn, shape)


# ---------------------------------------------------------------------------
# scalar operators


class LinOp:
    """Base class.  Subclasses implement :meth:`_apply`; ``degree`` is the order drop."""

    degree: int = 0
    name: str = "op"

    def apply(self, ev: EvalContext, F: Jet) -> Jet:
        if F.order < self.degree:
            raise JetOrderError(f"{self.name}: jet order {F.order} < operator degree {self.degree}")
        key = (id(self), id(F))
        hit = ev._memo.get(key)
        if hit is not None:
            return hit[2]
        out = self._apply(ev, F)
        ev._memo[key] = (self, F, out)
        return out

    def _apply(self, ev, F):  # pragma: no cover - interface
        raise NotImplementedError

    # -- algebra ----------------------------------------------------------------

    def __add__(self, other: "LinOp") -> "LinOp":
        return Sum.of([(1.0, self), (1.0, other)])

    def __sub__(self, other: "LinOp") -> "LinOp":
        return Sum.of([(1.0, self), (-1.0, other)])

    def __neg__(self) -> "LinOp":
        return Scaled.of(-1.0, self)

    def __mul__(self, c) -> "LinOp":
        if isinstance(c, LinOp):
            return Compose.of(self, c)
        return Scaled.of(c, self)

    def __rmul__(self, c) -> "LinOp":
        return Scaled.of(c, self)

    def __matmul__(self, other: "LinOp") -> "LinOp":
        return Compose.of(self, other)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} deg={self.degree}>"


class Identity(LinOp):
    degree = 0
    name = "1"

    def _apply(self, ev, F):
        return F


class Zero(LinOp):
    degree = 0
    name = "0"

    def _apply(self, ev, F):
        return Jet.zeros(F.ctx)


class Partial(LinOp):
    """Derivative along the ``var``-th frame coordinate."""

    degree = 1

    def __init__(self, var: int, label: str | None = None):
        self.var = var
        self.name = label or f"d{var}"

    def _apply(self, ev, F):
        return F.deriv(self.var)


class Scaled(LinOp):
    def __init__(self, c, op: LinOp):
        self.c, self.op = complex(c), op
        self.degree = op.degree
        self.name = f"{c}*{op.name}"

    @staticmethod
    def of(c, op: LinOp) -> LinOp:
        if c == 0 or isinstance(op, Zero):
            return Zero()
        if c == 1:
            return op
        if isinstance(op, Scaled):
            return Scaled(c * op.c, op.op)
        return Scaled(c, op)

    def _apply(self, ev, F):
        return self.op.apply(ev, F) * self.c


class Sum(LinOp):
    def __init__(self, terms):
        self.terms = tuple(terms)
        self.degree = max(op.degree for _, op in self.terms)
        self.name = " + ".join(op.name for _, op in self.terms)

    @staticmethod
    def of(terms) -> LinOp:
        flat = []
        for c, op in terms:
            if isinstance(op, Zero) or c == 0:
                continue
            if isinstance(op, Sum):
                flat += [(c * c2, o2) for c2, o2 in op.terms]
            elif isinstance(op, Scaled):
                flat.append((c * op.c, op.op))
            else:
                flat.append((c, op))
        if not flat:
            return Zero()
        if len(flat) == 1:
            return Scaled.of(*flat[0])
        return Sum(flat)

    def _apply(self, ev, F):
        order = F.order - self.degree
        out = None
        for c, op in self.terms:
            r = op.apply(ev, F)
            if r.order > order:
                r = r.truncate(order)
            r = r * c if c != 1 else r
            out = r if out is None else out + r
        return out


class Compose(LinOp):
    """``outer o inner``: apply ``inner`` first."""

    def __init__(self, outer: LinOp, inner: LinOp):
        self.outer, self.inner = outer, inner
        self.degree = outer.degree + inner.degree
        self.name = f"{outer.name}.{inner.name}"

    @staticmethod
    def of(outer: LinOp, inner: LinOp) -> LinOp:
        if isinstance(outer, Zero) or isinstance(inner, Zero):
            return Zero()
        if isinstance(outer, Identity):
            return inner
        if isinstance(inner, Identity):
            return outer
        return Compose(outer, inner)

    def _apply(self, ev, F):
        return self.outer.apply(ev, self.inner.apply(ev, F))


class CoeffMul(LinOp):
    """Multiply the result of ``op`` by a coefficient function."""

    def __init__(self, coeff: Coeff, op: LinOp | None = None):
        self.coeff = coeff
        self.op = op if op is not None else Identity()
        self.degree = self.op.degree
        self.name = f"[{coeff.key}]{self.op.name}"

    def _apply(self, ev, F):
        r = self.op.apply(ev, F)
        return self.coeff.at(ev, r.order) * r


class FuncOp(LinOp):
    """Operator given by an arbitrary jet map ``fn(ev, F) -> Jet`` of the declared degree."""

    def __init__(self, degree: int, fn: Callable, name: str = "func"):
        self.degree = degree
        self.fn = fn
        self.name = name

    def _apply(self, ev, F):
        return self.fn(ev, F)


def first_order_terms(op: LinOp) -> list:
    """Flatten a first-order operator into ``[(c, coeff or None, var)]`` meaning ``sum c * coeff * d_var``."""
    if isinstance(op, Zero):
        return []
    if isinstance(op, Partial):
        return [(1.0, None, op.var)]
    if isinstance(op, Scaled):
        return [(op.c * c, b, v) for c, b, v in first_order_terms(op.op)]
    if isinstance(op, Sum):
        return [(c0 * c, b, v) for c0, o in op.terms for c, b, v in first_order_terms(o)]
    if isinstance(op, CoeffMul):
        inner = first_order_terms(op.op)
        if any(b is not None for _, b, _ in inner):
            return [(c, _coeff_product(op.coeff, b), v) for c, b, v in inner]
        return [(c, op.coeff, v) for c, _, v in inner]
    raise TypeError(f"{op!r} is not a first-order operator with point coefficients")


def _coeff_product(a: Coeff, b: Coeff | None) -> Coeff:
    if b is None:
        return a
    return Coeff(("*", a.key, b.key), lambda ev, o: a.at(ev, o) * b.at(ev, o))


def normal_compose(A: LinOp, B: LinOp) -> LinOp:
    """``sum_l b_l A(d_l .)`` for ``B = sum_l b_l d_l``: compose without differentiating ``B``'s coefficients."""
    terms = []
    for c, b, v in first_order_terms(B):
        core = Compose.of(A, Partial(v))
        terms.append((c, core if b is None else CoeffMul(b, core)))
    return Sum.of(terms)


# ---------------------------------------------------------------------------
# operator matrices


class OpMatrix:
    """Matrix of :class:`LinOp` entries with composition as the product."""

    def __init__(self, entries):
        arr = np.empty(np.shape(entries)[:2], dtype=object)
        for idx in np.ndindex(arr.shape):
            arr[idx] = entries[idx[0]][idx[1]]
        self.e = arr

    @classmethod
    def identity(cls, k: int) -> "OpMatrix":
        return cls([[Identity() if i == j else Zero() for j in range(k)] for i in range(k)])

    @property
    def shape(self) -> tuple:
        return self.e.shape

    @property
    def degree(self) -> int:
        return max((op.degree for op in self.e.flat), default=0)

    def __getitem__(self, ij) -> LinOp:
        return self.e[ij]

    @property
    def T(self) -> "OpMatrix":
        return OpMatrix(self.e.T)

    def __matmul__(self, other: "OpMatrix") -> "OpMatrix":
        if self.shape[1] != other.shape[0]:
            raise ValueError(f"operator matrix dimension mismatch {self.shape} @ {other.shape}")
        r, k, c = self.shape[0], self.shape[1], other.shape[1]
        return OpMatrix([[Sum.of([(1.0, Compose.of(self.e[i, j], other.e[j, l])) for j in range(k)])
                          for l in range(c)] for i in range(r)])

    def __add__(self, other: "OpMatrix") -> "OpMatrix":
        if self.shape != other.shape:
            raise ValueError("operator matrix dimension mismatch in +")
        return OpMatrix([[self.e[i, j] + other.e[i, j] for j in range(self.shape[1])] for i in range(self.shape[0])])

    def __sub__(self, other: "OpMatrix") -> "OpMatrix":
        return self + other * -1.0

    def __mul__(self, c) -> "OpMatrix":
        return OpMatrix([[Scaled.of(c, op) for op in row] for row in self.e])

    __rmul__ = __mul__

    def trace(self) -> LinOp:
        if self.shape[0] != self.shape[1]:
            raise ValueError("trace of a non-square operator matrix")
        return Sum.of([(1.0, self.e[i, i]) for i in range(self.shape[0])])

    def left_coeff(self, C: CoeffMatrix) -> "OpMatrix":
        """``C . self``: entry ``(i, k) = sum_j c_ij (self_jk)``; the coefficient is not differentiated."""
        if C.shape[1] != self.shape[0]:
            raise ValueError(f"coefficient {C.shape} cannot multiply operator matrix {self.shape}")
        return OpMatrix([[Sum.of([(1.0, CoeffMul(C.entry(i, j), self.e[j, k])) for j in range(C.shape[1])])
                          for k in range(self.shape[1])] for i in range(C.shape[0])])

    def right_coeff(self, C: CoeffMatrix) -> "OpMatrix":
        """``self . C``: entries ``sum_j self_ij o (c_jk *)``; here the operators do differentiate ``C``."""
        if self.shape[1] != C.shape[0]:
            raise ValueError("dimension mismatch in right coefficient multiplication")
        return OpMatrix([[Sum.of([(1.0, Compose.of(self.e[i, j], CoeffMul(C.entry(j, k)))) for j in range(self.shape[1])])
                          for k in range(C.shape[1])] for i in range(self.shape[0])])

    def times_scalar_op(self, op: LinOp) -> "OpMatrix":
        """Entrywise ``self_ij o op``."""
        return OpMatrix([[Compose.of(e, op) for e in row] for row in self.e])

    def times_coeff(self, C: CoeffMatrix) -> "OpMatrix":
        """``self . C`` with the coefficient kept outside the derivatives."""
        if self.shape[1] != C.shape[0]:
            raise ValueError("dimension mismatch in right coefficient multiplication")
        return OpMatrix([[Sum.of([(1.0, CoeffMul(C.entry(j, k), self.e[i, j])) for j in range(self.shape[1])])
                          for k in range(C.shape[1])] for i in range(self.shape[0])])

    def normal_matmul(self, other: "OpMatrix") -> "OpMatrix":
        """Product in which ``other``'s coefficients are not differentiated (``other`` must be first order)."""
        if self.shape[1] != other.shape[0]:
            raise ValueError(f"operator matrix dimension mismatch {self.shape} @ {other.shape}")
        r, k, c = self.shape[0], self.shape[1], other.shape[1]
        return OpMatrix([[Sum.of([(1.0, normal_compose(self.e[i, j], other.e[j, l])) for j in range(k)])
                          for l in range(c)] for i in range(r)])

    def sym(self) -> "OpMatrix":
        return (self + self.T) * 0.5

    def det(self) -> LinOp:
        """Leibniz expansion with products composed in row order."""
        k = self.shape[0]
        if self.shape[1] != k:
            raise ValueError("det of a non-square operator matrix")
        terms = []
        for perm in itertools.permutations(range(k)):
            inv = sum(1 for a in range(k) for b in range(a + 1, k) if perm[a] > perm[b])
            prod = self.e[0, perm[0]]
            for i in range(1, k):
                prod = Compose.of(prod, self.e[i, perm[i]])
            terms.append((-1.0 if inv % 2 else 1.0, prod))
        return Sum.of(terms)


def op_algebra(A, B, op: str):
    """Dispatch for the matrix operations: ``mul``, ``add``, ``transpose``, ``trace``, ``left_mult_by_coeff``.

    For ``left_mult_by_coeff`` pass the :class:`CoeffMatrix` as ``B``.
    """
    if op == "mul":
        return A @ B
    if op == "add":
        return A + B
    if op == "transpose":
        return A.T
    if op == "trace":
        return A.trace()
    if op == "left_mult_by_coeff":
        return A.left_coeff(B)
    raise ValueError(f"unknown operator-matrix operation {op!r}")


# ---------------------------------------------------------------------------
# Wirtinger derivative matrices

_WIRTINGER = {
    "H": ("dOmega", "dOmegabar"),
    "HC": ("dOmega", "dOmegabar", "dZ", "dZbar"),
    "D": ("dW", "dWbar", "deta", "detabar"),
}


def wirtinger(frame: CoordFrame, which: str) -> OpMatrix:
    """Complex derivative matrices.

    Square-block derivatives carry the ``(1 + delta_ij)/2`` weight and use the
    single shared coordinate for ``(i, j)`` and ``(j, i)``.  The rectangular
    ones are ``n x m`` with entry ``(l, k) = d/dz_kl = (d/du_kl - i d/dv_kl)/2``.
    """
    if which not in _WIRTINGER[frame.model]:
        raise ModelMismatch(f"{which} is not defined on model {frame.model}")
    n, m = frame.n, frame.m
    sign = 1.0 if which.endswith("bar") else -1.0
    if which in ("dOmega", "dOmegabar", "dW", "dWbar"):
        S = frame.sym_index
        ent = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                r = S[i, j]
                w = 0.5 if i == j else 0.25
                re, im = Partial(frame.re_sym.start + r, frame.names[r]), Partial(frame.im_sym.start + r, frame.names[frame.nsym + r])
                ent[i][j] = Sum.of([(w, re), (sign * 1j * w, im)])
        return OpMatrix(ent)
    ent = [[None] * m for _ in range(n)]
    for l in range(n):
        for k in range(m):
            r = k * n + l
            re = Partial(frame.re_rect.start + r, frame.names[frame.re_rect.start + r])
            im = Partial(frame.im_rect.start + r, frame.names[frame.im_rect.start + r])
            ent[l][k] = Sum.of([(0.5, re), (sign * 0.5j, im)])
    return OpMatrix(ent)


# ---------------------------------------------------------------------------
# Maass generators


@dataclass
class MaassSymbols:
    K: OpMatrix
    Lam: OpMatrix
    A: list
    H: list


def maass_generators(n: int, jmax: int | None = None) -> MaassSymbols:
    """``K = 2iY d/dOmega``, ``Lambda = 2iY d/dOmega-bar`` and the recursion for ``A^(j)``, ``H_j``.

    ``sigma`` in the recursion is read as the matrix trace.
    """
    if n > 3:
        raise ValueError("maass_generators is limited to n <= 3")
    frame = CoordFrame("H", n)
    jmax = n if jmax is None else jmax
    twoiY = coefficient_matrix(frame, "Omega-Omegabar")
    K = wirtinger(frame, "dOmega").left_coeff(twoiY)
    Lam = wirtinger(frame, "dOmegabar").left_coeff(twoiY)
    c = (n + 1) / 2
    A1 = Lam @ K + K * c
    As = [A1]
    half_diff = coefficient_matrix(frame, "Omega-Omegabar") * 0.5
    diff_inv = coefficient_matrix(frame, "(Omega-Omegabar)^-1")
    for _ in range(2, jmax + 1):
        Ap = As[-1]
        inner = (Lam.T @ Ap.T).T.left_coeff(diff_inv).T.left_coeff(half_diff)
        As.append(A1 @ Ap - (Lam @ Ap) * c + Lam.times_scalar_op(Ap.trace()) * 0.5 + inner)
    return MaassSymbols(K, Lam, As, [A.trace() for A in As])


# ---------------------------------------------------------------------------
# named invariant operators


def _d_ops_11(frame: CoordFrame):
    x, y, u, v = (Partial(i, nm) for i, nm in enumerate(frame.names))
    cy, cv = coordinate(frame, "y11"), coordinate(frame, "v11")
    sq = lambda a: a @ a  # noqa: E731
    yy = Coeff("y^2", lambda ev, o: ev.coords(o)[1] * ev.coords(o)[1])
    yv = Coeff("2yv", lambda ev, o: ev.coords(o)[1] * ev.coords(o)[3] * 2.0)
    vv = Coeff("v^2", lambda ev, o: ev.coords(o)[3] * ev.coords(o)[3])
    D2 = CoeffMul(cy, sq(u) + sq(v))
    D1 = CoeffMul(yy, sq(x) + sq(y)) + CoeffMul(vv, sq(u) + sq(v)) + CoeffMul(yv, x @ u + y @ v)
    vdv = CoeffMul(cv, v)
    D3 = CoeffMul(yy, y @ (sq(u) - sq(v))) - 2.0 * CoeffMul(yy, x @ u @ v) - (vdv @ D2 + D2)
    vdu = CoeffMul(cv, u)
    D4 = CoeffMul(yy, x @ (sq(v) - sq(u))) - 2.0 * CoeffMul(yy, y @ u @ v) - vdu @ D2
    comm = (2.0 * CoeffMul(yy, y @ (sq(u) - sq(v))) - 4.0 * CoeffMul(yy, x @ u @ v)
            - 2.0 * (vdv @ D2 + D2))
    return {"D1": D1, "D2": D2, "D3": D3, "D4": D4, "[D1,D2]": comm}


def _hc_pieces(frame):
    dO, dOb = wirtinger(frame, "dOmega"), wirtinger(frame, "dOmegabar")
    dZ, dZb = wirtinger(frame, "dZ"), wirtinger(frame, "dZbar")
    Y = coefficient_matrix(frame, "Y")
    V = coefficient_matrix(frame, "V")
    Yinv = coefficient_matrix(frame, "Yinv")
    return dO, dOb, dZ, dZb, Y, V, Yinv


def _m2_termwise_terms(frame):
    # four trace terms composed literally; invariant only at n = 1
    dO, dOb, dZ, dZb, Y, V, Yinv = _hc_pieces(frame)
    return [
        ((dOb.left_coeff(Y)).T @ dO).left_coeff(Y).trace(),
        ((dZb.left_coeff(Y)).T @ dZ).left_coeff(V @ Yinv @ V.T).trace(),
        ((dOb.left_coeff(Y)).T @ dZ).left_coeff(V).trace(),
        ((dZb.left_coeff(Y)).T @ dO).left_coeff(V.T).trace(),
    ]


def _horizontal(d_sq: OpMatrix, d_rect: OpMatrix, shift: CoeffMatrix) -> OpMatrix:
    """``d_sq + sym(d_rect . shift)``: the square-block derivative along the horizontal directions."""
    return d_sq + d_rect.times_coeff(shift).sym()


def _m2(frame):
    # tr(Y Db Y D) in normal order, D = d/dOmega + sym(d/dZ . V Y^-1)
    dO, dOb, dZ, dZb, Y, V, Yinv = _hc_pieces(frame)
    lam = V @ Yinv
    D, Db = _horizontal(dO, dZ, lam), _horizontal(dOb, dZb, lam)
    return Db.left_coeff(Y).normal_matmul(D.left_coeff(Y)).trace()


def _det_coeff(C: CoeffMatrix) -> Coeff:
    return Coeff(("det", C.key), lambda ev, o: G.det(C.at(ev, o)))


def _named(frame: CoordFrame, name: str, A: float, B: float):
    n, m = frame.n, frame.m
    if frame.model == "H":
        if name == "Delta_H":
            dO, dOb = wirtinger(frame, "dOmega"), wirtinger(frame, "dOmegabar")
            Y = coefficient_matrix(frame, "Y")
            return ((dOb.left_coeff(Y)).T @ dO).left_coeff(Y).trace() * (4.0 / A)
        raise ModelMismatch(f"{name} is not an operator on H_n")
    if frame.model == "HC":
        if name in ("D1", "D2", "D3", "D4", "[D1,D2]"):
            if (n, m) != (1, 1):
                raise ModelMismatch(f"{name} is only defined for n = m = 1")
            return _d_ops_11(frame)[name]
        dO, dOb, dZ, dZb, Y, V, Yinv = _hc_pieces(frame)
        if name == "M1":
            return (dZ @ dZb.T).left_coeff(Y).trace()
        if name == "M2":
            return _m2(frame)
        if name == "M2_termwise":
            return Sum.of([(1.0, t) for t in _m2_termwise_terms(frame)])
        if name == "M2_broken":
            return _m2(frame) - _m2_termwise_terms(frame)[2]
        if name == "Delta_HC":
            return Sum.of([(4.0 / A, _named(frame, "M2", A, B)), (4.0 / B, _named(frame, "M1", A, B))])
        if name == "K":
            return CoeffMul(_det_coeff(Y), (dZ @ dZb.T).det())
        if name == "T":
            return dZb.T @ dZ.left_coeff(Y)
        raise ModelMismatch(f"{name} is not an operator on H_(n,m)")
    dW, dWb = wirtinger(frame, "dW"), wirtinger(frame, "dWbar")
    de, deb = wirtinger(frame, "deta"), wirtinger(frame, "detabar")
    C = lambda s: coefficient_matrix(frame, s)  # noqa: E731
    L, R = C("I-WWb"), C("I-WbW")
    Li, Ri = C("(I-WWb)^-1"), C("(I-WbW)^-1")
    W, Wb, eta, etab = C("W"), C("Wb"), C("eta"), C("etab")
    if name == "K_D":
        return CoeffMul(_det_coeff(L), (de @ deb.T).det())
    if name == "T_D":
        return deb.T @ de.left_coeff(R)
    if name == "S1":
        return (de @ deb.T).left_coeff(R).trace()
    if name == "S2":
        # tr(P Db Q D) in normal order, D = d/dW + sym(d/deta . (etab - eta Wb) P^-1)
        shift = (etab - eta @ Wb) @ Li
        D, Db = _horizontal(dW, de, shift), _horizontal(dWb, deb, shift.conj())
        return Db.left_coeff(L).normal_matmul(D.left_coeff(R)).trace()
    if name == "S2_termwise":
        # literal composition of seven trace terms; like M2_termwise, invariant only at n = 1
        R_de = de.left_coeff(R)
        terms = [
            (dWb.left_coeff(L).T @ dW).left_coeff(L).trace(),
            (deb.T @ dW.left_coeff(R)).left_coeff((eta - etab @ W).T).trace(),
            (dWb.left_coeff(L).T @ de).left_coeff(etab - eta @ Wb).trace(),
            -(deb.T @ R_de).left_coeff(eta @ Wb @ Li @ eta.T).trace(),
            -(deb.T @ R_de).left_coeff(etab @ W @ Ri @ etab.T).trace(),
            (deb.T @ R_de).left_coeff(etab @ Li @ eta.T).trace(),
            (deb.T @ R_de).left_coeff(eta @ Wb @ W @ Ri @ etab.T).trace(),
        ]
        return Sum.of([(1.0, t) for t in terms])
    if name == "Delta_D":
        return Sum.of([(1.0 / A, _named(frame, "S2", A, B)), (1.0 / B, _named(frame, "S1", A, B))])
    raise ModelMismatch(f"{name} is not an operator on D_(n,m)")


def _cm_sub(a: CoeffMatrix, b: CoeffMatrix) -> CoeffMatrix:
    return CoeffMatrix(f"({a.key}-{b.key})", lambda x, y: a.builder(x, y) - b.builder(x, y), a.shape)


CoeffMatrix.__sub__ = _cm_sub  # small convenience used by the disk operators

OPERATOR_NAMES = {
    "H": ("Delta_H",),
    "HC": ("M1", "M2", "Delta_HC", "K", "T", "D1", "D2", "D3", "D4", "[D1,D2]", "M2_termwise", "M2_broken"),
    "D": ("S1", "S2", "Delta_D", "K_D", "T_D", "S2_termwise"),
}


def build_operator(name: str, n: int, m: int = 0, A: float = 1.0, B: float = 1.0):
    """Assemble a named invariant operator; matrix-valued ones (``T``, ``T_D``) return an :class:`OpMatrix`."""
    if not (A > 0 and B > 0):
        raise ValueError("A and B must be positive")
    for model, names in OPERATOR_NAMES.items():
        if name in names:
            if model == "H" and m:
                raise ModelMismatch(f"{name} lives on H_n; pass m = 0")
            return _named(CoordFrame(model, n, m), name, A, B)
    raise ValueError(f"unknown operator {name!r}")


def operator_frame(name: str, n: int, m: int = 0) -> CoordFrame:
    for model, names in OPERATOR_NAMES.items():
        if name in names:
            return CoordFrame(model, n, 0 if model == "H" else m)
    raise ValueError(f"unknown operator {name!r}")


# ---------------------------------------------------------------------------
# evaluation helpers


def commutator(A: LinOp, B: LinOp) -> LinOp:
    return Sum.of([(1.0, Compose.of(A, B)), (-1.0, Compose.of(B, A))])


def apply_op(op: LinOp, frame: CoordFrame, f: Callable, p, out_order: int = 0) -> Jet:
    """Jet of ``op f`` at ``p`` of order ``out_order``; ``f`` maps coordinate jets to a scalar jet."""
    ev = EvalContext(frame, p)
    F = f(frame.variables(p, op.degree + out_order))
    return op.apply(ev, F)


def apply_at(op: LinOp, frame: CoordFrame, f: Callable, p) -> complex:
    return complex(apply_op(op, frame, f, p).value)


def invariance_pair(op: LinOp, frame: CoordFrame, g, f: Callable, p) -> tuple[complex, complex]:
    """``(op(f o g)(p), (op f)(g . p))`` with ``f o g`` built from the jet-valued group action."""
    ev = EvalContext(frame, p)
    X = frame.variables(p, op.degree)
    lhs = complex(op.apply(ev, f(frame.act_coords(g, X))).value)
    q = frame.act_coords(g, np.asarray(p, dtype=float))
    return lhs, apply_at(op, frame, f, q)


def invariance_defect(op: LinOp, frame: CoordFrame, g, f: Callable, p) -> float:
    """``|op(f o g)(p) - (op f)(g . p)|``."""
    a, b = invariance_pair(op, frame, g, f, p)
    return float(abs(a - b))
