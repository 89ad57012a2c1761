"""Truncated multivariate Taylor jets over the complex numbers.

A :class:`Jet` holds the Taylor coefficients of one or more complex valued
functions of real variables, truncated at a fixed total degree.  The
coefficients live in a dense array whose last axis is indexed by a graded
ranking of multi-indices (all degree 0 monomials, then degree 1, ...), so a
jet of order ``k`` is the prefix of the same jet at order ``K > k``.

Leading axes are free: a jet of shape ``(n, n)`` is a matrix of jets and
supports ``@``, transposition, inversion and exponentiation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "JetContext",
    "Jet",
    "JetContextError",
    "JetOrderError",
    "jet_arith",
    "jet_inverse",
    "jet_extract",
    "jet_matrix_ops",
    "variables",
    "constant",
    "concat",
    "stack",
]


class JetContextError(ValueError):
    """Operands live in different jet contexts."""


class JetOrderError(ValueError):
    """A jet is too shallow for the requested operation."""


@dataclass(frozen=True)
class JetContext:
    """Ordered real variables and the maximal retained total degree."""

    vars: tuple[str, ...]
    order: int

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("jet order must be non-negative")
        if len(set(self.vars)) != len(self.vars):
            raise ValueError("jet variable names must be unique")

    @classmethod
    def anonymous(cls, nvars: int, order: int, prefix: str = "t") -> "JetContext":
        return cls(tuple(f"{prefix}{i}" for i in range(nvars)), order)

    @property
    def nvars(self) -> int:
        return len(self.vars)

    @property
    def size(self) -> int:
        return _tables(self.nvars, self.order).size

    @property
    def exponents(self) -> np.ndarray:
        return _tables(self.nvars, self.order).exps

    def truncated(self, order: int) -> "JetContext":
        if order > self.order:
            raise JetOrderError(f"cannot raise jet order {self.order} to {order}")
        return JetContext(self.vars, order)

    def rank(self, idx) -> int:
        """Position of multi-index ``idx`` in the coefficient array."""
        idx = tuple(int(i) for i in idx)
        if len(idx) != self.nvars:
            raise ValueError("multi-index length does not match the number of variables")
        if sum(idx) > self.order:
            raise JetOrderError(f"|idx| = {sum(idx)} exceeds jet order {self.order}")
        return _tables(self.nvars, self.order).lookup[idx]


# ---------------------------------------------------------------------------
# combinatorial tables


class _Tables:
    def __init__(self, nvars: int, order: int):
        self.nvars = nvars
        self.order = order
        rows = [np.zeros(nvars, dtype=np.int16)]
        degree_start = [0]
        for d in range(1, order + 1):
            degree_start.append(len(rows))
            for combo in itertools.combinations_with_replacement(range(nvars), d):
                e = np.zeros(nvars, dtype=np.int16)
                for i in combo:
                    e[i] += 1
                rows.append(e)
        degree_start.append(len(rows))
        self.exps = np.array(rows, dtype=np.int16).reshape(len(rows), nvars)
        self.exps.setflags(write=False)
        self.size = len(rows)
        self.degree_start = tuple(degree_start)
        self.degrees = self.exps.sum(axis=1)
        self.factorials = np.prod(
            [[math.factorial(int(a)) for a in row] for row in self.exps], axis=1
        ).astype(float) if nvars else np.ones(1)
        self.lookup = {tuple(int(a) for a in row): r for r, row in enumerate(self.exps)}
        self._hash = _hash_weights(nvars)
        keys = self.exps.astype(np.uint64) @ self._hash if nvars else np.zeros(1, np.uint64)
        order_ = np.argsort(keys, kind="stable")
        self._sorted_keys = keys[order_]
        self._sorted_rank = order_
        if len(np.unique(keys)) != self.size:  # pragma: no cover - hash collision guard
            raise RuntimeError("monomial hash collision")
        self._mul = None
        self._deriv = {}

    def ranks_of(self, exps: np.ndarray) -> np.ndarray:
        keys = exps.astype(np.uint64) @ self._hash
        pos = np.searchsorted(self._sorted_keys, keys)
        return self._sorted_rank[pos]

    @property
    def mul(self):
        """(ia, ib, starts) with pairs sorted by the rank of ia+ib."""
        if self._mul is None:
            ia_parts, ib_parts, ic_parts = [], [], []
            ds = self.degree_start
            for da in range(self.order + 1):
                a_idx = np.arange(ds[da], ds[da + 1])
                b_idx = np.arange(0, ds[self.order - da + 1])
                A, B = np.meshgrid(a_idx, b_idx, indexing="ij")
                A = A.ravel()
                B = B.ravel()
                ia_parts.append(A)
                ib_parts.append(B)
                ic_parts.append(self.ranks_of(self.exps[A] + self.exps[B]))
            ia = np.concatenate(ia_parts)
            ib = np.concatenate(ib_parts)
            ic = np.concatenate(ic_parts)
            perm = np.argsort(ic, kind="stable")
            ia, ib, ic = ia[perm], ib[perm], ic[perm]
            starts = np.flatnonzero(np.r_[True, ic[1:] != ic[:-1]])
            self._mul = (ia, ib, starts)
        return self._mul

    def deriv(self, var: int):
        """Source ranks and factors mapping order-k coefficients to the derivative (order k-1)."""
        if var not in self._deriv:
            n_out = self.degree_start[self.order]  # monomials of degree <= order-1
            e = self.exps[:n_out].copy()
            e[:, var] += 1
            src = self.ranks_of(e)
            fac = e[:, var].astype(float)
            self._deriv[var] = (src, fac)
        return self._deriv[var]


@lru_cache(maxsize=None)
def _hash_weights(nvars: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(0x5EED))
    return rng.integers(1, 2**62, size=nvars, dtype=np.uint64) | np.uint64(1)


@lru_cache(maxsize=None)
def _tables(nvars: int, order: int) -> _Tables:
    return _Tables(nvars, order)


# ---------------------------------------------------------------------------
# the jet type


class Jet:
    """Array of truncated Taylor expansions sharing one :class:`JetContext`.

    ``coeffs`` has shape ``shape + (ctx.size,)``.  Arithmetic broadcasts over
    the leading shape like numpy; ``*`` is the truncated Cauchy product and
    ``@`` the matrix product over leading axes.
    """

    __array_ufunc__ = None  # make numpy defer to the reflected operators

    def __init__(self, ctx: JetContext, coeffs):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape[-1:] != (ctx.size,):
            raise ValueError(
                f"coefficient axis has length {coeffs.shape[-1:]} but context needs {ctx.size}"
            )
        self.ctx = ctx
        self.c = coeffs

    # -- construction -------------------------------------------------------

    @classmethod
    def const(cls, ctx: JetContext, value) -> "Jet":
        value = np.asarray(value, dtype=complex)
        c = np.zeros(value.shape + (ctx.size,), dtype=complex)
        c[..., 0] = value
        return cls(ctx, c)

    @classmethod
    def zeros(cls, ctx: JetContext, shape=()) -> "Jet":
        return cls(ctx, np.zeros(tuple(shape) + (ctx.size,), dtype=complex))

    # -- basic properties ---------------------------------------------------

    @property
    def shape(self) -> tuple:
        return self.c.shape[:-1]

    @property
    def ndim(self) -> int:
        return self.c.ndim - 1

    @property
    def order(self) -> int:
        return self.ctx.order

    @property
    def value(self) -> np.ndarray | complex:
        """Constant term (the function value at the expansion point)."""
        v = self.c[..., 0]
        return v if v.ndim else complex(v)

    def __repr__(self):
        return f"Jet(shape={self.shape}, order={self.order}, nvars={self.ctx.nvars})"

    def __len__(self):
        return self.shape[0]

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        if not any(k is Ellipsis for k in key):
            key = key + (Ellipsis,)
        return Jet(self.ctx, self.c[key + (slice(None),)])

    def __iter__(self):
        for i in range(self.shape[0]):
            yield self[i]

    def copy(self) -> "Jet":
        return Jet(self.ctx, self.c.copy())

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return Jet(self.ctx, self.c.reshape(tuple(shape) + (self.ctx.size,)))

    @property
    def T(self) -> "Jet":
        if self.ndim < 2:
            return self
        return Jet(self.ctx, np.swapaxes(self.c, -2, -3))

    def conj(self) -> "Jet":
        # variables are real, so conjugation acts on coefficients only
        return Jet(self.ctx, self.c.conj())

    @property
    def real(self) -> "Jet":
        return Jet(self.ctx, self.c.real.astype(complex))

    @property
    def imag(self) -> "Jet":
        return Jet(self.ctx, self.c.imag.astype(complex))

    def truncate(self, order: int) -> "Jet":
        ctx = self.ctx.truncated(order)
        return Jet(ctx, self.c[..., : ctx.size])

    def trace(self) -> "Jet":
        return Jet(self.ctx, np.trace(self.c, axis1=-3, axis2=-2))

    def sum(self, axis=None) -> "Jet":
        if axis is None:
            return Jet(self.ctx, self.c.reshape(-1, self.ctx.size).sum(axis=0))
        axis = axis if axis >= 0 else axis - 1
        return Jet(self.ctx, self.c.sum(axis=axis))

    # -- coefficient access -------------------------------------------------

    def coefficient(self, idx) -> np.ndarray | complex:
        v = self.c[..., self.ctx.rank(idx)]
        return v if v.ndim else complex(v)

    def extract(self, idx) -> np.ndarray | complex:
        """Partial derivative ``d^idx f`` at the expansion point."""
        r = self.ctx.rank(idx)
        fac = _tables(self.ctx.nvars, self.ctx.order).factorials[r]
        v = self.c[..., r] * fac
        return v if v.ndim else complex(v)

    def gradient(self) -> np.ndarray:
        """First derivatives, stacked on a new trailing axis."""
        if self.order < 1:
            raise JetOrderError("gradient needs a jet of order >= 1")
        return self.c[..., 1 : 1 + self.ctx.nvars].copy()

    def deriv(self, var: int) -> "Jet":
        """Jet of the partial derivative along variable ``var`` (order drops by one)."""
        if self.order < 1:
            raise JetOrderError("cannot differentiate an order-0 jet")
        src, fac = _tables(self.ctx.nvars, self.ctx.order).deriv(var)
        return Jet(self.ctx.truncated(self.order - 1), self.c[..., src] * fac)

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other: "Jet"):
        if other.ctx != self.ctx:
            raise JetContextError(f"context mismatch: {self.ctx} vs {other.ctx}")

    def _coerce(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return other
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is not None:
            a, b = np.broadcast_arrays(self.c, o.c)
            return Jet(self.ctx, a + b)
        other = np.asarray(other, dtype=complex)
        c = np.broadcast_to(self.c, np.broadcast_shapes(self.shape, other.shape) + (self.ctx.size,)).copy()
        c[..., 0] += other
        return Jet(self.ctx, c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.ctx, -self.c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is not None:
            return _cauchy(self, o, None)
        other = np.asarray(other, dtype=complex)
        return Jet(self.ctx, self.c * other[..., None])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        other = np.asarray(other, dtype=complex)
        return Jet(self.ctx, self.c / other[..., None])

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k):
        if isinstance(k, (int, np.integer)) and k >= 0:
            result = Jet.const(self.ctx, np.ones(self.shape))
            base = self
            while k:
                if k & 1:
                    result = result * base
                k >>= 1
                if k:
                    base = base * base
            return result
        if isinstance(k, (int, np.integer)):
            return self.reciprocal() ** (-k)
        return self.power(float(k))

    def __matmul__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return _cauchy(self, other, "matmul")
        other = np.asarray(other, dtype=complex)
        return Jet(self.ctx, np.einsum("...ijP,...jk->...ikP", self.c, other)
                   if other.ndim >= 2 else np.einsum("...ijP,j->...iP", self.c, other))

    def __rmatmul__(self, other):
        other = np.asarray(other, dtype=complex)
        if self.ndim == 1:
            return Jet(self.ctx, np.einsum("ij,jP->iP", other, self.c))
        return Jet(self.ctx, np.einsum("...ij,...jkP->...ikP", other, self.c))

    # -- analytic functions -------------------------------------------------

    def nilpotent(self) -> "Jet":
        c = self.c.copy()
        c[..., 0] = 0
        return Jet(self.ctx, c)

    def series(self, derivs) -> "Jet":
        """Apply a scalar function elementwise given ``derivs[k] = f^(k)(value)``.

        ``derivs`` is a sequence (indexable up to ``order``) of arrays shaped
        like ``self.shape``.
        """
        a0 = self.c[..., 0]
        N = self.nilpotent()
        K = self.order
        # Horner: sum_k f^(k)/k! N^k
        result = Jet.const(self.ctx, np.asarray(derivs[K]) / math.factorial(K) * np.ones_like(a0))
        for k in range(K - 1, -1, -1):
            result = result * N + np.asarray(derivs[k]) / math.factorial(k)
        return result

    def reciprocal(self) -> "Jet":
        a0 = self.c[..., 0]
        if np.any(a0 == 0):
            raise ZeroDivisionError("jet with zero constant term is not invertible")
        return self.series([(-1) ** k * math.factorial(k) / a0 ** (k + 1) for k in range(self.order + 1)])

    def exp(self) -> "Jet":
        e = np.exp(self.c[..., 0])
        return self.series([e] * (self.order + 1))

    def power(self, p: float) -> "Jet":
        a0 = self.c[..., 0]
        derivs = []
        coef = 1.0
        for k in range(self.order + 1):
            derivs.append(coef * a0 ** (p - k))
            coef *= p - k
        return self.series(derivs)

    def sqrt(self) -> "Jet":
        return self.power(0.5)

    def inv(self) -> "Jet":
        """Matrix inverse (square trailing pair of leading axes) or scalar reciprocal."""
        if self.ndim == 0:
            return self.reciprocal()
        return jet_inverse(self)

    def det(self) -> "Jet":
        n = self.shape[-1]
        if self.shape[-2] != n:
            raise ValueError("det needs a square matrix")
        if n > 3 and self.ndim == 2:
            return _det_by_log(self)
        total = None
        for perm in itertools.permutations(range(n)):
            term = self[..., 0, perm[0]] if self.ndim > 2 else self[0, perm[0]]
            for i in range(1, n):
                term = term * (self[..., i, perm[i]] if self.ndim > 2 else self[i, perm[i]])
            if _perm_sign(perm) < 0:
                term = -term
            total = term if total is None else total + term
        return total


def _det_by_log(a: Jet) -> Jet:
    """``det(a0) * exp(tr log(I + a0^-1 (a - a0)))``; the log series terminates."""
    a0 = a.c[..., 0]
    X = Jet(a.ctx, np.einsum("ij,jkP->ikP", np.linalg.inv(a0), a.nilpotent().c))
    logdet = Jet.zeros(a.ctx)
    P = None
    for k in range(1, a.order + 1):
        P = X if P is None else P @ X
        logdet = logdet + P.trace() * ((-1) ** (k + 1) / k)
    return logdet.exp() * np.linalg.det(a0)


def _perm_sign(perm) -> int:
    sign = 1
    p = list(perm)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def _cauchy(a: Jet, b: Jet, mode) -> Jet:
    ia, ib, starts = _tables(a.ctx.nvars, a.ctx.order).mul
    A = a.c[..., ia]
    B = b.c[..., ib]
    if mode == "matmul":
        if a.ndim == 2 and b.ndim == 2:
            prod = np.einsum("ijP,jkP->ikP", A, B, optimize=False)
        elif a.ndim == 2 and b.ndim == 1:
            prod = np.einsum("ijP,jP->iP", A, B)
        elif a.ndim == 1 and b.ndim == 2:
            prod = np.einsum("jP,jkP->kP", A, B)
        elif a.ndim == 1 and b.ndim == 1:
            prod = np.einsum("jP,jP->P", A, B)
        else:
            prod = np.einsum("...ijP,...jkP->...ikP", A, B)
    else:
        prod = A * B
    return Jet(a.ctx, np.add.reduceat(prod, starts, axis=-1))


def jet_einsum(subscripts: str, a: Jet, b: Jet) -> Jet:
    """Cauchy-product contraction of two jets following an einsum signature
    over their leading axes, e.g. ``jet_einsum("aij,bji->ab", A, B)``."""
    a._check(b)
    ins, out = subscripts.split("->")
    sa, sb = ins.split(",")
    ia, ib, starts = _tables(a.ctx.nvars, a.ctx.order).mul
    prod = np.einsum(f"{sa}Z,{sb}Z->{out}Z", a.c[..., ia], b.c[..., ib])
    return Jet(a.ctx, np.add.reduceat(prod, starts, axis=-1))


# ---------------------------------------------------------------------------
# helpers


def variables(ctx: JetContext, point) -> Jet:
    """Coordinate jets ``point_i + t_i`` as a jet vector of shape ``(nvars,)``."""
    point = np.asarray(point, dtype=complex)
    n = ctx.nvars
    if point.shape != (n,):
        raise ValueError("point dimension does not match the context")
    c = np.zeros((n, ctx.size), dtype=complex)
    c[:, 0] = point
    if ctx.order >= 1:
        c[np.arange(n), 1 + np.arange(n)] = 1.0
    return Jet(ctx, c)


def constant(ctx: JetContext, value) -> Jet:
    return Jet.const(ctx, value)


def concat(jets, axis: int = 0) -> Jet:
    jets = list(jets)
    ctx = jets[0].ctx
    for j in jets[1:]:
        jets[0]._check(j)
    axis = axis if axis >= 0 else axis - 1
    return Jet(ctx, np.concatenate([j.c for j in jets], axis=axis))


def stack(jets, axis: int = 0) -> Jet:
    jets = list(jets)
    ctx = jets[0].ctx
    for j in jets[1:]:
        jets[0]._check(j)
    axis = axis if axis >= 0 else axis - 1
    return Jet(ctx, np.stack([j.c for j in jets], axis=axis))


def compose(outer: Jet, inner: Jet) -> Jet:
    """Chain rule: evaluate ``outer`` along the curve described by ``inner``.

    ``outer`` is a jet in ``k`` variables expanded at the point ``inner.value``;
    ``inner`` is a jet vector of shape ``(k,)`` in another context.  Only the
    displacement ``inner - inner.value`` enters, so the result is
    ``sum_a outer_a * (inner - inner.value)**a`` truncated at
    ``min(outer.order, inner.order)``.
    """
    k = outer.ctx.nvars
    if inner.shape != (k,):
        raise ValueError("inner jet must be a vector with one entry per outer variable")
    order = min(outer.order, inner.order)
    ictx = inner.ctx.truncated(order)
    inner = inner.truncate(order)
    inner = inner.nilpotent()
    tab = _tables(k, outer.order)
    M = tab.degree_start[order + 1]
    # monomials inner**a for |a| <= order, built degree by degree
    monos = np.zeros((M, ictx.size), dtype=complex)
    monos[0, 0] = 1.0
    if order >= 1:
        monos[1 : 1 + k] = inner.c
    for d in range(2, order + 1):
        lo, hi = tab.degree_start[d], tab.degree_start[d + 1]
        e = tab.exps[lo:hi].astype(np.int64)
        # peel off the last variable present in each monomial
        last = k - 1 - np.argmax(e[:, ::-1] > 0, axis=1)
        parent = e.copy()
        parent[np.arange(len(e)), last] -= 1
        pr = tab.ranks_of(parent)
        prod = Jet(ictx, monos[pr]) * Jet(ictx, inner.c[last])
        monos[lo:hi] = prod.c
    oc = outer.c[..., :M]
    return Jet(ictx, np.tensordot(oc, monos, axes=([-1], [0])))


# ---------------------------------------------------------------------------
# named entry points


def jet_arith(a: Jet, b: Jet, op: str) -> Jet:
    if not isinstance(a, Jet) or not isinstance(b, Jet):
        raise TypeError("jet_arith expects two jets")
    a._check(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown jet operation {op!r}")


def jet_inverse(a: Jet) -> Jet:
    """Multiplicative inverse of a scalar jet, or matrix inverse of a square jet matrix."""
    if a.ndim == 0:
        return a.reciprocal()
    n = a.shape[-1]
    if a.shape[-2] != n:
        raise ValueError("matrix inverse needs a square matrix")
    a0 = a.c[..., 0]
    cond = np.linalg.cond(a0)
    if not np.all(np.isfinite(cond)) or np.any(cond > 1e14):
        raise np.linalg.LinAlgError("constant block of the jet matrix is singular")
    a0inv = np.linalg.inv(a0)
    X = -(Jet(a.ctx, np.einsum("...ij,...jkP->...ikP", a0inv, a.nilpotent().c)))
    eye = np.broadcast_to(np.eye(n, dtype=complex), a0.shape)
    S = Jet.const(a.ctx, eye)
    # Neumann series terminates: X has no constant term
    for _ in range(a.order):
        S = X @ S + eye
    return S @ a0inv


def jet_expm(a: Jet) -> Jet:
    """Matrix exponential by scaling and squaring of a truncated Taylor series."""
    n = a.shape[-1]
    a0 = a.c[..., 0]
    norm = np.max(np.abs(a0).sum(axis=-1)) if a0.size else 0.0
    s = 0 if norm <= 0.25 else int(math.ceil(math.log2(norm / 0.25)))
    B = a * (2.0 ** -s)
    eye = np.eye(n, dtype=complex)
    # the nilpotent part needs order terms; the constant block converges in 13 more
    K = a.order + 13 if norm > 0 else a.order
    T = Jet.const(a.ctx, eye)
    for k in range(K, 0, -1):
        T = (B @ T) * (1.0 / k) + eye
    for _ in range(s):
        T = T @ T
    return T


def jet_sqrtm(a: Jet) -> Jet:
    """Principal square root of a jet matrix with Hermitian positive-definite constant block."""
    a0 = a.c[..., 0]
    w, Q = np.linalg.eigh(a0)
    if np.any(w <= 0):
        raise np.linalg.LinAlgError("constant block is not positive definite")
    sig = np.sqrt(w)
    denom = sig[:, None] + sig[None, :]
    Qh = Q.conj().T
    S = Jet.const(a.ctx, (Q * sig) @ Qh)
    for _ in range(a.order):
        R = a - S @ S
        Rt = Qh @ R @ Q
        E = Jet(a.ctx, Rt.c / denom[..., None])
        S = S + Q @ E @ Qh
    return S


def jet_extract(a: Jet, idx) -> complex:
    return a.extract(idx)


def jet_matrix_ops(A: Jet, B: Jet | None, op: str) -> Jet:
    if op == "mul":
        if B is None:
            raise ValueError("mul needs two operands")
        if A.shape[-1] != B.shape[-2 if B.ndim >= 2 else -1]:
            raise ValueError(f"dimension mismatch {A.shape} @ {B.shape}")
        return A @ B
    if op == "inverse":
        return jet_inverse(A)
    if op == "exp_truncated":
        if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
            raise ValueError("exp needs a square matrix")
        return jet_expm(A)
    raise ValueError(f"unknown matrix operation {op!r}")
