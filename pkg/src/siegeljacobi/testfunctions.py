"""Small expression trees over frame coordinates, evaluable on floats or jets."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .frames import CoordFrame
from .jetring import Jet

__all__ = ["Expr", "Const", "Coord", "Add", "Mul", "Pow", "Exp", "Recip", "TestFunction", "standard_library"]


class Expr:
    def __call__(self, X):
        raise NotImplementedError

    def __add__(self, other):
        return Add((self, _lift(other)))

    __radd__ = __add__

    def __mul__(self, other):
        return Mul((self, _lift(other)))

    __rmul__ = __mul__

    def __sub__(self, other):
        return Add((self, Mul((Const(-1.0), _lift(other)))))

    def __pow__(self, k: int):
        return Pow(self, int(k))


def _lift(v) -> Expr:
    return v if isinstance(v, Expr) else Const(float(v))


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def __call__(self, X):
        return self.value

    def __str__(self):
        return f"{self.value:g}"


@dataclass(frozen=True)
class Coord(Expr):
    index: int
    name: str

    def __call__(self, X):
        return X[self.index]

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Add(Expr):
    terms: tuple

    def __call__(self, X):
        out = 0.0
        for t in self.terms:
            out = t(X) + out
        return out

    def __str__(self):
        return "(" + " + ".join(map(str, self.terms)) + ")"


@dataclass(frozen=True)
class Mul(Expr):
    factors: tuple

    def __call__(self, X):
        out = 1.0
        for t in self.factors:
            out = t(X) * out
        return out

    def __str__(self):
        return "*".join(map(str, self.factors))


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    k: int

    def __call__(self, X):
        return self.base(X) ** self.k

    def __str__(self):
        return f"{self.base}^{self.k}"


@dataclass(frozen=True)
class Exp(Expr):
    arg: Expr

    def __call__(self, X):
        v = self.arg(X)
        return v.exp() if isinstance(v, Jet) else np.exp(v)

    def __str__(self):
        return f"exp({self.arg})"


@dataclass(frozen=True)
class Recip(Expr):
    """``1/arg``; only used where ``arg`` stays away from zero on the model."""

    arg: Expr

    def __call__(self, X):
        return 1.0 / self.arg(X)

    def __str__(self):
        return f"1/({self.arg})"


@dataclass(frozen=True)
class TestFunction:
    """A named smooth function of frame coordinates; call it on a coordinate vector or jet."""

    __test__ = False  # keep pytest from collecting it

    name: str
    expr: Expr

    def __call__(self, X):
        v = self.expr(X)
        if isinstance(X, Jet) and not isinstance(v, Jet):
            v = Jet.const(X.ctx, v)
        return v


def _det_expr(M) -> Expr:
    k = len(M)
    terms = []
    for perm in itertools.permutations(range(k)):
        inv = sum(1 for a in range(k) for b in range(a + 1, k) if perm[a] > perm[b])
        prod = Mul(tuple(M[i][perm[i]] for i in range(k)))
        terms.append(prod if inv % 2 == 0 else Mul((Const(-1.0), prod)))
    return Add(tuple(terms))


def standard_library(frame: CoordFrame) -> list[TestFunction]:
    """At least a dozen smooth functions exercising every coordinate block."""
    C = [Coord(i, nm) for i, nm in enumerate(frame.names)]
    N = frame.dim
    sq = [C[i] for i in range(frame.re_sym.start, frame.re_sym.stop)]
    im_sq = [C[i] for i in range(frame.im_sym.start, frame.im_sym.stop)]
    rect = [C[i] for i in range(frame.re_rect.start, frame.im_rect.stop)]
    S = frame.sym_index
    n = frame.n
    Ymat = [[im_sq[S[i, j]] for j in range(n)] for i in range(n)]
    trace_im = Add(tuple(Ymat[i][i] for i in range(n)))
    w1 = [0.3 * (-1) ** i * (1 + i % 3) / 2 for i in range(N)]
    w2 = [0.25 * np.cos(1.7 * i + 0.4) for i in range(N)]
    lin1 = Add(tuple(Const(w) * c for w, c in zip(w1, C)))
    lin2 = Add(tuple(Const(w) * c for w, c in zip(w2, C)))
    zsq = Add(tuple(c**2 for c in rect)) if rect else Const(0.0)
    first, last = C[0], C[-1]
    # functions touching every coordinate come first, so short sample runs
    # still exercise all blocks
    out = [
        TestFunction("exp(lin1)", Exp(lin1)),
        TestFunction("exp(lin2)", Exp(lin2)),
        TestFunction("lin1*lin2^2", lin1 * lin2**2),
        TestFunction(f"{first}^2", first**2),
        TestFunction(f"{first}*{C[1]}", first * C[1]),
        TestFunction(f"{C[1]}^3", C[1] ** 3),
        TestFunction(f"{first}^2*{last}^2", first**2 * last**2),
        TestFunction(f"{last}^4", last**4),
    ]
    if frame.model == "D":
        # bounded analogues: entries of W lie in the unit disk
        wsq = Add(tuple(c**2 for c in sq + im_sq))
        out += [
            TestFunction("tr Im W", trace_im),
            TestFunction("1/(1+nsym-|W|^2)", Recip(Const(1.0 + frame.nsym) - wsq)),
        ]
    else:
        out += [
            TestFunction("tr Y", trace_im),
            TestFunction("1/det Y", Recip(_det_expr(Ymat))),
        ]
    if rect:
        out += [
            TestFunction("|Z|^2", zsq),
            TestFunction("1/(1+|Z|^2)", Recip(1.0 + zsq)),
            TestFunction("exp(lin1)*|Z|^2", Exp(lin1) * zsq),
            TestFunction(f"tr*{first}*{rect[0]}", trace_im * first * rect[0]),
        ]
    else:
        out += [
            TestFunction(f"{first}*{C[1]}^2", first * C[1] ** 2),
            TestFunction("1/(1+x^2)", Recip(1.0 + first**2)),
            TestFunction("exp(lin1)*tr", Exp(lin1) * trace_im),
            TestFunction(f"(lin2+{first})^3", (lin2 + first) ** 3),
        ]
    return out
