"""Real coordinate frames for the three models.

Coordinates are ordered as: real parts of the upper triangle of the square
block (row-major), imaginary parts of the same, then real parts of the
``m x n`` block (row-major), then its imaginary parts.  For the upper half
space model the names are ``x_ij, y_ij, u_kl, v_kl``; the disk model uses
``a_ij, b_ij`` for ``W`` and ``c_kl, d_kl`` for ``eta``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import groups as grp
from .jetring import Jet, JetContext, concat, variables

__all__ = ["CoordFrame", "MODELS"]

MODELS = ("H", "HC", "D")
_NAMES = {"H": "xyuv", "HC": "xyuv", "D": "abcd"}


@dataclass(frozen=True)
class CoordFrame:
    """Coordinate system on ``H_n`` (``model="H"``), ``H_{n,m}`` (``"HC"``) or ``D_{n,m}`` (``"D"``)."""

    model: str
    n: int
    m: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.n < 1 or self.m < 0:
            raise ValueError("need n >= 1 and m >= 0")
        if self.model == "H" and self.m != 0:
            raise ValueError("the H model has no Z block; use HC for m > 0")

    # -- layout ---------------------------------------------------------------

    @property
    def nsym(self) -> int:
        return self.n * (self.n + 1) // 2

    @property
    def dim(self) -> int:
        return 2 * self.nsym + 2 * self.m * self.n

    @cached_property
    def upper(self) -> tuple[np.ndarray, np.ndarray]:
        return np.triu_indices(self.n)

    @cached_property
    def sym_index(self) -> np.ndarray:
        """``n x n`` array mapping ``(i, j)`` to the position of ``(min, max)`` in the upper list."""
        S = np.zeros((self.n, self.n), dtype=int)
        for r, (i, j) in enumerate(zip(*self.upper)):
            S[i, j] = S[j, i] = r
        return S

    @cached_property
    def names(self) -> tuple[str, ...]:
        a, b, c, d = _NAMES[self.model]
        up = [f"{i + 1}{j + 1}" for i, j in zip(*self.upper)]
        rect = [f"{k + 1}{l + 1}" for k in range(self.m) for l in range(self.n)]
        return tuple([a + s for s in up] + [b + s for s in up] + [c + s for s in rect] + [d + s for s in rect])

    def index(self, name: str) -> int:
        return self.names.index(name)

    @property
    def re_sym(self) -> slice:
        return slice(0, self.nsym)

    @property
    def im_sym(self) -> slice:
        return slice(self.nsym, 2 * self.nsym)

    @property
    def re_rect(self) -> slice:
        return slice(2 * self.nsym, 2 * self.nsym + self.m * self.n)

    @property
    def im_rect(self) -> slice:
        return slice(2 * self.nsym + self.m * self.n, self.dim)

    # -- coordinates <-> matrices -------------------------------------------

    def matrices(self, vec):
        """Split a coordinate vector (numeric or jet) into ``(square, rect)`` complex matrices."""
        S = self.sym_index
        K = np.arange(self.m * self.n).reshape(self.m, self.n)
        if isinstance(vec, Jet):
            x = vec[self.re_sym]
            y = vec[self.im_sym]
            u = vec[self.re_rect]
            v = vec[self.im_rect]
            return x[S] + y[S] * 1j, u[K] + v[K] * 1j
        vec = np.asarray(vec, dtype=float)
        x, y = vec[self.re_sym], vec[self.im_sym]
        u, v = vec[self.re_rect], vec[self.im_rect]
        return x[S] + 1j * y[S], u[K] + 1j * v[K]

    def coords(self, square, rect):
        iu = self.upper
        if isinstance(square, Jet) or isinstance(rect, Jet):
            ctx = square.ctx if isinstance(square, Jet) else rect.ctx
            sq = square if isinstance(square, Jet) else Jet.const(ctx, square)
            rc = rect if isinstance(rect, Jet) else Jet.const(ctx, rect)
            flat = rc.reshape(self.m * self.n)
            return concat([sq.real[iu], sq.imag[iu], flat.real, flat.imag])
        square = np.asarray(square)
        rect = np.asarray(rect).reshape(-1)
        return np.concatenate([square.real[iu], square.imag[iu], rect.real, rect.imag]).astype(float)

    # -- points --------------------------------------------------------------

    def to_point(self, vec):
        a, b = self.matrices(vec)
        return grp.DPoint(a, b) if self.model == "D" else grp.HPoint(a, b)

    def from_point(self, p) -> np.ndarray:
        if self.model == "D":
            return self.coords(p.W, p.eta)
        return self.coords(p.Omega, p.Z)

    def jet_point(self, vec, order: int):
        """Point whose coordinates are the jets ``vec_i + t_i`` in this frame's context."""
        return self.to_point(self.variables(vec, order))

    def context(self, order: int) -> JetContext:
        return JetContext(self.names, order)

    def variables(self, vec, order: int) -> Jet:
        return variables(self.context(order), np.asarray(vec, dtype=float))

    def base_point(self) -> np.ndarray:
        if self.model == "D":
            return np.zeros(self.dim)
        return self.from_point(grp.base_point(self.n, self.m))

    def random_point(self, seed, spread: float = 0.5) -> np.ndarray:
        if self.model == "D":
            return self.from_point(grp.random_dpoint(seed, self.n, self.m, spread))
        return self.from_point(grp.random_hpoint(seed, self.n, self.m, spread))

    def check_point(self, vec) -> None:
        """Raise :class:`~siegeljacobi.groups.GroupError` when ``vec`` lies outside the model."""
        self.to_point(vec)

    # -- group action in coordinates ------------------------------------------

    def act(self, g, point):
        """Act on a point object (numeric or jet); ``g`` may be a Jacobi or star element."""
        if self.model == "D":
            s = g if isinstance(g, grp.StarJacobiElement) else grp.to_star(g)
            return grp.act_D(s, point)
        if isinstance(g, grp.StarJacobiElement):
            g = grp.from_star(g)
        return grp.act_H(g, point)

    def act_coords(self, g, vec):
        return self.from_point(self.act(g, self.to_point(vec)))

    def random_group_element(self, seed, scale: float = 0.5):
        g = grp.random_jacobi(seed, scale, self.n, self.m)
        return grp.to_star(g) if self.model == "D" else g

    # -- tangent data for metrics ---------------------------------------------

    @cached_property
    def tangent_basis(self) -> tuple[np.ndarray, np.ndarray]:
        """Differentials of the two matrix blocks along each coordinate direction."""
        E = np.eye(self.dim)
        sq = np.zeros((self.dim, self.n, self.n), dtype=complex)
        rc = np.zeros((self.dim, self.m, self.n), dtype=complex)
        for a in range(self.dim):
            sq[a], rc[a] = self.matrices(E[a])
        return sq, rc
