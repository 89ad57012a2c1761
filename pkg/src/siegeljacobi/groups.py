"""Symplectic, Heisenberg and Jacobi groups and their actions.

Conventions
-----------
* A Jacobi group element is ``(M, (lam, mu; kappa))`` with ``M = [[A, B], [C, D]]``
  in ``Sp(n, R)``, ``lam, mu`` real ``m x n`` and ``kappa`` real ``m x m``.
* Products follow the semidirect law: with ``(lt, mt) = (lam, mu) M'``,
  ``g g' = (M M', (lt + lam', mt + mu'; kappa + kappa' + lt mu'^T - mt lam'^T))``.
* ``m = 0`` is allowed and gives the Siegel upper half space on its own.

Every action and transform below is written once with ``@``, ``.T`` and
``inv`` so it also runs on jet matrices; validation only happens for plain
numpy inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _generic as G
from .jetring import Jet, concat, jet_expm

__all__ = [
    "GroupError",
    "DegenerateInputError",
    "SymplecticMatrix",
    "HeisenbergElement",
    "JacobiElement",
    "JacobiAlgebraElement",
    "StarJacobiElement",
    "HPoint",
    "DPoint",
    "symplectic_form",
    "identity",
    "group_mul",
    "group_inverse",
    "act_H",
    "to_star",
    "from_star",
    "star_mul",
    "act_D",
    "cayley",
    "cayley_inv",
    "embed_sp_mn",
    "embed_algebra",
    "decode_sp_mn",
    "jacobi_exp",
    "random_algebra",
    "random_jacobi",
    "random_stabilizer",
    "random_hpoint",
    "random_dpoint",
    "coset_representative",
    "base_point",
]

SYMPLECTIC_TOL = 1e-10
HEISENBERG_TOL = 1e-12
COND_LIMIT = 1e12


class GroupError(ValueError):
    """Invalid group element or size mismatch."""


class DegenerateInputError(ValueError):
    """A matrix that must be inverted is numerically singular."""


def symplectic_form(n: int) -> np.ndarray:
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


def _scaled(x) -> float:
    return max(1.0, float(np.max(np.abs(x)))) if np.size(x) else 1.0


def _checked_inv(a, what: str):
    if isinstance(a, Jet):
        c = np.linalg.cond(a.c[..., 0]) if a.shape[-1] else 1.0
        if not np.isfinite(c) or c > COND_LIMIT:
            raise DegenerateInputError(f"{what} is numerically singular (cond={c:.3g})")
        return a.inv()
    c = np.linalg.cond(a) if a.shape[-1] else 1.0
    if not np.isfinite(c) or c > COND_LIMIT:
        raise DegenerateInputError(f"{what} is numerically singular (cond={c:.3g})")
    return np.linalg.inv(a)


def _bmat(rows):
    """``np.block`` that also accepts jet blocks (numeric blocks are promoted)."""
    ctx = None
    for row in rows:
        for b in row:
            if isinstance(b, Jet):
                ctx = b.ctx
    if ctx is None:
        return np.block(rows)
    lifted = [[b if isinstance(b, Jet) else Jet.const(ctx, b) for b in row] for row in rows]
    return concat([concat(r, axis=1) for r in lifted], axis=0)


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True)
class SymplecticMatrix:
    """Element of Sp(n, R) as a ``2n x 2n`` matrix."""

    M: object

    def __post_init__(self):
        M = self.M
        if isinstance(M, Jet):
            return
        M = np.asarray(M, dtype=float)
        object.__setattr__(self, "M", M)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
            raise GroupError(f"symplectic matrix must be 2n x 2n, got {M.shape}")
        J = symplectic_form(M.shape[0] // 2)
        defect = np.max(np.abs(M.T @ J @ M - J)) if M.size else 0.0
        if defect > SYMPLECTIC_TOL * _scaled(M) ** 2:
            raise GroupError(f"matrix is not symplectic (defect {defect:.3g})")

    @property
    def n(self) -> int:
        return self.M.shape[0] // 2

    @property
    def A(self):
        return self.M[: self.n, : self.n]

    @property
    def B(self):
        return self.M[: self.n, self.n :]

    @property
    def C(self):
        return self.M[self.n :, : self.n]

    @property
    def D(self):
        return self.M[self.n :, self.n :]

    @classmethod
    def from_blocks(cls, A, B, C, D) -> "SymplecticMatrix":
        return cls(_bmat([[A, B], [C, D]]))

    def act(self, Omega):
        """Generalized linear fractional map ``(A W + B)(C W + D)^-1``."""
        return _moebius(self.A, self.B, self.C, self.D, Omega)[0]


@dataclass(frozen=True)
class HeisenbergElement:
    """Triple ``(lam, mu; kappa)`` with ``kappa + mu lam^T`` symmetric."""

    lam: object
    mu: object
    kappa: object

    def __post_init__(self):
        if any(isinstance(x, Jet) for x in (self.lam, self.mu, self.kappa)):
            return
        lam = np.asarray(self.lam, dtype=float)
        mu = np.asarray(self.mu, dtype=float)
        kappa = np.asarray(self.kappa, dtype=float)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "kappa", kappa)
        if lam.shape != mu.shape or lam.ndim != 2 or kappa.shape != (lam.shape[0],) * 2:
            raise GroupError("Heisenberg blocks have inconsistent shapes")
        S = kappa + mu @ lam.T
        if S.size and np.max(np.abs(S - S.T)) > HEISENBERG_TOL * _scaled(S):
            raise GroupError("kappa + mu lam^T is not symmetric")

    @property
    def m(self) -> int:
        return self.lam.shape[0]


@dataclass(frozen=True)
class JacobiElement:
    """Element ``(M, (lam, mu; kappa))`` of the Jacobi group."""

    M: SymplecticMatrix
    h: HeisenbergElement

    def __post_init__(self):
        if not isinstance(self.M, SymplecticMatrix):
            object.__setattr__(self, "M", SymplecticMatrix(self.M))
        if self.h.lam.shape[-1] != self.M.n:
            raise GroupError("Heisenberg part has the wrong number of columns")

    @classmethod
    def make(cls, M, lam, mu, kappa) -> "JacobiElement":
        return cls(SymplecticMatrix(M), HeisenbergElement(lam, mu, kappa))

    @property
    def n(self) -> int:
        return self.M.n

    @property
    def m(self) -> int:
        return self.h.lam.shape[0]

    A = property(lambda self: self.M.A)
    B = property(lambda self: self.M.B)
    C = property(lambda self: self.M.C)
    D = property(lambda self: self.M.D)
    lam = property(lambda self: self.h.lam)
    mu = property(lambda self: self.h.mu)
    kappa = property(lambda self: self.h.kappa)


@dataclass(frozen=True)
class JacobiAlgebraElement:
    """Lie algebra element ``(X, (lam', mu'; kappa'))`` with ``X`` in sp(n, R)."""

    X: object
    lam: object
    mu: object
    kappa: object

    def __post_init__(self):
        if any(isinstance(v, Jet) for v in (self.X, self.lam, self.mu, self.kappa)):
            return
        X = np.asarray(self.X, dtype=float)
        n = X.shape[0] // 2
        J = symplectic_form(n)
        if X.size and np.max(np.abs(X.T @ J + J @ X)) > 1e-10 * _scaled(X):
            raise GroupError("X is not in sp(n, R)")
        k = np.asarray(self.kappa, dtype=float)
        if k.size and np.max(np.abs(k - k.T)) > 1e-12 * _scaled(k):
            raise GroupError("kappa' must be symmetric")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "lam", np.asarray(self.lam, dtype=float))
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float))
        object.__setattr__(self, "kappa", k)

    @property
    def n(self) -> int:
        return self.X.shape[0] // 2

    @property
    def m(self) -> int:
        return self.lam.shape[0]

    def __mul__(self, s):
        return JacobiAlgebraElement(self.X * s, self.lam * s, self.mu * s, self.kappa * s)

    __rmul__ = __mul__


@dataclass(frozen=True)
class StarJacobiElement:
    """Element of the conjugated group acting on the disk model.

    Stores ``P, Q`` (``n x n`` complex), ``xi = (lam + i mu) / 2`` and the real
    central part ``kappa``.
    """

    P: object
    Q: object
    xi: object
    kappa: object

    def __post_init__(self):
        if any(isinstance(v, Jet) for v in (self.P, self.Q, self.xi)):
            return
        for name in ("P", "Q", "xi"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=complex))
        object.__setattr__(self, "kappa", np.asarray(self.kappa, dtype=float))
        from_star(self)  # raises if the element does not come from a real one

    @property
    def n(self) -> int:
        return self.P.shape[0]

    @property
    def m(self) -> int:
        return self.xi.shape[0]


@dataclass(frozen=True)
class HPoint:
    """Point ``(Omega, Z)`` of the Siegel-Jacobi space (``Z`` is ``m x n``)."""

    Omega: object
    Z: object

    def __post_init__(self):
        if isinstance(self.Omega, Jet) or isinstance(self.Z, Jet):
            return
        Om = np.asarray(self.Omega, dtype=complex)
        Z = np.asarray(self.Z, dtype=complex)
        object.__setattr__(self, "Omega", Om)
        object.__setattr__(self, "Z", Z)
        if Om.ndim != 2 or Om.shape[0] != Om.shape[1] or Z.ndim != 2 or Z.shape[1] != Om.shape[0]:
            raise GroupError("HPoint blocks have inconsistent shapes")
        if np.max(np.abs(Om - Om.T)) > 1e-12 * _scaled(Om):
            raise GroupError("Omega is not symmetric")
        if np.min(np.linalg.eigvalsh((Om.imag + Om.imag.T) / 2)) <= 0:
            raise GroupError("Im Omega is not positive definite")

    @property
    def n(self) -> int:
        return self.Omega.shape[0]

    @property
    def m(self) -> int:
        return self.Z.shape[0]

    X = property(lambda self: self.Omega.real)
    Y = property(lambda self: self.Omega.imag)
    U = property(lambda self: self.Z.real)
    V = property(lambda self: self.Z.imag)


@dataclass(frozen=True)
class DPoint:
    """Point ``(W, eta)`` of the generalized unit disk times ``C^(m,n)``."""

    W: object
    eta: object

    def __post_init__(self):
        if isinstance(self.W, Jet) or isinstance(self.eta, Jet):
            return
        W = np.asarray(self.W, dtype=complex)
        eta = np.asarray(self.eta, dtype=complex)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "eta", eta)
        if W.ndim != 2 or W.shape[0] != W.shape[1] or eta.ndim != 2 or eta.shape[1] != W.shape[0]:
            raise GroupError("DPoint blocks have inconsistent shapes")
        if np.max(np.abs(W - W.T)) > 1e-12 * _scaled(W):
            raise GroupError("W is not symmetric")
        n = W.shape[0]
        R = np.eye(n) - W.conj() @ W
        if np.min(np.linalg.eigvalsh((R + R.conj().T) / 2)) <= 0:
            raise GroupError("I - conj(W) W is not positive definite")

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @property
    def m(self) -> int:
        return self.eta.shape[0]


# ---------------------------------------------------------------------------
# group law


def identity(n: int, m: int) -> JacobiElement:
    return JacobiElement.make(np.eye(2 * n), np.zeros((m, n)), np.zeros((m, n)), np.zeros((m, m)))


def _check_sizes(*gs):
    if len({(g.n, g.m) for g in gs}) != 1:
        raise GroupError("group elements have different (n, m)")


def group_mul(g1: JacobiElement, g2: JacobiElement) -> JacobiElement:
    _check_sizes(g1, g2)
    lt = g1.lam @ g2.A + g1.mu @ g2.C
    mt = g1.lam @ g2.B + g1.mu @ g2.D
    kappa = g1.kappa + g2.kappa + lt @ g2.mu.T - mt @ g2.lam.T
    return JacobiElement(
        SymplecticMatrix(g1.M.M @ g2.M.M),
        HeisenbergElement(lt + g2.lam, mt + g2.mu, kappa),
    )


def group_inverse(g: JacobiElement) -> JacobiElement:
    n = g.n
    J = symplectic_form(n)
    Minv = -J @ g.M.M.T @ J
    lam_i = -(g.lam @ Minv[:n, :n] + g.mu @ Minv[n:, :n])
    mu_i = -(g.lam @ Minv[:n, n:] + g.mu @ Minv[n:, n:])
    # kappa from g g^-1 = e: 0 = kappa + kappa_i + lt mu_i^T - mt lam_i^T with (lt, mt) = -(lam_i, mu_i)
    kappa_i = -g.kappa + lam_i @ mu_i.T - mu_i @ lam_i.T
    return JacobiElement.make(Minv, lam_i, mu_i, kappa_i)


def _moebius(A, B, C, D, Omega):
    den = _checked_inv(C @ Omega + D, "C Omega + D")
    return (A @ Omega + B) @ den, den


def act_H(g: JacobiElement, p: HPoint) -> HPoint:
    """Action ``(M.Omega, (Z + lam Omega + mu)(C Omega + D)^-1)``."""
    if g.n != p.n or g.m != p.m:
        raise GroupError("element and point have different sizes")
    Om, den = _moebius(g.A, g.B, g.C, g.D, p.Omega)
    Om = (Om + Om.T) * 0.5
    Z = (p.Z + g.lam @ p.Omega + g.mu) @ den
    return HPoint(Om, Z)


# ---------------------------------------------------------------------------
# embedding into Sp(m+n, R) and the exponential map


def embed_sp_mn(g: JacobiElement):
    """Block matrix of size ``2(m+n)`` in coordinate order ``(n, m, n, m)``."""
    n, m = g.n, g.m
    A, B, C, D = g.A, g.B, g.C, g.D
    lam, mu, kappa = g.lam, g.mu, g.kappa
    Z_nm, Z_mn, Z_mm = np.zeros((n, m)), np.zeros((m, n)), np.zeros((m, m))
    return _bmat([
        [A, Z_nm, B, A @ mu.T - B @ lam.T],
        [lam, np.eye(m), mu, kappa],
        [C, Z_nm, D, C @ mu.T - D @ lam.T],
        [Z_mn, Z_mm, Z_mn, np.eye(m)],
    ])


def embed_algebra(X: JacobiAlgebraElement):
    n, m = X.n, X.m
    a, b = X.X[:n, :n], X.X[:n, n:]
    c, d = X.X[n:, :n], X.X[n:, n:]
    Z_nm, Z_mn, Z_mm = np.zeros((n, m)), np.zeros((m, n)), np.zeros((m, m))
    return _bmat([
        [a, Z_nm, b, X.mu.T],
        [X.lam, Z_mm, X.mu, X.kappa],
        [c, Z_nm, d, -X.lam.T],
        [Z_mn, Z_mm, Z_mn, Z_mm],
    ])


def decode_sp_mn(E, n: int, m: int, check: bool = True) -> JacobiElement:
    """Inverse of :func:`embed_sp_mn`; verifies the fixed blocks when ``check``."""
    A = E[:n, :n]
    B = E[:n, n + m : 2 * n + m]
    C = E[n + m : 2 * n + m, :n]
    D = E[n + m : 2 * n + m, n + m : 2 * n + m]
    lam = E[n : n + m, :n]
    mu = E[n : n + m, n + m : 2 * n + m]
    kappa = E[n : n + m, 2 * n + m :]
    if check and not isinstance(E, Jet):
        ref = embed_sp_mn(JacobiElement(SymplecticMatrix(np.block([[A, B], [C, D]])),
                                        HeisenbergElement(lam, mu, kappa)))
        if np.max(np.abs(ref - E)) > 1e-9 * _scaled(E):
            raise RuntimeError("embedded Jacobi matrix has an inconsistent block layout")
    return JacobiElement(SymplecticMatrix(_bmat([[A, B], [C, D]])), HeisenbergElement(lam, mu, kappa))


def jacobi_exp(X: JacobiAlgebraElement) -> JacobiElement:
    """Group exponential computed in the ``Sp(m+n, R)`` embedding."""
    E = embed_algebra(X)
    if isinstance(E, Jet):
        return decode_sp_mn(jet_expm(E), X.n, X.m, check=False)
    return decode_sp_mn(scipy.linalg.expm(E), X.n, X.m)


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _sym(rng, k):
    S = rng.standard_normal((k, k))
    return (S + S.T) / 2


def random_algebra(seed, n: int, m: int, scale: float = 0.5) -> JacobiAlgebraElement:
    rng = _rng(seed)
    a = rng.standard_normal((n, n))
    X = np.block([[a, _sym(rng, n)], [_sym(rng, n), -a.T]])
    lam = rng.standard_normal((m, n))
    mu = rng.standard_normal((m, n))
    kappa = _sym(rng, m)
    return JacobiAlgebraElement(scale * X, scale * lam, scale * mu, scale * kappa)


def random_jacobi(seed, scale: float = 0.5, n: int = 1, m: int = 1) -> JacobiElement:
    """Exponential of a Gaussian Lie algebra sample; ``scale`` multiplies every entry."""
    if scale < 0:
        raise ValueError("scale must be non-negative")
    return jacobi_exp(random_algebra(seed, n, m, scale))


def random_stabilizer(seed, n: int, m: int) -> JacobiElement:
    """Random element of the isotropy group of ``(i I, 0)``: unitary ``k`` and arbitrary ``kappa``."""
    rng = _rng(seed)
    H = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    u = scipy.linalg.expm(1j * (H + H.conj().T) / 2)
    A, B = u.real, u.imag
    return JacobiElement.make(np.block([[A, -B], [B, A]]), np.zeros((m, n)), np.zeros((m, n)), _sym(rng, m))


def base_point(n: int, m: int) -> HPoint:
    return HPoint(1j * np.eye(n), np.zeros((m, n), dtype=complex))


def random_hpoint(seed, n: int, m: int, spread: float = 0.5) -> HPoint:
    rng = _rng(seed)
    X = _sym(rng, n)
    Y = scipy.linalg.expm(spread * _sym(rng, n))
    Z = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
    return HPoint(X + 1j * Y, Z)


def random_dpoint(seed, n: int, m: int, spread: float = 0.5) -> DPoint:
    return cayley_inv(random_hpoint(seed, n, m, spread))


def coset_representative(p: HPoint) -> JacobiElement:
    """An element ``g`` with ``g . (i I, 0) = p`` built from ``Y^(1/2)``.

    Works on jet-valued points as well, which is what lets operators built
    from the group exponential be expanded around nearby points.
    """
    Om, Z = p.Omega, p.Z
    X, Y, U, V = Om.real, Om.imag, Z.real, Z.imag
    if isinstance(Y, Jet):
        Y = (Y + Y.T) * 0.5
    else:
        Y = (Y + Y.T) / 2
    R = G.sqrtm_spd(Y)
    Rinv = G.inv(R)
    n, m = p.n, p.m
    A, B, C, D = R, X @ Rinv, np.zeros((n, n)), Rinv
    lam = V @ Rinv
    mu = U @ Rinv
    kappa = -(mu @ lam.T)
    return JacobiElement(SymplecticMatrix.from_blocks(A, B, C, D), HeisenbergElement(lam, mu, kappa))


# ---------------------------------------------------------------------------
# the disk model


def to_star(g: JacobiElement) -> StarJacobiElement:
    A, B, C, D = g.A, g.B, g.C, g.D
    P = ((A + D) + 1j * (B - C)) * 0.5
    Q = ((A - D) - 1j * (B + C)) * 0.5
    xi = (g.lam + 1j * g.mu) * 0.5
    return StarJacobiElement(P, Q, xi, g.kappa)


def from_star(s: StarJacobiElement) -> JacobiElement:
    """Inverse of :func:`to_star` (validates that the blocks come from a real element)."""
    P, Q, xi = s.P, s.Q, s.xi
    if not isinstance(P, Jet):
        lam_im = np.max(np.abs(np.imag(s.kappa))) if np.size(s.kappa) else 0.0
        if lam_im > 1e-12:
            raise GroupError("kappa must be real")
    A = P.real + Q.real
    D = P.real - Q.real
    B = P.imag - Q.imag
    C = -P.imag - Q.imag
    return JacobiElement(SymplecticMatrix.from_blocks(A, B, C, D),
                         HeisenbergElement(xi.real * 2, xi.imag * 2, np.real(s.kappa)))


def star_mul(s1: StarJacobiElement, s2: StarJacobiElement) -> StarJacobiElement:
    """Product in the complexified semidirect product restricted to the star group."""
    P1, Q1, P2, Q2 = s1.P, s1.Q, s2.P, s2.Q
    P = P1 @ P2 + Q1 @ Q2.conj()
    Q = P1 @ Q2 + Q1 @ P2.conj()
    xi1, eta1 = s1.xi, s1.xi.conj()
    xi2, eta2 = s2.xi, s2.xi.conj()
    xt = xi1 @ P2 + eta1 @ Q2.conj()
    et = xi1 @ Q2 + eta1 @ P2.conj()
    zeta = -0.5j * (s1.kappa + s2.kappa) + xt @ eta2.T - et @ xi2.T
    return StarJacobiElement(P, Q, xt + xi2, np.real(2j * zeta))


def act_D(s: StarJacobiElement, p: DPoint) -> DPoint:
    """Action ``((P W + Q)(Qb W + Pb)^-1, (eta + xi W + xib)(Qb W + Pb)^-1)``."""
    if s.n != p.n or s.m != p.m:
        raise GroupError("element and point have different sizes")
    den = _checked_inv(s.Q.conj() @ p.W + s.P.conj(), "conj(Q) W + conj(P)")
    W = (s.P @ p.W + s.Q) @ den
    W = (W + W.T) * 0.5
    eta = (p.eta + s.xi @ p.W + s.xi.conj()) @ den
    return DPoint(W, eta)


def cayley(p: DPoint) -> HPoint:
    """Partial Cayley transform from the disk model to the upper half space model."""
    n = p.n
    R = _checked_inv(np.eye(n) - p.W, "I - W")
    Om = ((p.W + np.eye(n)) @ R) * 1j
    Om = (Om + Om.T) * 0.5
    return HPoint(Om, (p.eta @ R) * 2j)


def cayley_inv(q: HPoint) -> DPoint:
    n = q.n
    R = _checked_inv(q.Omega + 1j * np.eye(n), "Omega + i I")
    W = (q.Omega - 1j * np.eye(n)) @ R
    W = (W + W.T) * 0.5
    return DPoint(W, q.Z @ R)
