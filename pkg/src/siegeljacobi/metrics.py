"""Invariant Riemannian metrics as real matrices in frame coordinates.

Each metric is a sum of terms ``c * tr(M0 dX M1 conj(dY))`` where ``dX`` and
``dY`` are differentials of the matrix blocks (possibly transposed) and
``M0, M1`` depend on the point.  The real metric matrix is the symmetric
polarization of that quadratic form on coordinate tangent vectors.  Because
the point may carry jets, derivatives of the metric come for free; the
Laplace-Beltrami operator uses exactly that.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _generic as G
from .frames import CoordFrame
from .jetring import Jet, JetContext, jet_einsum, jet_inverse, variables

__all__ = [
    "MetricTensor",
    "metric_H",
    "metric_HC",
    "metric_D",
    "metric_D11_closed_form",
    "volume_H",
    "pullback",
    "cayley_coords",
    "laplace_beltrami",
    "IllConditionedMetric",
    "metric_to_json",
    "metric_to_csv",
]


class IllConditionedMetric(ValueError):
    """The metric matrix is too close to singular for a trustworthy Laplacian."""


# tangent kinds: square block, rect block, transposed rect block
_KINDS = ("sq", "rc", "rcT")


def _tangent(frame: CoordFrame, kind: str) -> np.ndarray:
    sq, rc = frame.tangent_basis
    return {"sq": sq, "rc": rc, "rcT": rc.transpose(0, 2, 1)}[kind]


def _term_matrix(frame, M0, kx, M1, ky):
    """``B[a, b] = tr(M0 dX_a M1 conj(dY_b))`` for numeric or jet ``M0, M1``."""
    X = _tangent(frame, kx)
    Yc = _tangent(frame, ky).conj()
    if isinstance(M0, Jet) or isinstance(M1, Jet):
        ctx = M0.ctx if isinstance(M0, Jet) else M1.ctx
        M0 = M0 if isinstance(M0, Jet) else Jet.const(ctx, M0)
        M1 = M1 if isinstance(M1, Jet) else Jet.const(ctx, M1)
        outer = jet_einsum("sp,qr->spqr", M0, M1)
        return Jet(ctx, np.einsum("spqrL,apq,brs->abL", outer.c, X, Yc, optimize=True))
    return np.einsum("sp,apq,qr,brs->ab", M0, X, M1, Yc, optimize=True)


def _assemble(frame, terms):
    total = None
    for coef, M0, kx, M1, ky in terms:
        B = _term_matrix(frame, M0, kx, M1, ky) * coef
        total = B if total is None else total + B
    sym = (total + total.T) * 0.5
    return sym.real


@dataclass(frozen=True)
class MetricTensor:
    """Metric on one model: ``evaluate(square, rect)`` returns the real matrix."""

    frame: CoordFrame
    A: float
    B: float
    terms: Callable = field(repr=False, compare=False)
    label: str = ""

    def evaluate(self, square, rect):
        return _assemble(self.frame, self.terms(square, rect, self.A, self.B))

    def __call__(self, vec) -> np.ndarray:
        a, b = self.frame.matrices(vec)
        return np.real(self.evaluate(a, b))

    def jet(self, vec, order: int) -> Jet:
        X = self.frame.variables(vec, order)
        g = self.evaluate(*self.frame.matrices(X))
        # constant-coefficient metrics come back as plain arrays
        return g if isinstance(g, Jet) else Jet.const(X.ctx, g)


def _check_params(A, B=1.0):
    if not (A > 0 and B > 0):
        raise ValueError("metric parameters must be positive")


# ---------------------------------------------------------------------------
# the metrics


def _upper_terms(Om, Z, A, B):
    Yi = G.inv(Om.imag)
    return [(A, Yi, "sq", Yi, "sq")]


def metric_H(n: int, A: float = 1.0) -> MetricTensor:
    """``A tr(Y^-1 dOmega Y^-1 dOmega-bar)`` on the Siegel upper half space."""
    _check_params(A)
    return MetricTensor(CoordFrame("H", n), A, 1.0, _upper_terms, f"H(n={n},A={A:g})")


def _jacobi_terms(Om, Z, A, B):
    n, m = Om.shape[-1], Z.shape[0]
    Yi = G.inv(Om.imag)
    V = Z.imag
    VYi = V @ Yi
    return [
        (A, Yi, "sq", Yi, "sq"),
        (B, VYi.T @ VYi, "sq", Yi, "sq"),
        (B, Yi, "rcT", np.eye(m), "rc"),
        (-B, VYi, "sq", Yi, "rcT"),
        (-B, Yi, "rcT", VYi, "sq"),
    ]


def metric_HC(n: int, m: int, A: float = 1.0, B: float = 1.0) -> MetricTensor:
    """The Jacobi-invariant metric on ``H_{n,m}`` with its ``V``-coupling terms."""
    _check_params(A, B)
    return MetricTensor(CoordFrame("HC", n, m), A, B, _jacobi_terms, f"HC(n={n},m={m},A={A:g},B={B:g})")


def _disk_terms(W, eta, A, B):
    n, m = W.shape[-1], eta.shape[0]
    I = np.eye(n)
    Wb, eb = W.conj(), eta.conj()
    L = G.inv(I - W @ Wb)    # (I - W Wb)^-1
    R = G.inv(I - Wb @ W)    # (I - Wb W)^-1
    Ai = G.inv(I - W)        # (I - W)^-1
    Abi = G.inv(I - Wb)      # (I - Wb)^-1
    ImW, ImWb = I - W, I - Wb
    ww = [
        (-1, L @ eta.T @ eta @ R @ Wb),
        (-1, W @ R @ eb.T @ eb @ L),
        (+1, L @ eta.T @ eb @ L),
        (+1, Abi @ eb.T @ eta @ Wb @ L),
        (+1, Abi @ ImW @ R @ eb.T @ eta @ R @ ImWb @ Ai),
        (-1, L @ ImW @ Abi @ eb.T @ eta @ Ai),
    ]
    terms = [
        (4 * A, L, "sq", R, "sq"),
        (4 * B, L, "rcT", np.eye(m), "rc"),
        (4 * B, (eta @ Wb - eb) @ L, "sq", R, "rcT"),
        (4 * B, L, "rcT", (eb @ W - eta) @ R, "sq"),
    ]
    terms += [(4 * B * s, M0, "sq", R, "sq") for s, M0 in ww]
    return terms


def metric_D(n: int, m: int, A: float = 1.0, B: float = 1.0) -> MetricTensor:
    """The invariant metric on the disk model, transcribed term by term."""
    _check_params(A, B)
    return MetricTensor(CoordFrame("D", n, m), A, B, _disk_terms, f"D(n={n},m={m},A={A:g},B={B:g})")


def _disk11_terms(W, eta, A, B):
    # the n = m = 1 specialization written with scalar coefficients (A = B = 1)
    w, e = W[0, 0], eta[0, 0]
    wb, ebar = w.conj(), e.conj()
    r = 1 - w * wb
    ww = 1 / r**2 + ((1 + w * wb) * e * ebar - wb * e * e - w * ebar * ebar) / r**3
    one = np.ones((1, 1))

    def mat(x):
        return x.reshape(1, 1) if isinstance(x, Jet) else np.array([[x]])

    return [
        (4, mat(ww), "sq", one, "sq"),
        (4, mat(1 / r), "rc", one, "rc"),
        (4, mat((e * wb - ebar) / r**2), "sq", one, "rc"),
        (4, mat((ebar * w - e) / r**2), "rc", one, "sq"),
    ]


def metric_D11_closed_form() -> MetricTensor:
    """The ``n = m = 1``, ``A = B = 1`` disk metric in its explicit scalar form."""
    return MetricTensor(CoordFrame("D", 1, 1), 1.0, 1.0, _disk11_terms, "D11-closed-form")


def volume_H(n: int) -> Callable:
    """Density ``det(Y)^-(n+1)`` of the invariant volume element."""
    frame = CoordFrame("H", n)

    def density(vec) -> float:
        Om, _ = frame.matrices(vec)
        return float(np.linalg.det(Om.imag) ** (-(n + 1)))

    return density


# ---------------------------------------------------------------------------
# pullback and Laplace-Beltrami


def pullback(metric: MetricTensor, mapping: Callable, p) -> np.ndarray:
    """``J^T g(mapping(p)) J`` with the Jacobian ``J`` from first-order jets.

    ``mapping`` takes a coordinate vector (numeric or jet) of the source frame
    and returns one in ``metric``'s frame.
    """
    ctx = JetContext.anonymous(len(p), 1)
    X = variables(ctx, np.asarray(p, dtype=float))
    Y = mapping(X)
    J = np.real(Y.gradient())
    if np.linalg.matrix_rank(J) < min(J.shape):
        raise ValueError("mapping has a singular linearization at p")
    q = np.real(Y.value)
    return J.T @ metric(q) @ J


def cayley_coords(n: int, m: int) -> Callable:
    """Partial Cayley transform as a map from disk coordinates to upper half space coordinates."""
    from .groups import cayley

    D, H = CoordFrame("D", n, m), CoordFrame("HC", n, m)

    def mapping(vec):
        return H.from_point(cayley(D.to_point(vec)))

    return mapping


def laplace_beltrami(metric: MetricTensor, f: Callable, p, cond_limit: float = 1e10):
    """``(1/sqrt g) d_i (sqrt g g^ij d_j f)`` at ``p`` with exact jet derivatives.

    ``f`` maps a jet coordinate vector of ``metric.frame`` to a scalar jet.
    """
    p = np.asarray(p, dtype=float)
    g0 = metric(p)
    c = np.linalg.cond(g0)
    if not np.isfinite(c) or c > cond_limit:
        raise IllConditionedMetric(f"metric condition number {c:.3g} exceeds {cond_limit:g}")
    g = metric.jet(p, 1)
    ginv = jet_inverse(g)
    sqrt_det = g.det().sqrt()
    F = f(metric.frame.variables(p, 2))
    N = metric.frame.dim
    grad = [F.deriv(j) for j in range(N)]
    total = 0.0
    for i in range(N):
        flux = None
        for j in range(N):
            term = ginv[i, j] * grad[j]
            flux = term if flux is None else flux + term
        flux = flux * sqrt_det
        total += flux.deriv(i).value
    return total / sqrt_det.value


# ---------------------------------------------------------------------------
# export


def metric_to_json(metric: MetricTensor, p) -> str:
    g = metric(p)
    return json.dumps({
        "metric": metric.label,
        "coordinates": list(metric.frame.names),
        "point": [float(v) for v in p],
        "matrix": g.tolist(),
    }, indent=2)


def metric_to_csv(metric: MetricTensor, p) -> str:
    g = metric(p)
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow([""] + list(metric.frame.names))
    for name, row in zip(metric.frame.names, g):
        w.writerow([name] + [repr(float(v)) for v in row])
    return buf.getvalue()
