"""Small helpers that let the same formula run on numpy arrays and on jets."""

from __future__ import annotations

import numpy as np

from .jetring import Jet, jet_inverse, jet_sqrtm


def is_jet(a) -> bool:
    return isinstance(a, Jet)


def inv(a):
    return jet_inverse(a) if isinstance(a, Jet) else np.linalg.inv(a)


def tr(a):
    return a.trace() if isinstance(a, Jet) else np.trace(a)


def T(a):
    return a.T


def conj(a):
    return a.conj()


def re(a):
    return a.real


def im(a):
    return a.imag


def sqrtm_spd(a):
    """Square root of a symmetric positive-definite matrix (real in, real out)."""
    if isinstance(a, Jet):
        return jet_sqrtm(a)
    w, Q = np.linalg.eigh(a)
    return (Q * np.sqrt(w)) @ Q.conj().T


def det(a):
    return a.det() if isinstance(a, Jet) else np.linalg.det(a)


def matpow(a, k: int, n: int):
    """``a**k`` for a square matrix (``k >= 0``; ``n`` is the size, used when ``k == 0``)."""
    out = None
    for _ in range(k):
        out = a if out is None else out @ a
    if out is None:
        return np.eye(n, dtype=complex)
    return out


def value(a):
    """Numeric value (constant term for jets)."""
    return a.value if isinstance(a, Jet) else a
