import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from siegeljacobi.jetring import (
    Jet,
    JetContext,
    JetContextError,
    JetOrderError,
    compose,
    jet_arith,
    jet_expm,
    jet_extract,
    jet_inverse,
    jet_matrix_ops,
    jet_sqrtm,
    variables,
)

finite = st.floats(-2, 2, allow_nan=False)


def one_var(order, at=0.0):
    ctx = JetContext(("x",), order)
    return variables(ctx, [at])[0]


def test_polynomial_identity():
    x = one_var(2)
    r = jet_arith(1 + x, 1 - x, "mul")
    assert np.allclose(r.c, [1, 0, -1])


def test_truncation_drops_high_degree():
    ctx = JetContext(("x", "y"), 1)
    x, y = variables(ctx, [0.0, 0.0])
    assert np.allclose((x * y).c, 0)


def test_constant_scaling():
    ctx = JetContext(("x",), 2)
    assert np.allclose(((2 + 3j) * Jet.const(ctx, 1.0)).c, [2 + 3j, 0, 0])


def test_geometric_series_inverse():
    x = one_var(2)
    assert np.allclose(jet_inverse(1 + x).c, [1, -1, 1])
    ctx = JetContext(("x",), 3)
    assert jet_inverse(Jet.const(ctx, 2.0)).value == pytest.approx(0.5)


def test_mixed_contexts_rejected():
    a = one_var(2)
    b = variables(JetContext(("y",), 2), [0.0])[0]
    with pytest.raises(JetContextError):
        jet_arith(a, b, "add")


def test_extract_matches_calculus():
    x = one_var(4)
    assert jet_extract(x * x, (2,)) == pytest.approx(2)
    e = x.exp()
    for k in range(5):
        assert e.extract((k,)) == pytest.approx(1.0)
    with pytest.raises(JetOrderError):
        e.extract((5,))


@given(st.lists(finite, min_size=6, max_size=6), st.floats(-1, 1))
def test_extract_vs_finite_differences(coef, x0):
    # random cubic in two variables, second derivatives by central differences
    def f(x, y):
        a, b, c, d, e, g = coef
        return a * x**3 + b * x * y + c * y**2 + d * x * x * y + e * y + g

    ctx = JetContext(("x", "y"), 3)
    X, Y = variables(ctx, [x0, 0.3])
    F = f(X, Y)
    h = 1e-4
    fxy = (f(x0 + h, 0.3 + h) - f(x0 + h, 0.3 - h) - f(x0 - h, 0.3 + h) + f(x0 - h, 0.3 - h)) / (4 * h * h)
    fxx = (f(x0 + h, 0.3) - 2 * f(x0, 0.3) + f(x0 - h, 0.3)) / h**2
    for exact, approx in ((F.extract((1, 1)), fxy), (F.extract((2, 0)), fxx)):
        assert abs(exact - approx) <= 1e-6 * max(1.0, abs(exact))


@given(st.lists(st.floats(-0.5, 0.5), min_size=3, max_size=3))
def test_inverse_multiplies_back(c):
    ctx = JetContext(("x", "y"), 4)
    x, y = variables(ctx, [0.0, 0.0])
    a = 1 + c[0] * x + c[1] * y + c[2] * x * y * x
    r = a * jet_inverse(a)
    assert abs(r.value - 1) < 1e-12
    assert np.max(np.abs(r.c[1:])) < 1e-12


def test_nilpotent_matrix_exponential_terminates():
    ctx = JetContext(("t",), 2)
    t = variables(ctx, [0.0])[0]
    N = Jet.zeros(ctx, (3, 3))
    N.c[0, 1] = t.c
    N.c[1, 2] = t.c
    E = jet_matrix_ops(N, None, "exp_truncated")
    expect = Jet.const(ctx, np.eye(3)) + N + (N @ N) * 0.5
    assert np.allclose(E.c, expect.c)


def test_inverse_of_identity_and_multiply_back(rng):
    ctx = JetContext(("s", "t"), 3)
    s, t = variables(ctx, [0.0, 0.0])
    eye = Jet.const(ctx, np.eye(4))
    assert np.allclose(jet_inverse(eye).c, eye.c)
    A = Jet.const(ctx, np.eye(4) * 3 + rng.standard_normal((4, 4)))
    A = A + Jet.const(ctx, rng.standard_normal((4, 4))) * s + Jet.const(ctx, rng.standard_normal((4, 4))) * (t * s)
    P = jet_matrix_ops(A, jet_inverse(A), "mul")
    assert np.max(np.abs(P.c - eye.c)) < 1e-11


def test_singular_constant_block_rejected():
    ctx = JetContext(("t",), 1)
    with pytest.raises(np.linalg.LinAlgError):
        jet_inverse(Jet.const(ctx, np.zeros((2, 2))))


def test_expm_matches_scipy_and_derivative(rng):
    import scipy.linalg

    ctx = JetContext(("t",), 3)
    t = variables(ctx, [0.0])[0]
    A, B = rng.standard_normal((3, 3)), rng.standard_normal((3, 3))
    E = jet_expm(Jet.const(ctx, A) + Jet.const(ctx, B) * t)
    assert np.allclose(E.value, scipy.linalg.expm(A), atol=1e-12)
    h = 1e-5
    fd = (scipy.linalg.expm(A + h * B) - scipy.linalg.expm(A - h * B)) / (2 * h)
    assert np.allclose(E.c[..., 1], fd, atol=1e-7)


def test_sqrtm_squares_back(rng):
    ctx = JetContext(("t",), 3)
    t = variables(ctx, [0.0])[0]
    M = rng.standard_normal((3, 3))
    S0 = M @ M.T + 3 * np.eye(3)
    P = rng.standard_normal((3, 3))
    a = Jet.const(ctx, S0) + Jet.const(ctx, P + P.T) * t
    r = jet_sqrtm(a)
    assert np.max(np.abs((r @ r).c - a.c)) < 1e-11


def test_compose_is_chain_rule():
    # f(u) = u^3 at u0 = 2, u(t) = 2 + t + t^2  ->  (2 + t + t^2)^3
    u = one_var(3, at=2.0)
    F = u * u * u
    t = one_var(3)
    inner = (2 + t + t * t).reshape(1)
    direct = (2 + t + t * t) ** 3
    assert np.allclose(compose(F, inner).c, direct.c)


def test_derivative_and_order_bookkeeping():
    x = one_var(3, at=0.5)
    F = x.exp()
    dF = F.deriv(0)
    assert dF.order == 2
    assert np.allclose(dF.c, F.truncate(2).c)
    with pytest.raises(JetOrderError):
        Jet.const(JetContext(("x",), 0), 1.0).deriv(0)


@given(st.floats(0.1, 3.0), st.integers(1, 5))
def test_power_series_against_math(x0, order):
    x = one_var(order, at=x0)
    s = x.sqrt()
    assert s.value == pytest.approx(math.sqrt(x0))
    assert s.extract((1,)) == pytest.approx(0.5 / math.sqrt(x0))


def test_numpy_defers_to_jet():
    x = one_var(2)
    r = np.float64(2.0) * x
    assert isinstance(r, Jet)
