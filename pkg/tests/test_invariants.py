import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from siegeljacobi.invariants import (
    InvariantPolynomial,
    TPoint,
    UnitaryMatrix,
    catalog,
    catalog_json,
    check_u_invariance,
    eval_invariant,
    example_polynomial,
    graded_dimension_estimate,
    jacobian_rank,
    non_invariant_control,
    random_tpoint,
    random_unitary,
    u_act,
)


def test_unitary_identity_and_scalar_phase():
    p = TPoint([[1 + 2j]], [[0.5 - 1j]])
    assert u_act(UnitaryMatrix(np.eye(1)), p) == p or np.allclose(u_act(UnitaryMatrix(np.eye(1)), p).omega, p.omega)
    th = 0.37
    q = u_act(UnitaryMatrix([[np.exp(1j * th)]]), p)
    assert np.allclose(q.omega, np.exp(2j * th) * p.omega)
    assert np.allclose(q.z, np.exp(1j * th) * p.z)


@given(st.integers(0, 10**6))
def test_unitary_action_composes(seed):
    rng = np.random.default_rng(seed)
    u1, u2 = random_unitary(rng, 2), random_unitary(rng, 2)
    p = random_tpoint(rng, 2, 1)
    lhs = u_act(UnitaryMatrix(u1.u @ u2.u), p)
    rhs = u_act(u1, u_act(u2, p))
    assert np.allclose(lhs.omega, rhs.omega, atol=1e-11) and np.allclose(lhs.z, rhs.z, atol=1e-11)


def test_hand_values():
    p = TPoint(1j * np.eye(2), np.zeros((1, 2)))
    assert eval_invariant(InvariantPolynomial("q", (1,)), p) == pytest.approx(2)
    p = TPoint(np.eye(2), [[1, 1j]])
    assert eval_invariant(InvariantPolynomial("psi1", (1,)), p) == pytest.approx(2)
    x, y, u, v = 0.3, 1.7, -0.4, 0.9
    p = TPoint([[x + 1j * y]], [[u + 1j * v]])
    assert eval_invariant(InvariantPolynomial("f1", (1, 1)), p) == pytest.approx((u * u - v * v) * x + 2 * u * v * y)
    assert example_polynomial("phi")(p) == pytest.approx(0.5 * ((u * u - v * v) * x + 2 * u * v * y))


def test_validation():
    with pytest.raises(ValueError):
        InvariantPolynomial("q", (3,)).validate(2, 1)
    with pytest.raises(ValueError):
        InvariantPolynomial("m1", (1,))
    with pytest.raises(ValueError):
        InvariantPolynomial("nope", (1,))


@pytest.mark.parametrize("nm", [(1, 1), (2, 1), (1, 2), (2, 2)])
def test_catalog_is_invariant(nm):
    for P in catalog(*nm):
        assert check_u_invariance(P, *nm, samples=30, seed=1).passed, P.name
        assert check_u_invariance(P, *nm, samples=5, identity_only=True, tol=0).max_defect == 0


def test_control_is_detected():
    rep = check_u_invariance(non_invariant_control(), 2, 2, samples=20)
    assert not rep.passed and rep.max_defect > 1e-2


def test_jacobian_rank():
    rng = np.random.default_rng(2)
    for n in (1, 2, 3):
        qs = [InvariantPolynomial("q", (j,)) for j in range(1, n + 1)]
        assert jacobian_rank(qs, random_tpoint(rng, n, 1)) == n
    p = random_tpoint(rng, 2, 1)
    psi = InvariantPolynomial("psi1", (1,))
    assert jacobian_rank([psi, psi * 2.0], p) == 1
    assert jacobian_rank([psi - psi], p) == 0


def test_graded_dimension():
    assert graded_dimension_estimate(1, 1, 0) == 1
    # degree 2 at n = m = 1 is spanned by Re(omega conj omega) and |z|^2
    assert graded_dimension_estimate(1, 1, 2, seed=3) == 2
    assert graded_dimension_estimate(2, 1, 4, seed=5) == graded_dimension_estimate(2, 1, 4, seed=5)


def test_catalog_json_is_deterministic():
    a, b = catalog_json(1, 1, samples=5, seed=2), catalog_json(1, 1, samples=5, seed=2)
    assert a == b and '"invariant": true' in a
