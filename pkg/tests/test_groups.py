import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from siegeljacobi import groups as grp

seeds = st.integers(0, 2**32 - 1)
sizes = st.sampled_from([(1, 1), (2, 1), (1, 2), (2, 2), (3, 1)])

J1 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def heis(lam, mu, kappa):
    return grp.JacobiElement.make(np.eye(2), [[lam]], [[mu]], [[kappa]])


def close(a, b, tol):
    return np.max(np.abs(np.asarray(a) - np.asarray(b))) <= tol


def test_heisenberg_product_by_hand():
    g = grp.group_mul(heis(1, 0, 0), heis(0, 1, 0))
    assert close(g.lam, [[1]], 0) and close(g.mu, [[1]], 0) and close(g.kappa, [[1]], 0)


def test_identity_is_neutral():
    g = grp.random_jacobi(3, 0.5, 2, 1)
    e = grp.identity(2, 1)
    assert close(grp.embed_sp_mn(grp.group_mul(g, e)), grp.embed_sp_mn(g), 1e-14)
    assert close(grp.embed_sp_mn(grp.group_mul(e, g)), grp.embed_sp_mn(g), 1e-14)


@given(seeds, sizes)
def test_associativity(seed, nm):
    rng = np.random.default_rng(seed)
    a, b, c = (grp.random_jacobi(rng, 0.5, *nm) for _ in range(3))
    lhs = grp.embed_sp_mn(grp.group_mul(grp.group_mul(a, b), c))
    rhs = grp.embed_sp_mn(grp.group_mul(a, grp.group_mul(b, c)))
    assert close(lhs, rhs, 1e-10)


@given(seeds, sizes)
def test_inverse(seed, nm):
    g = grp.random_jacobi(seed, 0.5, *nm)
    e = grp.group_mul(g, grp.group_inverse(g))
    assert close(grp.embed_sp_mn(e), np.eye(2 * sum(nm)), 1e-10)


def test_symplectic_j_acts_by_inversion():
    g = grp.JacobiElement.make(J1, [[0.0]], [[0.0]], [[0.0]])
    q = grp.act_H(g, grp.HPoint([[1j]], [[1.0]]))
    assert close(q.Omega, [[1j]], 1e-15) and close(q.Z, [[1j]], 1e-15)


def test_identity_fixes_points():
    p = grp.random_hpoint(1, 2, 2)
    q = grp.act_H(grp.identity(2, 2), p)
    assert close(q.Omega, p.Omega, 1e-15) and close(q.Z, p.Z, 1e-15)


@given(seeds, sizes)
def test_action_composes(seed, nm):
    rng = np.random.default_rng(seed)
    a, b = grp.random_jacobi(rng, 0.5, *nm), grp.random_jacobi(rng, 0.5, *nm)
    p = grp.random_hpoint(rng, *nm)
    lhs = grp.act_H(grp.group_mul(a, b), p)
    rhs = grp.act_H(a, grp.act_H(b, p))
    assert close(lhs.Omega, rhs.Omega, 1e-9) and close(lhs.Z, rhs.Z, 1e-9)


def test_points_validate_the_model():
    with pytest.raises(ValueError):
        grp.HPoint([[1.0 - 1j]], [[0.0]])
    with pytest.raises(ValueError):
        grp.DPoint([[1.5]], [[0.0]])


def test_heisenberg_symmetry_condition():
    # kappa + mu lam^T = [[0, 0], [1, 0]] is not symmetric
    with pytest.raises(grp.GroupError):
        grp.HeisenbergElement(np.array([[1.0], [0.0]]), np.array([[0.0], [1.0]]), np.zeros((2, 2)))


def test_embedding_identity_and_pure_heisenberg():
    assert close(grp.embed_sp_mn(grp.identity(2, 1)), np.eye(6), 0)
    lam = np.array([[0.7, -0.2]])
    E = grp.embed_sp_mn(grp.JacobiElement.make(np.eye(4), lam, np.zeros((1, 2)), np.zeros((1, 1))))
    # blocks in (n, m, n, m) order: lam in the m-row, -lam^T in the last column of the third row block
    assert close(E[2:3, :2], lam, 0)
    assert close(E[3:5, 5:], -lam.T, 0)
    assert close(E[:2, 5:], 0, 0)
    assert close(np.diag(E), 1.0, 0)


@given(seeds, sizes)
def test_embedding_is_homomorphism(seed, nm):
    rng = np.random.default_rng(seed)
    a, b = grp.random_jacobi(rng, 0.5, *nm), grp.random_jacobi(rng, 0.5, *nm)
    lhs = grp.embed_sp_mn(grp.group_mul(a, b))
    assert close(lhs, grp.embed_sp_mn(a) @ grp.embed_sp_mn(b), 1e-10)
    back = grp.decode_sp_mn(lhs, *nm)
    assert close(grp.embed_sp_mn(back), lhs, 0)


def test_exp_of_zero_and_compact_rotation():
    zero = grp.JacobiAlgebraElement(np.zeros((2, 2)), np.zeros((1, 1)), np.zeros((1, 1)), np.zeros((1, 1)))
    assert close(grp.embed_sp_mn(grp.jacobi_exp(zero)), np.eye(4), 1e-15)
    rot = grp.JacobiAlgebraElement(J1 * (np.pi / 2), np.zeros((1, 1)), np.zeros((1, 1)), np.zeros((1, 1)))
    g = grp.jacobi_exp(rot)
    assert close(grp.act_H(g, grp.base_point(1, 1)).Omega, [[1j]], 1e-14)


@given(seeds, st.floats(-1, 1), st.floats(-1, 1))
def test_one_parameter_subgroup(seed, t, s):
    X = grp.random_algebra(seed, 2, 1, 0.4)
    lhs = grp.group_mul(grp.jacobi_exp(X * t), grp.jacobi_exp(X * s))
    assert close(grp.embed_sp_mn(lhs), grp.embed_sp_mn(grp.jacobi_exp(X * (t + s))), 1e-9)


def test_random_jacobi_contract():
    assert close(grp.embed_sp_mn(grp.random_jacobi(5, 0.0, 2, 2)), np.eye(8), 0)
    a, b = grp.random_jacobi(11, 0.5, 2, 1), grp.random_jacobi(11, 0.5, 2, 1)
    assert np.array_equal(grp.embed_sp_mn(a), grp.embed_sp_mn(b))
    J = grp.symplectic_form(2)
    rng = np.random.default_rng(0)
    for _ in range(1000):
        g = grp.random_jacobi(rng, 0.5, 2, 1)
        assert close(g.M.M.T @ J @ g.M.M, J, 1e-9)
        S = g.kappa + g.mu @ g.lam.T
        assert close(S, S.T, 1e-9)


def test_stabilizer_and_coset_representative():
    rng = np.random.default_rng(4)
    k = grp.random_stabilizer(rng, 2, 2)
    b = grp.base_point(2, 2)
    q = grp.act_H(k, b)
    assert close(q.Omega, b.Omega, 1e-12) and close(q.Z, b.Z, 1e-12)
    p = grp.random_hpoint(rng, 2, 2)
    g = grp.coset_representative(p)
    r = grp.act_H(g, b)
    assert close(r.Omega, p.Omega, 1e-12) and close(r.Z, p.Z, 1e-12)


# -- disk model -------------------------------------------------------------


def test_star_of_identity_and_j():
    s = grp.to_star(grp.identity(1, 1))
    assert close(s.P, [[1]], 0) and close(s.Q, [[0]], 0) and close(s.xi, [[0]], 0)
    s = grp.to_star(grp.JacobiElement.make(J1, [[0.0]], [[0.0]], [[0.0]]))
    # with B = 1, C = -1: P = (A + D + i(B - C))/2 = i
    assert close(s.P, [[1j]], 1e-15) and close(s.Q, [[0]], 1e-15)
    origin = grp.DPoint([[0.0]], [[0.0]])
    q = grp.act_D(s, origin)
    assert close(q.W, [[0]], 1e-15) and close(q.eta, [[0]], 1e-15)


@given(seeds, sizes)
def test_star_homomorphism_and_round_trip(seed, nm):
    rng = np.random.default_rng(seed)
    a, b = grp.random_jacobi(rng, 0.5, *nm), grp.random_jacobi(rng, 0.5, *nm)
    x = grp.to_star(grp.group_mul(a, b))
    y = grp.star_mul(grp.to_star(a), grp.to_star(b))
    for f in ("P", "Q", "xi", "kappa"):
        assert close(getattr(x, f), getattr(y, f), 1e-10)
    assert close(grp.embed_sp_mn(grp.from_star(grp.to_star(a))), grp.embed_sp_mn(a), 1e-14)


@given(seeds, sizes)
def test_disk_action_composes(seed, nm):
    rng = np.random.default_rng(seed)
    a, b = (grp.to_star(grp.random_jacobi(rng, 0.5, *nm)) for _ in range(2))
    p = grp.random_dpoint(rng, *nm)
    lhs = grp.act_D(grp.star_mul(a, b), p)
    rhs = grp.act_D(a, grp.act_D(b, p))
    assert close(lhs.W, rhs.W, 1e-9) and close(lhs.eta, rhs.eta, 1e-9)


def test_cayley_base_points():
    for n, m in ((1, 1), (2, 3)):
        q = grp.cayley(grp.DPoint(np.zeros((n, n)), np.zeros((m, n))))
        assert close(q.Omega, 1j * np.eye(n), 1e-15) and close(q.Z, 0, 1e-15)
        p = grp.cayley_inv(grp.base_point(n, m))
        assert close(p.W, 0, 1e-15) and close(p.eta, 0, 1e-15)


@given(seeds, sizes)
def test_cayley_round_trip_and_equivariance(seed, nm):
    rng = np.random.default_rng(seed)
    q = grp.random_hpoint(rng, *nm)
    back = grp.cayley(grp.cayley_inv(q))
    assert close(back.Omega, q.Omega, 1e-11) and close(back.Z, q.Z, 1e-11)
    g = grp.random_jacobi(rng, 0.5, *nm)
    p = grp.random_dpoint(rng, *nm)
    lhs = grp.cayley(grp.act_D(grp.to_star(g), p))
    rhs = grp.act_H(g, grp.cayley(p))
    assert close(lhs.Omega, rhs.Omega, 1e-9) and close(lhs.Z, rhs.Z, 1e-9)


def test_size_mismatch_is_an_error():
    with pytest.raises(grp.GroupError):
        grp.group_mul(grp.identity(1, 1), grp.identity(2, 1))
    with pytest.raises(grp.GroupError):
        grp.act_H(grp.identity(1, 1), grp.base_point(1, 2))
