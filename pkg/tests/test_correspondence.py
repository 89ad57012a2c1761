import json

import numpy as np
import pytest

from siegeljacobi import groups as grp
from siegeljacobi.correspondence import (
    NonInvariantPolynomial,
    conjecture_probe,
    correspondence_value,
    fingerprint,
    fit_combination,
    fit_constant,
    poly_to_op_H,
    poly_to_op_HC,
    sample_pairs,
    standard_pbasis,
)
from siegeljacobi.diffops import CoeffMul, Coeff, Partial, apply_at, build_operator, commutator, invariance_pair, maass_generators
from siegeljacobi.frames import CoordFrame
from siegeljacobi.invariants import InvariantPolynomial, example_polynomial, non_invariant_control
from siegeljacobi.testfunctions import standard_library

H1, H2 = CoordFrame("H", 1), CoordFrame("H", 2)
HC11 = CoordFrame("HC", 1, 1)


def rel(a, b):
    return abs(a - b) / max(1.0, abs(a), abs(b))


def flat_laplacian_times_4y2():
    x, y = Partial(0, "x11"), Partial(1, "y11")
    return CoeffMul(Coeff("4y^2", lambda ev, o: ev.coords(o)[1] * ev.coords(o)[1] * 4.0), x @ x + y @ y)


def test_basis_is_orthonormal():
    b = standard_pbasis(2, 2)
    assert b.N == 6 + 8
    assert np.allclose(b.gram, np.eye(b.N))
    # every algebra element lies in the complement of the isotropy algebra: it moves the base point
    for a in range(b.N):
        g = grp.jacobi_exp(b.algebra[a] * 1e-3)
        q = grp.act_H(g, grp.base_point(2, 2))
        assert max(np.abs(q.Omega - 1j * np.eye(2)).max(), np.abs(q.Z).max()) > 1e-5


def test_upper_half_plane_example(rng):
    op, ref = poly_to_op_H(example_polynomial("q1"), 1), flat_laplacian_times_4y2()
    lib = standard_library(H1)
    for i in range(20):
        p, f = H1.random_point(rng), lib[i % len(lib)]
        assert rel(apply_at(op, H1, f, p), apply_at(ref, H1, f, p)) <= 1e-8


@pytest.mark.parametrize("poly,name", [("q", "D1"), ("xi", "D2"), ("phi", "D3"), ("psi", "D4")])
def test_n1m1_generators(poly, name, rng):
    op, ref = poly_to_op_HC(example_polynomial(poly), 1, 1), build_operator(name, 1, 1)
    lib = standard_library(HC11)
    for i in range(20):
        p, f = HC11.random_point(rng), lib[i % len(lib)]
        assert rel(apply_at(op, HC11, f, p), apply_at(ref, HC11, f, p)) <= 1e-8


def test_real_phase_breaks_the_odd_generators(rng):
    # a real Heisenberg identification gets D3 and D4 wrong; this pins the convention
    basis = standard_pbasis(1, 1, z_phase=1.0)
    p = HC11.random_point(rng)
    f = standard_library(HC11)[0]
    op = poly_to_op_HC(example_polynomial("phi"), 1, 1, basis)
    assert rel(apply_at(op, HC11, f, p), apply_at(build_operator("D3", 1, 1), HC11, f, p)) > 1e-3


def test_commutator_of_images(rng):
    c = commutator(poly_to_op_HC(example_polynomial("q"), 1, 1), poly_to_op_HC(example_polynomial("xi"), 1, 1))
    ref = build_operator("[D1,D2]", 1, 1)
    lib = standard_library(HC11)
    for i in range(6):
        p, f = HC11.random_point(rng), lib[i]
        assert rel(apply_at(c, HC11, f, p), apply_at(ref, HC11, f, p)) <= 1e-8


def test_constants_are_annihilated():
    op = poly_to_op_HC(InvariantPolynomial("f2", (1, 1)), 1, 1)
    assert abs(apply_at(op, HC11, lambda X: X[0] * 0 + 2.0, HC11.random_point(0))) <= 1e-14


def test_non_invariant_polynomial_refused():
    with pytest.raises(NonInvariantPolynomial):
        poly_to_op_HC(non_invariant_control(), 1, 1)


@pytest.mark.parametrize("P", [InvariantPolynomial("q", (2,)), InvariantPolynomial("p", (1,))],
                         ids=lambda P: P.name)
def test_images_are_invariant_n2(P, rng):
    op = poly_to_op_H(P, 2) if P.family == "q" else poly_to_op_HC(P, 2, 1)
    frame = H2 if P.family == "q" else CoordFrame("HC", 2, 1)
    lib = standard_library(frame)
    for i in range(5):
        g, p = frame.random_group_element(rng), frame.random_point(rng)
        assert rel(*invariance_pair(op, frame, g, lib[i], p)) <= 1e-7


def test_basis_and_representative_independence(rng):
    frame = CoordFrame("HC", 2, 1)
    P = InvariantPolynomial("r1", (1, 1))
    f = standard_library(frame)[0]
    alt = standard_pbasis(2, 1, orthonormal=False)
    for _ in range(3):
        p = frame.random_point(rng)
        F = f(frame.variables(p, P.degree))
        a = correspondence_value(P, frame, F, p).value
        b = correspondence_value(P, frame, F, p, basis=alt).value
        g = grp.group_mul(grp.coset_representative(frame.to_point(p)), grp.random_stabilizer(rng, 2, 1))
        c = correspondence_value(P, frame, F, p, g=g).value
        assert rel(a, b) <= 1e-10 and rel(a, c) <= 1e-10


def test_shallow_jet_refused():
    P = InvariantPolynomial("q", (1,))
    F = standard_library(H1)[0](H1.variables(H1.base_point(), 1))
    with pytest.raises(ValueError):
        correspondence_value(P, H1, F, H1.base_point())


# -- fingerprints and fits ----------------------------------------------------


def test_fingerprint_basics():
    fp = fingerprint(Partial(0, "x11"), H1, H1.base_point(), 2)
    assert fp.table[(1, 0)] == 1 and sum(abs(v) for k, v in fp.table.items() if k != (1, 0)) == 0
    A, B = build_operator("D1", 1, 1), build_operator("D2", 1, 1)
    lin = fingerprint(A * 2.0 + B * -3.0, HC11, HC11.base_point()).vector()
    assert np.allclose(lin, 2 * fingerprint(A, HC11, HC11.base_point()).vector()
                       - 3 * fingerprint(B, HC11, HC11.base_point()).vector(), atol=1e-12)
    assert json.loads(fp.to_json())["coordinates"] == ["x11", "y11"]


def test_fingerprint_of_d1_at_base_point():
    # at (i, 0): y^2 = 1 and v = 0, so D1 reduces to d_x^2 + d_y^2
    fp = fingerprint(build_operator("D1", 1, 1), HC11, HC11.base_point())
    expect = {(2, 0, 0, 0): 1.0, (0, 2, 0, 0): 1.0}
    for k, v in fp.table.items():
        assert abs(v - expect.get(k, 0.0)) <= 1e-12, k


def test_fit_constant_exact_multiple():
    A = build_operator("Delta_H", 2)
    c, r = fit_constant(A * 2.0, A, H2, sample_pairs(H2, 10, 0))
    assert c == pytest.approx(2.0) and r <= 1e-12


def test_fit_against_first_maass_operator():
    c, r = fit_constant(poly_to_op_H(example_polynomial("q1"), 1), maass_generators(1).H[0], H1,
                        sample_pairs(H1, 20, 0))
    assert r <= 1e-7
    assert c == pytest.approx(-4.0)


def test_conjecture_probe_is_deterministic():
    a = conjecture_probe(2, 2, samples=12, seed=3)
    b = conjecture_probe(2, 2, samples=12, seed=3)
    assert a == b
    assert set(a) >= {"c_j", "residual", "combination", "combination_residual"}
    # not asserted as a pass/fail: the two-term fit is reported for the record
    assert np.isfinite(a["c_j"]) and np.isfinite(a["residual"])
    with pytest.raises(ValueError):
        conjecture_probe(1, 2)


def test_fit_combination_recovers_known_mix():
    ms = maass_generators(2)
    target = ms.H[0] * 3.0 + ms.H[1] * -0.5
    c, r = fit_combination(target, ms.H, H2, sample_pairs(H2, 10, 1))
    assert np.allclose(c, [3.0, -0.5]) and r <= 1e-10
