import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from siegeljacobi import groups as grp
from siegeljacobi.frames import CoordFrame
from siegeljacobi.jetring import Jet
from siegeljacobi.testfunctions import standard_library

FRAMES = [CoordFrame("H", 1), CoordFrame("H", 2), CoordFrame("HC", 1, 1), CoordFrame("HC", 2, 1),
          CoordFrame("HC", 2, 2), CoordFrame("D", 1, 1), CoordFrame("D", 2, 2)]


def test_names_and_layout():
    f = CoordFrame("HC", 2, 1)
    assert f.names == ("x11", "x12", "x22", "y11", "y12", "y22", "u11", "u12", "v11", "v12")
    assert f.dim == 10 and f.index("u12") == 7
    assert CoordFrame("D", 1, 1).names == ("a11", "b11", "c11", "d11")
    with pytest.raises(ValueError):
        CoordFrame("H", 2, 1)
    with pytest.raises(ValueError):
        CoordFrame("Q", 1)


@pytest.mark.parametrize("frame", FRAMES, ids=lambda f: f"{f.model}{f.n}{f.m}")
def test_coordinates_round_trip(frame):
    p = frame.random_point(7)
    assert np.allclose(frame.from_point(frame.to_point(p)), p, atol=1e-14)
    X = frame.variables(p, 1)
    a, b = frame.matrices(X)
    assert isinstance(a, Jet)
    assert np.allclose(np.real(frame.coords(a, b).value), p)


@given(st.integers(0, 10**6))
def test_jet_action_matches_numeric_action(seed):
    frame = CoordFrame("HC", 2, 1)
    rng = np.random.default_rng(seed)
    g = frame.random_group_element(rng)
    p = frame.random_point(rng)
    J = frame.act_coords(g, frame.variables(p, 1))
    assert np.allclose(np.real(J.value), frame.act_coords(g, p), atol=1e-12)
    h = 1e-6
    e = np.zeros(frame.dim)
    e[0] = h
    fd = (frame.act_coords(g, p + e) - frame.act_coords(g, p - e)) / (2 * h)
    assert np.allclose(np.real(J.c[:, 1]), fd, atol=1e-7)


def test_disk_frame_uses_star_action():
    frame = CoordFrame("D", 1, 1)
    g = frame.random_group_element(3)
    assert isinstance(g, grp.StarJacobiElement)


# -- test-function library --------------------------------------------------


@pytest.mark.parametrize("frame", FRAMES, ids=lambda f: f"{f.model}{f.n}{f.m}")
def test_library_shape(frame):
    lib = standard_library(frame)
    assert len(lib) >= 12
    first = frame.names[0]
    assert any(f.name == f"{first}^2" for f in lib)
    base = frame.base_point()
    for f in lib:
        v = f(base)
        assert np.isfinite(v)


@pytest.mark.parametrize("frame", FRAMES[:6], ids=lambda f: f"{f.model}{f.n}{f.m}")
def test_library_jets_match_finite_differences(frame):
    rng = np.random.default_rng(1)
    p = frame.random_point(rng, spread=0.3)
    for f in standard_library(frame):
        F = f(frame.variables(p, 4))
        i, j = rng.integers(frame.dim, size=2)

        def mixed(h):
            ei, ej = np.eye(frame.dim)[i] * h, np.eye(frame.dim)[j] * h
            return (f(p + ei + ej) - f(p + ei - ej) - f(p - ei + ej) + f(p - ei - ej)) / (4 * h * h)

        # Richardson step cancels the h^2 error of the stencil
        fd = (4 * mixed(5e-3) - mixed(1e-2)) / 3
        idx = np.zeros(frame.dim, dtype=int)
        idx[i] += 1
        idx[j] += 1
        exact = F.extract(tuple(idx))
        assert abs(exact - fd) <= 1e-6 * max(1.0, abs(exact)), f.name
        # fourth derivative along one axis: five-point stencil plus one Richardson step

        def fourth(h):
            e = np.eye(frame.dim)[i] * h
            return (f(p + 2 * e) - 4 * f(p + e) + 6 * f(p) - 4 * f(p - e) + f(p - 2 * e)) / h**4

        fd4 = (4 * fourth(5e-3) - fourth(1e-2)) / 3
        idx = np.zeros(frame.dim, dtype=int)
        idx[i] = 4
        ex4 = F.extract(tuple(idx))
        assert abs(ex4 - fd4) <= 1e-4 * max(1.0, abs(ex4)), f.name
