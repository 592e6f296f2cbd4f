import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.spatial.transform import Rotation

from leakywire.errors import GeometryError
from leakywire.geometry import (CurvatureProfile, CurveSamples, builtin_curve, check_tube_embedding,
                                constant_profile, curvature_profile, decay_exponent,
                                reparametrize_arclength)


def circle_samples(n, radius=1.0):
    t = 2 * np.pi * np.arange(n) / n
    return np.c_[radius * np.cos(t), radius * np.sin(t), np.zeros(n)]


def test_circle_builtin():
    c = builtin_curve("circle", {"radius": 1.0})
    assert c.mode == "loop"
    assert c.L == pytest.approx(2 * np.pi, abs=1e-10)
    p = curvature_profile(c, 256)
    assert np.max(np.abs(p.kappa - 1.0)) < 1e-4


def test_helix_constant_curvature():
    c = builtin_curve("helix", {"a": 1.0, "b": 1.0})
    assert c.mode == "periodic"
    p = curvature_profile(c, 256)
    assert np.max(np.abs(p.kappa - 0.5)) < 1e-4
    assert np.allclose(p.torsion, 0.5, atol=1e-4)


def test_bent_line_profile():
    c = builtin_curve("bent-line", {"scale": 1.0, "R": 40.0})
    assert c.mode == "infinite-truncated"
    p = curvature_profile(c, 257)
    assert p.kappa_sup == pytest.approx(1.0, abs=1e-6)
    s = np.linspace(-40, 40, 9)
    assert np.allclose(p.kappa_at(s), 1 / (1 + s**2), atol=1e-6)
    beta = decay_exponent(p)
    assert beta == pytest.approx(2.0, abs=0.05) and beta > 1.25


def test_ellipse_max_curvature():
    p = curvature_profile(builtin_curve("planar-ellipse", {"a": 2.0, "b": 1.0}), 1024)
    assert p.kappa_sup == pytest.approx(2.0, abs=1e-3)


@pytest.mark.parametrize("name,params", [("circle", {"radius": -1}), ("helix", {"a": 0.0}),
                                         ("planar-ellipse", {"b": -2})])
def test_nonpositive_parameters(name, params):
    with pytest.raises(GeometryError):
        builtin_curve(name, params)


def test_unknown_curve():
    with pytest.raises(GeometryError):
        builtin_curve("trefoil", {})


def test_reparametrize_circle_samples():
    c = reparametrize_arclength(CurveSamples(circle_samples(256), closed=True))
    assert c.L == pytest.approx(2 * np.pi, abs=1e-6)
    assert c.speed_deviation() < 1e-8


def test_reparametrize_segment():
    t = np.linspace(0, 1, 20)
    pts = np.c_[3 * t, 0 * t, 0 * t]
    c = reparametrize_arclength(CurveSamples(pts))
    assert c.L == pytest.approx(3.0, abs=1e-10)


def test_reparametrize_ellipse_against_quadrature():
    a, b = 2.0, 1.0
    n = 1024
    t = 2 * np.pi * np.arange(n) / n
    c = reparametrize_arclength(CurveSamples(np.c_[a * np.cos(t), b * np.sin(t), 0 * t], closed=True))
    perim = quad(lambda u: math.hypot(a * math.sin(u), b * math.cos(u)), 0, 2 * np.pi,
                 epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    assert c.L == pytest.approx(perim, abs=1e-6)


def test_repeated_points_rejected():
    pts = circle_samples(16)
    pts[5] = pts[4]
    with pytest.raises(GeometryError):
        reparametrize_arclength(CurveSamples(pts, closed=True))


def test_closed_flag_inconsistent():
    t = np.linspace(0, 1, 20)
    pts = np.c_[t, t**2, 0 * t]
    with pytest.raises(GeometryError):
        reparametrize_arclength(CurveSamples(pts, closed=True))


def test_too_few_points():
    with pytest.raises(GeometryError):
        CurveSamples(circle_samples(5), closed=True)


def test_reparametrization_idempotent():
    # samples taken at exact arc-length positions of a unit-speed curve
    s = 2 * np.pi * np.arange(512) / 512
    c = reparametrize_arclength(CurveSamples(np.c_[np.cos(s), np.sin(s), 0 * s], closed=True))
    assert np.max(np.abs(c.knots[:-1] - s)) < 1e-8
    # and a second pass over its own knots is a fixed point
    c2 = reparametrize_arclength(CurveSamples(c.position(c.knots[:-1]), closed=True))
    assert np.max(np.abs(c2.knots - c.knots)) < 1e-8


def test_rigid_motion_invariance():
    pts = circle_samples(200, 1.5) * np.array([1.0, 0.6, 1.0])
    rot = Rotation.from_euler("zyx", [0.3, -1.1, 2.0]).as_matrix()
    moved = pts @ rot.T + np.array([3.0, -2.0, 7.0])
    k1 = curvature_profile(reparametrize_arclength(CurveSamples(pts, closed=True)), 128).kappa
    k2 = curvature_profile(reparametrize_arclength(CurveSamples(moved, closed=True)), 128).kappa
    assert np.max(np.abs(k1 - k2)) < 1e-8


def test_refinement_consistency():
    c = builtin_curve("planar-ellipse", {})
    p1 = curvature_profile(c, 128)
    p2 = curvature_profile(c, 256)
    assert np.max(np.abs(p2.kappa[::2] - p1.kappa)) < 1e-6


def test_coarse_grid_detected():
    c = builtin_curve("planar-ellipse", {"a": 10.0, "b": 0.5})
    with pytest.raises(GeometryError):
        curvature_profile(c, 16)


def test_profile_invariants():
    grid = np.linspace(0, 1, 32)
    with pytest.raises(GeometryError):
        CurvatureProfile(grid=grid, kappa=-np.ones(32), kappa_sup=-1.0, span=(0, 1), periodic=False, mode="open")
    with pytest.raises(GeometryError):
        CurvatureProfile(grid=grid, kappa=np.ones(32), kappa_sup=2.0, span=(0, 1), periodic=False, mode="open")
    p = constant_profile(0.25, 3.0, 64, "open")
    assert p.kappa_sup == 0.25 and p.length == 3.0


def test_embedding_circle():
    c = builtin_curve("circle", {})
    r = check_tube_embedding(c, 0.5)
    assert r.local_diffeo_ok and r.self_intersection_free
    assert 0 < r.chord_constant <= 1
    assert not check_tube_embedding(c, 1.5).local_diffeo_ok


def test_embedding_near_parallel_segments():
    # a long thin hairpin: two straight legs 0.1 apart joined by a wide bend
    leg = np.linspace(0, 10, 200)
    bend = np.linspace(-np.pi / 2, np.pi / 2, 60)[1:-1]
    top = np.c_[leg, np.full_like(leg, 0.05), 0 * leg]
    arc = np.c_[10 + 0.05 * np.cos(bend), 0.05 * np.sin(bend)[::-1], 0 * bend]
    bot = np.c_[leg[::-1], np.full_like(leg, -0.05), 0 * leg]
    pts = np.vstack([top, arc, bot])
    # brute-force check that points on opposite legs are within 2d
    assert np.min(np.linalg.norm(top[:, None, :] - bot[None, :, :], axis=-1)) < 0.4
    c = reparametrize_arclength(CurveSamples(pts))
    assert not check_tube_embedding(c, 0.2).self_intersection_free


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.01, max_value=3.0), st.floats(min_value=0.0, max_value=1.0))
def test_local_diffeo_monotone(d, extra):
    c = builtin_curve("planar-ellipse", {})
    if not check_tube_embedding(c, d).local_diffeo_ok:
        assert not check_tube_embedding(c, d + extra).local_diffeo_ok
