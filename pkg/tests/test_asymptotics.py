import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from leakywire.asymptotics import (counting_function, disconnected_loop_bands, eigenvalue_asymptotics,
                                   gap_widths, semiclassical_view)
from leakywire.comparison import floquet_spectrum
from leakywire.errors import ConfigError, SolverError
from leakywire.geometry import builtin_curve, constant_profile, curvature_profile, profile_from_function
from leakywire.transverse import coupling_state


def circle(n=256):
    return constant_profile(1.0, 2 * math.pi, n, "loop")


def test_circle_leading_row():
    r = eigenvalue_asymptotics(circle(), -1.0, j_max=3)
    xi = coupling_state(-1.0).xi_alpha
    assert r.kind == "expansion" and r.bc == "periodic"
    assert r.rows[0].mu == pytest.approx(-0.25, abs=1e-6)
    assert r.rows[0].lam == pytest.approx(xi - 0.25, rel=1e-12)
    assert r.rows[0].lam == pytest.approx(-361578.46, abs=0.01)


def test_circle_rows_with_brackets():
    r = eigenvalue_asymptotics(circle(), -1.5, j_max=3, with_brackets=True)
    assert r.d_used == pytest.approx(math.exp(-1.5 * math.pi))
    for row in r.rows:
        assert row.lower <= row.lam <= row.upper


def test_whole_line_poschl_teller():
    p = profile_from_function(lambda s: 2.0 / np.cosh(s), (-20, 20), 2001, periodic=False,
                              mode="infinite-truncated")
    r = eigenvalue_asymptotics(p, -1.0, j_max=4)
    assert r.kind == "whole-line" and len(r.rows) == 1
    assert r.rows[0].mu == pytest.approx(oracles.poschl_teller_ground(), abs=1e-6)


def test_straight_line_has_no_rows():
    p = profile_from_function(lambda s: 0 * s, (-20, 20), 257, periodic=False, mode="infinite-truncated")
    assert eigenvalue_asymptotics(p, -1.0).rows == ()


def test_free_end_pair_and_refusal():
    p = constant_profile(0.0, 3.0, 128, "open")
    r = eigenvalue_asymptotics(p, -1.0, j_max=3)
    assert r.kind == "free-end-pair"
    for row in r.rows:
        assert row.mu <= row.mu_upper
    with pytest.raises(ConfigError):
        eigenvalue_asymptotics(p, -1.0, bc="dirichlet")
    c = eigenvalue_asymptotics(p, -1.0, bc="dirichlet", conjecture=True, j_max=3)
    assert c.kind == "conjecture"
    assert c.rows[0].mu == pytest.approx((math.pi / 3) ** 2, rel=1e-6)


def test_periodic_curve_refused():
    p = constant_profile(0.5, 3.0, 64, "periodic")
    with pytest.raises(ConfigError):
        eigenvalue_asymptotics(p, -1.0)


def test_counting_brackets_formula():
    c = counting_function(circle(), -2.0)
    assert c.n_formula == pytest.approx(2 * coupling_state(-2.0).zeta_alpha, rel=1e-14)
    assert c.n_lower <= c.n_formula + 1 and c.n_upper >= c.n_formula - 1
    assert c.spread <= 0.01


def test_counting_scales_with_length_and_coupling():
    a = counting_function(constant_profile(1.0, 2 * math.pi, 64, "loop"), -1.0)
    b = counting_function(constant_profile(0.5, 4 * math.pi, 64, "loop"), -1.0)
    assert b.n_formula == pytest.approx(2 * a.n_formula, rel=1e-14)
    c = counting_function(circle(), -2.0)
    assert c.n_formula / a.n_formula == pytest.approx(math.exp(2 * math.pi), rel=1e-12)
    assert a.n_formula == pytest.approx(1202.63, abs=0.01)


def test_counting_free_end_and_errors():
    c = counting_function(constant_profile(0.0, math.pi, 64, "open"), -1.0)
    assert c.free_end and c.spread <= 0.01
    p = profile_from_function(lambda s: 0 * s, (-5, 5), 65, periodic=False, mode="infinite-truncated")
    with pytest.raises(ConfigError):
        counting_function(p, -1.0)


def test_helix_gaps_closed():
    p = curvature_profile(builtin_curve("helix", {"a": 1.0, "b": 1.0}), 512)
    b = floquet_spectrum(p, 2 * math.pi, 32, 6, n=1024)
    g = gap_widths(b)
    assert g.open_count == 0 and np.all(np.abs(g.gaps) < 1e-8)


def test_perturbed_gap_opens_and_matches_hill():
    out = {}
    for eps in (0.2, 0.4):
        p = profile_from_function(lambda s: 1 + eps * np.cos(s), (0, 2 * math.pi), 128, periodic=True,
                                  mode="periodic")
        g = gap_widths(floquet_spectrum(p, 2 * math.pi, 16, 3, n=1024))
        out[eps] = g.gaps[0]
        assert g.gaps[0] > 1e-3
        assert g.gaps[0] == pytest.approx(oracles.first_gap_hill(eps), rel=0.05)
    assert 1.6 <= out[0.4] / out[0.2] <= 2.4


def test_disconnected_loops_have_open_gaps():
    loop = curvature_profile(builtin_curve("planar-ellipse", {"a": 2.0, "b": 1.0}), 512)
    g = gap_widths(disconnected_loop_bands(loop, 10.0, theta_count=16, j_max=4, n=1024))
    assert g.open_count == 3


def test_gap_widths_needs_edge():
    p = constant_profile(0.5, 2.0, 64, "periodic")
    b = floquet_spectrum(p, 2.0, 17, 2, n=256)
    with pytest.raises(SolverError):
        gap_widths(b)


@pytest.mark.parametrize("h", [1.0, 0.5, 0.1, 0.01])
def test_semiclassical_identity(h):
    v = semiclassical_view(circle(), -1.0, h, j_max=3, n=512)
    assert v.xi_relative_defect <= 1e-14
    for r in v.rows:
        # the transverse parts agree, so the rows differ only by mu (h^2 - h^2) rounding
        assert abs(r.difference) <= 1e-14 * abs(v.xi_alpha) + 1e-12


def test_semiclassical_bad_h():
    with pytest.raises(ConfigError):
        semiclassical_view(circle(), -1.0, 0.0)
    with pytest.raises(ConfigError):
        semiclassical_view(circle(), -1.0, 2.0)


def test_serialization():
    r = eigenvalue_asymptotics(circle(), -1.5, j_max=3)
    lines = r.to_csv().splitlines()
    assert lines[0] == "j,mu,lambda,lower,upper,mu_upper,lambda_upper" and len(lines) == 4
    d = json.loads(r.to_json())
    assert d["kind"] == "expansion" and len(d["rows"]) == 3
    c = json.loads(counting_function(circle(), -1.0).to_json())
    assert c["n_lower"] <= c["n_upper"]


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=-3.0, max_value=-0.5), st.floats(min_value=1.0, max_value=40.0))
def test_counting_order_property(alpha, L):
    c = counting_function(constant_profile(2 * math.pi / L, L, 64, "loop"), alpha)
    assert c.n_lower <= c.n_upper
    assert c.n_lower - 1 <= c.n_formula <= c.n_upper + 1
