import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from leakywire.errors import RegimeError
from leakywire.transverse import (CouplingState, _dirichlet_rho, _robin_root, coupling_state, envelope,
                                  fit_envelope, solvability, solve_dirichlet_root, solve_robin_root)

SCHEDULE = (-1.0, -1.5, -2.0)


def state(zeta):
    return CouplingState(alpha=float("nan"), xi_alpha=-zeta * zeta, zeta_alpha=zeta)


def test_coupling_state_values():
    mp.mp.dps = 30
    for a in (0.0, -1.0, -2.0, 1.5):
        cs = coupling_state(a)
        ref = -4 * mp.exp(2 * (-2 * mp.pi * a - mp.euler))
        assert cs.xi_alpha == pytest.approx(float(ref), rel=1e-14)
        assert cs.zeta_alpha**2 == pytest.approx(-cs.xi_alpha, rel=1e-14)
    cs0 = coupling_state(0.0)
    assert cs0.xi_alpha == pytest.approx(-1.26095, abs=1e-5)
    assert cs0.zeta_alpha == pytest.approx(1.12292, abs=1e-5)
    assert coupling_state(-1.0).xi_alpha == pytest.approx(-361578.21, abs=0.01)
    assert coupling_state(-2.0).xi_alpha < coupling_state(-1.0).xi_alpha


@pytest.mark.parametrize("a", [51.0, -51.0, float("inf"), float("nan")])
def test_coupling_guard(a):
    with pytest.raises(RegimeError):
        coupling_state(a)


def test_dirichlet_d1_zeta10_against_bisection_oracle():
    cs = state(10.0)
    r = solve_dirichlet_root(cs, 1.0)
    assert 9.999 < r.k_root < 10.0
    # independent high-precision bisection on x - zeta exp(-K0(x)/I0(x))
    mp.mp.dps = 40
    f = lambda x: x - 10 * mp.exp(-mp.besselk(0, x) / mp.besseli(0, x))
    ref = mp.findroot(f, (mp.mpf("9.99"), mp.mpf(10)), solver="bisect", tol=1e-35)
    assert r.k_root == pytest.approx(float(ref), rel=1e-14)
    assert r.offset_sign == 1 and r.energy > cs.xi_alpha
    assert r.offset == pytest.approx(float(100 - ref**2), rel=1e-9)
    assert r.residual <= 1e-12 * cs.zeta_alpha
    lo, hi = r.bracket
    assert 0 < lo < r.k_root <= hi <= cs.zeta_alpha


def test_dirichlet_solvability_error():
    cs = state(1.0)
    assert solvability(cs, 0.1) == pytest.approx(0.089, abs=1e-3)
    with pytest.raises(RegimeError, match="g = "):
        solve_dirichlet_root(cs, 0.1)


def test_dirichlet_relative_gap_closes():
    d = 1.0
    gaps = [solve_dirichlet_root(coupling_state(a), d).log_relative_gap for a in SCHEDULE]
    assert gaps[0] > gaps[1] > gaps[2]


def test_robin_w_violation():
    with pytest.raises(RegimeError, match="w_d"):
        solve_robin_root(coupling_state(-1.0), 1.0, 1.0)


def test_robin_m0_above_zeta_and_approaching():
    prev = None
    for a in SCHEDULE:
        cs = coupling_state(a)
        d = math.exp(math.pi * a)
        r = solve_robin_root(cs, d, 0.0)
        assert r.w == 0.5
        assert r.k_root >= cs.zeta_alpha and r.offset_sign == -1
        if prev is not None:
            assert r.log_relative_gap < prev
        prev = r.log_relative_gap


def test_robin_against_mpmath_oracle():
    # moderate d zeta so the shift is resolvable in double precision
    cs = state(10.0)
    d, w = 0.8, 0.3
    r = _robin_root(cs, d, w)
    mp.mp.dps = 40

    def eta(x):
        y = x * d
        sk = -mp.besselk(1, y) * y + w * mp.besselk(0, y)
        si = mp.besseli(1, y) * y + w * mp.besseli(0, y)
        return mp.exp(-sk / si)

    ref = mp.findroot(lambda x: x - 10 * eta(x), (mp.mpf(10), mp.mpf(200)), solver="bisect", tol=1e-35)
    assert r.k_root == pytest.approx(float(ref), rel=1e-13)
    assert r.offset == pytest.approx(float(100 - ref**2), rel=1e-8)


def test_ordering_with_nonpositive_weight():
    # the full-weight rim coefficient gives w <= 0; ordering still holds
    for a in SCHEDULE:
        cs = coupling_state(a)
        d = math.exp(math.pi * a)
        lo = _robin_root(cs, d, -0.5 * d / (1 + d))
        hi = solve_dirichlet_root(cs, d)
        assert lo.offset_sign == -1 and hi.offset_sign == 1


def test_log_offset_matches_direct_difference_when_resolvable():
    cs = state(3.0)
    r = solve_dirichlet_root(cs, 1.0)
    direct = cs.zeta_alpha**2 - r.k_root**2
    assert r.offset == pytest.approx(direct, rel=1e-8)


def test_eta_below_one():
    # eta = exp(-rho) < 1 iff rho > 0; test rho itself since exp rounds to 1
    for y in np.logspace(-6, 3, 100):
        rho, sign, log_rho, _ = _dirichlet_rho(y)
        assert sign == 1 and math.isfinite(log_rho)
        assert rho > 0 or log_rho < -740


def test_envelope_closed_form():
    cs = state(10.0)
    e = envelope(cs, 1.0, 1.0, 1.0)
    assert e.value == pytest.approx(100 * math.sqrt(10) * math.exp(-10), rel=1e-14)
    assert envelope(cs, 2.0, 1.0, 1.0).value < e.value
    with pytest.raises(ValueError):
        envelope(cs, 1.0, 0.0, 1.0)


def test_fitted_envelope_negative_slope():
    roots = [solve_dirichlet_root(coupling_state(a), math.exp(math.pi * a)) for a in (-1, -1.5, -2, -2.5)]
    fit = fit_envelope(roots)
    assert fit.slope < 0
    assert fit.c2 == pytest.approx(2.0, abs=0.05)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=-2.5, max_value=-0.5), st.floats(min_value=0.0, max_value=0.45))
def test_squeeze_ordering_property(alpha, w):
    cs = coupling_state(alpha)
    d = 2.0 * math.exp(math.pi * alpha)
    hi = solve_dirichlet_root(cs, d)
    lo = _robin_root(cs, d, w if w > 0 else 0.05)
    assert lo.offset_sign == -1 < 0 < hi.offset_sign
    assert lo.energy <= cs.xi_alpha <= hi.energy
    assert hi.residual <= 1e-12 * cs.zeta_alpha and lo.residual <= 1e-12 * cs.zeta_alpha
