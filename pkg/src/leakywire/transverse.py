r"""Transverse point-interaction energy and its disc-confined perturbations.

A point interaction of strength ``alpha`` in the plane has the single bound
state energy ``xi = -4 exp(2(-2 pi alpha + psi(1)))``.  Confining it to a disc
of radius ``d`` moves that energy up (Dirichlet rim) or down (Robin rim).
The new energies are ``-k^2`` where ``k`` solves ``k = zeta * eta(k)`` with

* Dirichlet: ``eta(x) = exp(-K0(xd) / I0(xd))``
* Robin:     ``eta(x) = exp(-S_K(xd) / S_I(xd))``,
  ``S_K(y) = -y K1(y) + w K0(y)``, ``S_I(y) = y I1(y) + w I0(y)``.

For realistic tube radii ``K0/I0 ~ exp(-2 d zeta)`` is far below machine
epsilon relative to one, so ``k`` rounds to ``zeta``.  The energy shift
``t - xi = zeta^2 (1 - eta^2)`` is therefore carried separately as a sign and a
natural logarithm, evaluated from exponentially scaled Bessel values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import RegimeError, SolverError
from .special import EULER_GAMMA, PSI_1, bessel_scaled

ALPHA_GUARD = 50.0
RESIDUAL_TOL = 1e-12
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class CouplingState:
    alpha: float
    xi_alpha: float
    zeta_alpha: float

    @property
    def log_zeta(self) -> float:
        return math.log(self.zeta_alpha)


def coupling_state(alpha: float) -> CouplingState:
    alpha = float(alpha)
    if not math.isfinite(alpha):
        raise RegimeError(f"coupling alpha must be finite, got {alpha!r}")
    if abs(alpha) > ALPHA_GUARD:
        raise RegimeError(f"|alpha| = {abs(alpha):g} exceeds the overflow guard {ALPHA_GUARD:g}")
    xi = -4.0 * math.exp(2.0 * (-2.0 * math.pi * alpha + PSI_1))
    zeta = 2.0 * math.exp(-2.0 * math.pi * alpha + PSI_1)
    return CouplingState(alpha=alpha, xi_alpha=xi, zeta_alpha=zeta)


@dataclass(frozen=True)
class TransverseEigenvalue:
    """Confined transverse energy ``-k_root**2``.

    ``offset_sign`` and ``log_offset`` encode ``energy - xi_alpha`` exactly even
    when the difference is below double-precision resolution of ``energy``.
    """

    variant: str
    d: float
    M: Optional[float]
    w: Optional[float]
    alpha: float
    xi_alpha: float
    zeta_alpha: float
    k_root: float
    energy: float
    offset_sign: int
    log_offset: float
    residual: float
    bracket: tuple

    @property
    def offset(self) -> float:
        return self.offset_sign * math.exp(self.log_offset)

    @property
    def log_relative_gap(self) -> float:
        """``ln(|t - xi| / |xi|)``."""
        return self.log_offset - 2.0 * math.log(self.zeta_alpha)


def solvability(cs: CouplingState, d: float) -> float:
    """``g = exp(-psi(1)) d zeta / 2``; the Dirichlet root exists iff ``g > 1``."""
    return 0.5 * math.exp(EULER_GAMMA) * d * cs.zeta_alpha


# --------------------------------------------------------------------------
# exponent functions: rho(y) with eta = exp(-rho), returned as value, log|.|
# and derivative d rho / dy


def _dirichlet_rho(y: float):
    i0e, i1e, k0e, k1e = bessel_scaled(y)
    log_rho = math.log(k0e / i0e) - 2.0 * y
    rho = math.exp(log_rho) if log_rho > -745.0 else 0.0
    # (K0/I0)' = -1 / (y I0^2) by the Wronskian
    drho = -math.exp(-2.0 * y - math.log(y) - 2.0 * math.log(i0e)) if y < 370.0 else 0.0
    return rho, 1, log_rho, drho


def _robin_rho(y: float, w: float):
    i0e, i1e, k0e, k1e = bessel_scaled(y)
    sk = w * k0e - y * k1e          # S_K e^{y}
    si = y * i1e + w * i0e          # S_I e^{-y}
    if si <= 0.0:
        raise RegimeError(f"Robin denominator S_I vanishes at y={y:g} (w={w:g})")
    if sk == 0.0:
        return 0.0, 0, -math.inf, 0.0
    sign = 1 if sk > 0 else -1
    log_rho = math.log(abs(sk) / si) - 2.0 * y
    rho = sign * math.exp(log_rho) if log_rho > -745.0 else 0.0
    dsk = y * k0e - w * k1e
    dsi = y * i0e + w * i1e
    drho = (dsk * si - sk * dsi) / (si * si) * math.exp(-2.0 * y) if y < 370.0 else 0.0
    return rho, sign, log_rho, drho


def _log_offset(log_zeta: float, sign_rho: int, log_rho: float):
    """Sign and log of ``zeta^2 (1 - exp(-2 rho))`` given ``rho`` in sign/log form."""
    if sign_rho == 0:
        return 0, -math.inf
    if log_rho < -30.0:
        # 1 - exp(-2 rho) = 2 rho (1 - rho + ...)
        lo = _LN2 + log_rho + math.log1p(-sign_rho * math.exp(log_rho))
    else:
        rho = sign_rho * math.exp(log_rho)
        lo = math.log(abs(math.expm1(-2.0 * rho)))
    return sign_rho, 2.0 * log_zeta + lo


def _solve(cs: CouplingState, d: float, rho_fn, lo: float, hi: float, variant: str,
           M=None, w=None) -> TransverseEigenvalue:
    """Bisection on ``h(x) = x - zeta exp(-rho(xd))`` then safeguarded Newton."""
    zeta = cs.zeta_alpha

    def h_and_dh(x):
        rho, _, _, drho = rho_fn(x * d)
        eta = math.exp(-rho)
        return x - zeta * eta, 1.0 + zeta * eta * d * drho

    target = 1e-3 * zeta
    while hi - lo > target:
        mid = 0.5 * (lo + hi)
        if h_and_dh(mid)[0] < 0.0:
            lo = mid
        else:
            hi = mid
    bracket = (lo, hi)

    xs = np.linspace(lo, hi, 64)
    if not all(h_and_dh(x)[1] > 0.0 for x in xs):
        raise SolverError(f"{variant}: root function not monotone on the final bracket {bracket}")

    a, b = lo, hi
    x = 0.5 * (a + b)
    for _ in range(100):
        hx, dhx = h_and_dh(x)
        if hx == 0.0:
            break
        if hx < 0.0:
            a = x
        else:
            b = x
        step = hx / dhx
        xn = x - step
        if not (a < xn < b):
            xn = 0.5 * (a + b)
        if abs(xn - x) <= 4 * np.finfo(float).eps * x or b - a <= 4 * np.finfo(float).eps * x:
            x = xn
            break
        x = xn
    res = abs(h_and_dh(x)[0])
    if res > RESIDUAL_TOL * zeta:
        raise SolverError(f"{variant}: root residual {res:.3e} exceeds {RESIDUAL_TOL:g} zeta")
    _, srho, log_rho, _ = rho_fn(x * d)
    # t - xi = zeta^2 - k^2 = zeta^2 (1 - eta^2) since k = zeta eta
    sign, log_off = _log_offset(cs.log_zeta, srho, log_rho)
    return TransverseEigenvalue(variant=variant, d=float(d), M=M, w=w, alpha=cs.alpha,
                                xi_alpha=cs.xi_alpha, zeta_alpha=zeta, k_root=x, energy=-x * x,
                                offset_sign=sign, log_offset=log_off, residual=res, bracket=bracket)


def solve_dirichlet_root(cs: CouplingState, d: float) -> TransverseEigenvalue:
    """Energy ``t+ > xi`` of the disc of radius ``d`` with a Dirichlet rim."""
    d = float(d)
    if not d > 0.0:
        raise RegimeError(f"tube radius must be positive, got {d!r}")
    g = solvability(cs, d)
    if not g > 1.0:
        raise RegimeError(f"solvability condition g = exp(-psi(1)) d zeta / 2 > 1 violated: "
                          f"g = {g:.6g} (coupling too weak for d = {d:g})")
    zeta = cs.zeta_alpha
    rho_fn = _dirichlet_rho
    lo = 1e-6 * zeta
    for _ in range(200):
        rho = rho_fn(lo * d)[0]
        if lo - zeta * math.exp(-rho) < 0.0:
            break
        lo *= 0.5
    else:
        raise SolverError("could not bracket the Dirichlet root from below")
    return _solve(cs, d, rho_fn, lo, zeta, "dirichlet-plus")


def _robin_root(cs: CouplingState, d: float, w: float, M=None, max_window: float = 1e6) -> TransverseEigenvalue:
    """Robin root for an arbitrary rim weight ``w`` (no sign requirement)."""
    zeta = cs.zeta_alpha

    def rho_fn(y):
        return _robin_rho(y, w)

    # h(zeta) = -zeta expm1(-rho) has the sign of rho even when rho underflows
    if rho_fn(zeta * d)[1] >= 0:
        raise RegimeError(f"Robin root not above zeta: d zeta = {d * zeta:.4g} too small for w = {w:g}")
    factor = 20.0
    while True:
        hi = factor * zeta
        if hi - zeta * math.exp(-rho_fn(hi * d)[0]) > 0.0:
            break
        factor *= 4.0
        if factor > max_window:
            raise RegimeError(f"no sign change of the Robin root function in [zeta, {max_window:g} zeta]")
    return _solve(cs, d, rho_fn, zeta, hi, "robin-minus", M=M, w=w)


def solve_robin_root(cs: CouplingState, d: float, M: float) -> TransverseEigenvalue:
    """Energy ``t- < xi`` of the disc with rim condition weight ``w = 1/2 - M d``."""
    d = float(d)
    M = float(M)
    if not d > 0.0:
        raise RegimeError(f"tube radius must be positive, got {d!r}")
    if M < 0.0:
        raise RegimeError(f"boundary coefficient M must be nonnegative, got {M!r}")
    w = 0.5 - M * d
    if not w > 0.0:
        raise RegimeError(f"rim weight w_d = 1/2 - M d = {w:.6g} must be positive")
    return _robin_root(cs, d, w, M=M)


# --------------------------------------------------------------------------
# envelope


@dataclass(frozen=True)
class EnvelopeEstimate:
    value: float
    log_value: float
    c1: float
    c2: float
    d: float
    zeta: float


def envelope(cs: CouplingState, d: float, c1: float, c2: float) -> EnvelopeEstimate:
    """``c1 zeta^2 sqrt(d zeta) exp(-c2 d zeta)``."""
    if not (c1 > 0 and c2 > 0):
        raise ValueError("envelope constants must be positive")
    if not d > 0:
        raise ValueError("tube radius must be positive")
    z = cs.zeta_alpha
    u = d * z
    lv = math.log(c1) + 2.0 * math.log(z) + 0.5 * math.log(u) - c2 * u
    return EnvelopeEstimate(value=math.exp(lv), log_value=lv, c1=float(c1), c2=float(c2),
                            d=float(d), zeta=z)


@dataclass(frozen=True)
class EnvelopeFit:
    c1: float
    c2: float
    slope: float
    intercept: float
    max_residual: float


def fit_envelope(roots: Sequence[TransverseEigenvalue]) -> EnvelopeFit:
    """Least-squares ``(c1, c2)`` such that ``|t - xi| ~ c1 zeta^2 sqrt(d zeta) e^{-c2 d zeta}``.

    ``slope`` is the raw slope of ``log|t - xi|`` against ``d zeta``.
    """
    if len(roots) < 2:
        raise ValueError("need at least two roots to fit")
    u = np.array([r.d * r.zeta_alpha for r in roots])
    lo = np.array([r.log_offset for r in roots])
    norm = lo - np.array([2.0 * math.log(r.zeta_alpha) + 0.5 * math.log(r.d * r.zeta_alpha) for r in roots])
    A = np.vstack([u, np.ones_like(u)]).T
    (s, b), *_ = np.linalg.lstsq(A, norm, rcond=None)
    raw_slope = np.polyfit(u, lo, 1)[0]
    return EnvelopeFit(c1=float(math.exp(b)), c2=float(-s), slope=float(raw_slope), intercept=float(b),
                       max_residual=float(np.max(np.abs(A @ np.array([s, b]) - norm))))
