r"""Modified Bessel functions :math:`I_0, I_1, K_0, K_1` of real positive argument.

Branches:

* :math:`I_\nu`: ascending power series for ``x <= 20``, Hankel asymptotic
  expansion above (all series terms are positive, so the power series keeps
  full relative precision up to the crossover).
* :math:`K_\nu`: logarithmic power series for ``x <= 2``; Steed's continued
  fraction (Temme's CF2 form) for ``x > 2``.  The power series cancels badly
  for larger arguments, and the plain asymptotic series cannot reach
  :math:`10^{-12}` below ``x ~ 14``, so the continued fraction covers the
  whole upper range.

Exponentially scaled variants (``i0e = I0 e^{-x}``, ``k0e = K0 e^{x}``) are
exposed for the transverse root equations, where ratios such as
:math:`K_0(y)/I_0(y)` underflow long before they stop mattering in log form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LeakyWireError

EULER_GAMMA = 0.5772156649015329
PSI_1 = -EULER_GAMMA

X_MAX = 700.0
_I_SERIES_MAX = 20.0
_K_SERIES_MAX = 2.0
_EPS = 2.220446049250313e-16


class BesselDomainError(LeakyWireError, ValueError):
    pass


def _i_series(x: float) -> tuple[float, float]:
    q = 0.25 * x * x
    t0 = 1.0
    t1 = 1.0
    s0 = 1.0
    s1 = 1.0
    k = 0
    while True:
        k += 1
        t0 *= q / (k * k)
        t1 *= q / (k * (k + 1))
        s0 += t0
        s1 += t1
        if t0 < _EPS * 0.25 * s0 and t1 < _EPS * 0.25 * s1:
            break
    return s0, 0.5 * x * s1


def _i_asymptotic_scaled(x: float) -> tuple[float, float]:
    """Hankel expansion of I0 e^{-x}, I1 e^{-x}, truncated at the smallest term."""
    pref = 1.0 / math.sqrt(2.0 * math.pi * x)
    out = []
    for nu in (0, 1):
        mu = 4.0 * nu * nu
        term = 1.0
        total = 1.0
        k = 0
        while k < 200:
            k += 1
            nxt = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
            if abs(nxt) >= abs(term):
                break
            term = nxt
            total += term
            if abs(term) < _EPS * 0.1 * abs(total):
                break
        out.append(pref * total)
    return out[0], out[1]


def _k_series(x: float, i0: float, i1: float) -> tuple[float, float]:
    q = 0.25 * x * x
    lg = math.log(0.5 * x)
    # K0 = -(ln(x/2) + gamma) I0 + sum_{k>=1} H_k q^k / (k!)^2
    t = 1.0
    harm = 0.0
    s0 = 0.0
    k = 0
    while True:
        k += 1
        t *= q / (k * k)
        harm += 1.0 / k
        s0 += harm * t
        if harm * t < _EPS * 0.1 * abs(s0):
            break
    k0 = -(lg + EULER_GAMMA) * i0 + s0
    # K1 = 1/x + ln(x/2) I1 - (x/4) sum_{k>=0} (psi(k+1)+psi(k+2)) q^k/(k!(k+1)!)
    t = 1.0
    psi_a = -EULER_GAMMA
    psi_b = 1.0 - EULER_GAMMA
    s1 = psi_a + psi_b
    k = 0
    while True:
        k += 1
        t *= q / (k * (k + 1))
        psi_a += 1.0 / k
        psi_b += 1.0 / (k + 1)
        term = (psi_a + psi_b) * t
        s1 += term
        if abs(term) < _EPS * 0.1 * abs(s1):
            break
    k1 = 1.0 / x + lg * i1 - 0.25 * x * s1
    return k0, k1


def _k_cf2_scaled(x: float) -> tuple[float, float]:
    """Steed's algorithm for K0 e^{x}, K1 e^{x} (order mu = 0), valid for x >= 2."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 10000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    else:  # pragma: no cover
        raise LeakyWireError(f"K continued fraction did not converge at x={x}")
    h = a1 * h
    k0 = math.sqrt(math.pi / (2.0 * x)) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def _check(x: float) -> float:
    x = float(x)
    if not (x > 0.0) or math.isnan(x):
        raise BesselDomainError(f"Bessel argument must be positive, got {x!r}")
    if x > X_MAX:
        raise BesselDomainError(f"Bessel argument {x!r} exceeds overflow guard {X_MAX}")
    return x


def bessel_scaled(x: float) -> tuple[float, float, float, float]:
    """Return ``(I0 e^{-x}, I1 e^{-x}, K0 e^{x}, K1 e^{x})``.

    No overflow guard applies to the scaled values, but the argument must be
    positive and finite.
    """
    x = float(x)
    if not (x > 0.0) or not math.isfinite(x):
        raise BesselDomainError(f"Bessel argument must be positive and finite, got {x!r}")
    if x <= _I_SERIES_MAX:
        i0, i1 = _i_series(x)
        e = math.exp(-x)
        i0e, i1e = i0 * e, i1 * e
    else:
        i0e, i1e = _i_asymptotic_scaled(x)
    if x <= _K_SERIES_MAX:
        k0, k1 = _k_series(x, i0, i1)
        e = math.exp(x)
        k0e, k1e = k0 * e, k1 * e
    else:
        k0e, k1e = _k_cf2_scaled(x)
    return i0e, i1e, k0e, k1e


@dataclass(frozen=True)
class BesselQuad:
    x: float
    i0: float
    i1: float
    k0: float
    k1: float
    est_error: float


def bessel_quad(x: float) -> BesselQuad:
    """Evaluate I0, I1, K0, K1 at ``0 < x <= 700``.

    ``est_error`` is the relative Wronskian defect
    ``|x (I0 K1 + I1 K0) - 1|``, floored at a few ulps; it couples every
    branch at once and so tracks the worst of the four values.
    """
    x = _check(x)
    i0e, i1e, k0e, k1e = bessel_scaled(x)
    if x <= _I_SERIES_MAX:
        # undo scaling exactly as applied
        i0, i1 = _i_series(x)
        if x <= _K_SERIES_MAX:
            k0, k1 = _k_series(x, i0, i1)
        else:
            e = math.exp(-x)
            k0, k1 = k0e * e, k1e * e
    else:
        e = math.exp(x)
        i0, i1 = i0e * e, i1e * e
        e = math.exp(-x)
        k0, k1 = k0e * e, k1e * e
    wr = abs(x * (i0e * k1e + i1e * k0e) - 1.0)
    return BesselQuad(x=x, i0=i0, i1=i1, k0=k0, k1=k1, est_error=max(wr, 4 * _EPS))


def i0(x: float) -> float:
    return bessel_quad(x).i0


def i1(x: float) -> float:
    return bessel_quad(x).i1


def k0(x: float) -> float:
    return bessel_quad(x).k0


def k1(x: float) -> float:
    return bessel_quad(x).k1


def bessel_table(xs) -> np.ndarray:
    """Rows ``(i0, i1, k0, k1)`` for each entry of ``xs``."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    out = np.empty((xs.size, 4))
    for n, x in enumerate(xs):
        b = bessel_quad(x)
        out[n] = (b.i0, b.i1, b.k0, b.k1)
    return out
