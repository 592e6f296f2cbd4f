"""Two-sided eigenvalue bounds from a tube of radius ``d`` around the curve.

Inside the tube the metric is governed by the factor
``h(s, r, theta) = 1 + r kappa(s) cos(theta - beta(s))``.  Grid suprema of
``|h^-2 - 1|`` and of the deviation of the effective potential from
``-kappa^2/4`` give the constants of the longitudinal operators

    L_d^(+-) = -(1 +- C_h d) d^2/ds^2 - kappa^2/4 +- C_V d,

and the transverse disc problems (see :mod:`leakywire.transverse`) supply the
matching energies ``t^-`` and ``t^+``.  :func:`squeeze_check` verifies

    l_j^- + t^-  <=  xi_alpha + mu_j  <=  l_j^+ + t^+

row by row, tracking the tiny transverse shifts ``t - xi`` in log form.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from . import comparison
from .errors import GeometryError, RegimeError
from .geometry import CurvatureProfile
from .transverse import (CouplingState, TransverseEigenvalue, _robin_root, coupling_state,
                         solve_dirichlet_root, solve_robin_root)


def _fd4_first(f: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order first derivative on a uniform open grid (one-sided at the ends)."""
    n = f.shape[0]
    if n < 5:
        raise GeometryError("need at least 5 grid points for fourth-order differences")
    out = np.empty_like(f)
    out[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    c = np.array([-25, 48, -36, 16, -3]) / (12 * h)
    out[0] = np.tensordot(c, f[0:5], axes=1)
    out[1] = np.tensordot(np.array([-3, -10, 18, -6, 1]) / (12 * h), f[0:5], axes=1)
    out[-1] = -np.tensordot(c, f[::-1][0:5], axes=1)
    out[-2] = -np.tensordot(np.array([-3, -10, 18, -6, 1]) / (12 * h), f[::-1][0:5], axes=1)
    return out


def _spectral_derivatives(f: np.ndarray, length: float):
    n = f.size
    k = 2j * np.pi * np.fft.fftfreq(n, d=length / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    F = np.fft.fft(f)
    return np.fft.ifft(k * F).real, np.fft.ifft(k * k * F).real


def _s_derivatives(values: np.ndarray, profile: CurvatureProfile):
    if profile.periodic:
        return _spectral_derivatives(values, profile.length)
    h = profile.grid[1] - profile.grid[0]
    d1 = _fd4_first(values, h)
    return d1, _fd4_first(d1, h)


BetaSpec = Union[str, float, Callable[[np.ndarray], np.ndarray]]


def _beta_fields(profile: CurvatureProfile, beta: BetaSpec):
    """beta(s), beta'(s), beta''(s) on the profile grid.

    ``"tang"`` integrates beta' = torsion (zero when torsion is unavailable),
    which is the rotation that keeps the tube metric diagonal.
    """
    s = profile.grid
    if isinstance(beta, str):
        if beta != "tang":
            raise ValueError(f"unknown beta rule {beta!r}")
        tau = profile.torsion_at(s)
        if tau is None:
            z = np.zeros_like(s)
            return z, z, z
        tau = np.asarray(tau, dtype=float)
        if np.max(np.abs(tau)) == 0.0:
            z = np.zeros_like(s)
            return z, z, z
        ds = s[1] - s[0]
        b = np.concatenate([[0.0], np.cumsum(0.5 * (tau[1:] + tau[:-1]) * ds)])
        if profile.periodic:
            dtau, _ = _spectral_derivatives(tau, profile.length)
        else:
            dtau = _fd4_first(tau, ds)
        return b, tau, dtau
    if callable(beta):
        b = np.asarray(beta(s), dtype=float) * np.ones_like(s)
        b1, b2 = _s_derivatives(b, profile) if not profile.periodic else _periodic_beta_derivs(b, profile)
        return b, b1, b2
    b = np.full_like(s, float(beta))
    z = np.zeros_like(s)
    return b, z, z


def _periodic_beta_derivs(b, profile):
    # beta may wind by a multiple of 2 pi over one period; differentiate the periodic part
    L = profile.length
    n = b.size
    jump = b[0] + (b[-1] - b[0]) * n / (n - 1) - b[0]
    winding = 2 * np.pi * round(jump / (2 * np.pi))
    lin = winding * (profile.grid - profile.grid[0]) / L
    d1, d2 = _spectral_derivatives(b - lin, L)
    return d1 + winding / L, d2


@dataclass(frozen=True, eq=False)
class TubeFactorField:
    s: np.ndarray
    r: np.ndarray
    theta: np.ndarray
    beta: np.ndarray
    kappa: np.ndarray
    h: np.ndarray        # shape (n_s, n_r, n_theta)
    h_s: np.ndarray
    h_ss: np.ndarray
    h_r: np.ndarray
    d: float


def tube_factor_field(profile: CurvatureProfile, d: float, n_r: int = 17, n_theta: int = 32,
                      beta: BetaSpec = "tang") -> TubeFactorField:
    """Tabulate ``h`` and its s-derivatives on ``grid x [0, d] x [0, 2 pi)``.

    ``n_theta`` should be divisible by 4 so the grid hits the extremes of
    ``cos(theta - beta)`` when beta is constant.
    """
    d = float(d)
    if not d > 0:
        raise GeometryError(f"tube radius must be positive, got {d!r}")
    if not d * profile.kappa_sup < 1.0:
        raise GeometryError(f"tube not admissible: d * kappa_sup = {d * profile.kappa_sup:.6g} >= 1")
    kappa = np.asarray(profile.kappa, dtype=float)
    k1, k2 = _s_derivatives(kappa, profile)
    b, b1, b2 = _beta_fields(profile, beta)
    r = np.linspace(0.0, d, n_r)
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    phase = theta[None, :] - b[:, None]
    c = np.cos(phase)[:, None, :]
    sn = np.sin(phase)[:, None, :]
    R = r[None, :, None]
    K, K1, K2 = kappa[:, None, None], k1[:, None, None], k2[:, None, None]
    B1, B2 = b1[:, None, None], b2[:, None, None]
    h = 1.0 + R * K * c
    h_s = R * (K1 * c + K * B1 * sn)
    h_ss = R * (K2 * c + 2 * K1 * B1 * sn + K * B2 * sn - K * B1**2 * c)
    h_r = np.broadcast_to(K * c, h.shape)
    return TubeFactorField(s=profile.grid, r=r, theta=theta, beta=b, kappa=kappa, h=h, h_s=h_s,
                           h_ss=h_ss, h_r=h_r, d=d)


def effective_potential(field: TubeFactorField, profile: Optional[CurvatureProfile] = None):
    """``V = -kappa^2/(4h^2) + h_ss/(2h^3) - 5 h_s^2/(4h^4)`` and ``sup|V + kappa^2/4|``."""
    h = field.h
    K2 = field.kappa[:, None, None] ** 2
    V = -K2 / (4 * h**2) + field.h_ss / (2 * h**3) - 5 * field.h_s**2 / (4 * h**4)
    return V, float(np.max(np.abs(V + 0.25 * K2)))


@dataclass(frozen=True)
class TubeConstants:
    """Grid-supremum constants for one profile and tube radius.

    ``M`` is the rim coefficient ``sup |g^(1/4) d_r g^(-1/4)|`` at ``r = d`` for
    the weight ``g = h^2 r^2``; it contains the flat-disc part ``1/(2d)``, so
    ``w_d = 1/2 - M d`` is never positive.  ``M_excess`` keeps only the
    curvature part ``sup |h_r / (2h)|`` and ``w_robin = 1/2 - M_excess d`` is
    the weight actually fed to the Robin disc problem.
    """

    d: float
    C_h: float
    C_V: float
    M: float
    w_d: float
    M_excess: float
    w_robin: float
    v: float

    @property
    def C_h_minus(self) -> float:
        return 1.0 - self.C_h * self.d

    @property
    def C_h_plus(self) -> float:
        return 1.0 + self.C_h * self.d

    @property
    def w_d_flagged(self) -> bool:
        return not self.w_d > 0


def _rim_derivative(f: np.ndarray, r: np.ndarray) -> np.ndarray:
    """One-sided fourth-order d/dr at the last r node (axis 1)."""
    h = r[1] - r[0]
    c = np.array([3, -16, 36, -48, 25]) / (12 * h)
    return np.tensordot(f[:, -5:, :], c, axes=([1], [0]))


def estimate_constants(profile: CurvatureProfile, d: float, n_r: int = 17, n_theta: int = 32,
                       beta: BetaSpec = "tang", field: Optional[TubeFactorField] = None) -> TubeConstants:
    if field is None:
        field = tube_factor_field(profile, d, n_r=n_r, n_theta=n_theta, beta=beta)
    d = field.d
    C_h = float(np.max(np.abs(field.h**-2 - 1.0))) / d
    _, dev = effective_potential(field)
    C_V = dev / d
    r = field.r
    # g^(1/4) d_r g^(-1/4) = -(1/2) d_r ln(h r), differenced in r at the rim
    log_hr = np.log(field.h[:, 1:, :] * r[None, 1:, None])
    M = 0.5 * float(np.max(np.abs(_rim_derivative(log_hr, r[1:]))))
    M_excess = 0.5 * float(np.max(np.abs(_rim_derivative(np.log(field.h), r))))
    return TubeConstants(d=d, C_h=C_h, C_V=C_V, M=M, w_d=0.5 - M * d, M_excess=M_excess,
                         w_robin=0.5 - M_excess * d, v=0.25 * profile.kappa_sup**2)


def longitudinal_bounds(profile: CurvatureProfile, consts: TubeConstants, bc: str, j_max: int,
                        n: int = 2048, **kw):
    """Spectra of ``L_d^-`` and ``L_d^+`` (in that order)."""
    dv = consts.C_V * consts.d
    lo = comparison.spectrum(profile, bc, j_max, n=n, kinetic=consts.C_h_minus, shift=-dv, **kw)
    hi = comparison.spectrum(profile, bc, j_max, n=n, kinetic=consts.C_h_plus, shift=dv, **kw)
    return lo, hi


# --------------------------------------------------------------------------
# squeeze


@dataclass(frozen=True)
class SqueezeRow:
    j: int
    mu: float
    l_minus: float
    l_plus: float
    lower: float
    center: float
    upper: float
    lower_gap: float  # center - lower, assembled without cancellation
    upper_gap: float  # upper - center
    passed: bool
    strict: bool      # gaps nonnegative up to the eigenvalue refinement error


@dataclass(frozen=True)
class SqueezeReport:
    alpha: float
    d: float
    j_max: int
    bc: str
    rows: tuple
    constants: TubeConstants
    t_minus: TransverseEigenvalue = field(repr=False)
    t_plus: TransverseEigenvalue = field(repr=False)

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def all_strict(self) -> bool:
        return all(r.strict for r in self.rows)

    @property
    def widths(self) -> np.ndarray:
        return np.array([r.lower_gap + r.upper_gap for r in self.rows])

    @property
    def below_threshold(self) -> tuple:
        """Rows predicting eigenvalues below ``xi_alpha`` (``mu_j < 0``)."""
        return tuple(r for r in self.rows if r.mu < 0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "lower", "center", "upper", "pass"])
        for r in self.rows:
            w.writerow([r.j, f"{r.lower:.17g}", f"{r.center:.17g}", f"{r.upper:.17g}", int(r.passed)])
        return buf.getvalue()

    def to_text(self) -> str:
        head = f"alpha = {self.alpha:g}  d = {self.d:.6g}  bc = {self.bc}\n"
        head += f"{'j':>3} {'mu_j':>14} {'center - lower':>16} {'upper - center':>16}  pass\n"
        body = "".join(f"{r.j:>3} {r.mu:>14.8f} {r.lower_gap:>16.6e} {r.upper_gap:>16.6e}  "
                       f"{'yes' if r.passed else 'NO'}\n" for r in self.rows)
        return head + body


def resolve_d(d_rule, alpha: float) -> float:
    """``"auto"`` means ``d = exp(pi alpha)``; numbers are fixed radii; callables map alpha to d."""
    if d_rule is None or d_rule == "auto":
        return math.exp(math.pi * alpha)
    if callable(d_rule):
        return float(d_rule(alpha))
    return float(d_rule)


def squeeze_check(profile: CurvatureProfile, alpha: float, j_max: int = 5, d_rule="auto",
                  bc: Optional[str] = None, n: int = 2048, rim: str = "excess", rel_tol: float = 1e-9,
                  beta: BetaSpec = "tang") -> SqueezeReport:
    """Compare ``xi_alpha + mu_j`` with the bracket ``[l_j^- + t^-, l_j^+ + t^+]``.

    ``rim="excess"`` feeds ``w_robin`` to the Robin disc problem;
    ``rim="literal"`` uses ``w_d`` as defined from the full weight (it is
    never positive, so the root is found without the ``w > 0`` guard).
    """
    cs: CouplingState = coupling_state(alpha)
    d = resolve_d(d_rule, alpha)
    if not d > 0:
        raise RegimeError(f"tube radius must be positive, got {d!r}")
    if bc is None:
        bc = "periodic" if profile.periodic else "dirichlet"
    consts = estimate_constants(profile, d, beta=beta)
    t_plus = solve_dirichlet_root(cs, d)
    if rim == "excess":
        t_minus = solve_robin_root(cs, d, consts.M_excess)
    elif rim == "literal":
        t_minus = _robin_root(cs, d, consts.w_d, M=consts.M)
    else:
        raise ValueError(f"unknown rim rule {rim!r}")

    mu = comparison.spectrum(profile, bc, j_max, n=n)
    lm, lp = longitudinal_bounds(profile, consts, bc, j_max, n=n)
    xi = cs.xi_alpha
    rows = []
    for j in range(j_max):
        center = xi + mu.mu[j]
        lower_gap = (mu.mu[j] - lm.mu[j]) - t_minus.offset
        upper_gap = (lp.mu[j] - mu.mu[j]) + t_plus.offset
        tol = rel_tol * abs(center)
        err = mu.refine_error[j] + max(lm.refine_error[j], lp.refine_error[j])
        rows.append(SqueezeRow(j=j + 1, mu=float(mu.mu[j]), l_minus=float(lm.mu[j]), l_plus=float(lp.mu[j]),
                               lower=float(lm.mu[j] + t_minus.energy), center=float(center),
                               upper=float(lp.mu[j] + t_plus.energy), lower_gap=float(lower_gap),
                               upper_gap=float(upper_gap),
                               passed=bool(lower_gap >= -tol and upper_gap >= -tol),
                               strict=bool(lower_gap >= -err and upper_gap >= -err)))
    return SqueezeReport(alpha=cs.alpha, d=d, j_max=j_max, bc=bc, rows=tuple(rows), constants=consts,
                         t_minus=t_minus, t_plus=t_plus)
