"""Finite-difference spectra of ``-c d^2/ds^2 - kappa(s)^2/4 + shift``.

Boundary closures: ``periodic``, ``dirichlet``, ``neumann`` (mirror ghost
points, symmetrized), ``floquet`` (cyclic wrap times a unit phase) and
``whole-line`` (Dirichlet truncation of ``[-R, R]``).

Cyclic operators are reordered ``0, n-1, 1, n-2, ...`` which turns the
corner entries into a Hermitian band of half-width 2, so every case goes
through a selected-eigenvalue banded or tridiagonal LAPACK solve.  Each
spectrum is computed at ``n`` and at half the grid step; the returned
eigenvalues are the Richardson combination of the two second-order results.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, eig_banded, eigvalsh_tridiagonal

from .errors import GeometryError, SolverError
from .geometry import CurvatureProfile, decay_exponent

BOUNDARY_CONDITIONS = ("periodic", "dirichlet", "neumann", "floquet", "whole-line")


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    n: int
    delta_s: float
    grid: np.ndarray
    potential: np.ndarray
    bc: str
    phase: complex = 1.0
    kinetic: float = 1.0
    shift: float = 0.0
    span: tuple = (0.0, 1.0)
    profile: Optional[CurvatureProfile] = field(default=None, repr=False)

    def refined(self) -> "DiscreteOperator":
        """Same operator on a grid with half the step."""
        m = {"periodic": 2 * self.n, "floquet": 2 * self.n, "dirichlet": 2 * self.n + 1,
             "whole-line": 2 * self.n + 1, "neumann": 2 * self.n - 1}[self.bc]
        return build_operator(self.profile, self.bc, m, phase=self.phase, kinetic=self.kinetic,
                              shift=self.shift, span=self.span)


@dataclass(frozen=True)
class SpectrumResult:
    mu: np.ndarray
    bc: str
    n: int
    refine_error: np.ndarray
    mu_raw: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "mu", "refine_error"])
        for j, (m, e) in enumerate(zip(self.mu, self.refine_error), start=1):
            w.writerow([j, f"{m:.17g}", f"{e:.17g}"])
        return buf.getvalue()


def _grid(bc: str, span, n: int):
    a, b = span
    L = b - a
    if bc in ("periodic", "floquet"):
        h = L / n
        return a + h * np.arange(n), h
    if bc in ("dirichlet", "whole-line"):
        h = L / (n + 1)
        return a + h * np.arange(1, n + 1), h
    h = L / (n - 1)
    return a + h * np.arange(n), h


def build_operator(profile: CurvatureProfile, bc: str, n: int, *, phase: complex = 1.0,
                   kinetic: float = 1.0, shift: float = 0.0, span=None) -> DiscreteOperator:
    """Discretize the comparison operator on ``n`` grid points.

    ``kinetic`` scales the second derivative and ``shift`` is added to the
    potential; both default to the plain operator ``-d^2/ds^2 - kappa^2/4``.
    ``span`` overrides the profile interval (used to widen whole-line
    truncations).
    """
    if bc not in BOUNDARY_CONDITIONS:
        raise SolverError(f"unknown boundary condition {bc!r}; choose from {BOUNDARY_CONDITIONS}")
    if n < 64:
        raise SolverError(f"grid size n={n} is too small (need n >= 64)")
    phase = complex(phase)
    if abs(abs(phase) - 1.0) > 1e-12:
        raise SolverError("Floquet phase must have modulus 1")
    if bc != "floquet" and phase != 1.0:
        raise SolverError("a phase is only meaningful for floquet boundary conditions")
    span = tuple(profile.span if span is None else span)
    grid, h = _grid(bc, span, n)
    kappa = profile.kappa_at(grid)
    pot = -0.25 * kappa**2 + shift
    return DiscreteOperator(n=n, delta_s=h, grid=grid, potential=pot, bc=bc, phase=phase,
                            kinetic=float(kinetic), shift=float(shift), span=span, profile=profile)


def zigzag_order(n: int) -> np.ndarray:
    """Node order 0, n-1, 1, n-2, ... giving a cyclic chain half-bandwidth 2."""
    order = np.empty(n, dtype=int)
    order[0::2] = np.arange((n + 1) // 2)
    order[1::2] = n - 1 - np.arange(n // 2)
    return order


def _cyclic_band(op: DiscreteOperator) -> np.ndarray:
    n = op.n
    c = op.kinetic / op.delta_s**2
    order = zigzag_order(n)
    pos = np.empty(n, dtype=int)
    pos[order] = np.arange(n)
    u = 2
    complex_case = op.bc == "floquet" and op.phase.imag != 0.0
    ab = np.zeros((u + 1, n), dtype=complex if complex_case else float)
    ab[u, pos] = 2.0 * c + op.potential

    i = np.arange(n)
    j = (i + 1) % n
    vals = np.full(n, -c, dtype=ab.dtype)
    # wrap entry A[n-1, 0] carries the Floquet phase
    vals[n - 1] = -c * (op.phase if complex_case else op.phase.real)
    pi, pj = pos[i], pos[j]
    up = pi <= pj
    ab[u + pi[up] - pj[up], pj[up]] = vals[up]
    lo = ~up
    ab[u + pj[lo] - pi[lo], pi[lo]] = np.conj(vals[lo])
    return ab


def raw_eigenvalues(op: DiscreteOperator, count: int) -> np.ndarray:
    """Lowest ``count`` eigenvalues of the discrete matrix, no extrapolation."""
    if count < 1 or count > op.n // 4:
        raise SolverError(f"requested {count} eigenvalues outside the trust region j <= n/4 = {op.n // 4}")
    c = op.kinetic / op.delta_s**2
    try:
        if op.bc in ("periodic", "floquet"):
            vals = eig_banded(_cyclic_band(op), lower=False, eigvals_only=True, select="i",
                              select_range=(0, count - 1), check_finite=False)
        else:
            d = 2.0 * c + op.potential
            e = np.full(op.n - 1, -c)
            if op.bc == "neumann":
                e[0] = e[-1] = -math.sqrt(2.0) * c
            vals = eigvalsh_tridiagonal(d, e, select="i", select_range=(0, count - 1),
                                        check_finite=False)
    except (LinAlgError, ValueError) as exc:
        raise SolverError(f"eigensolver failure: {exc}") from exc
    return np.sort(np.asarray(vals, dtype=float))


def eigenvalues(op: DiscreteOperator, count: int) -> SpectrumResult:
    """Lowest ``count`` eigenvalues, ascending, refined by one grid halving.

    ``mu`` is the Richardson extrapolation ``mu_2n + (mu_2n - mu_n)/3`` and
    ``refine_error`` is ``|mu_2n - mu_n|/3``, the estimated error of the
    finer second-order solve (a conservative bound for ``mu``).
    """
    coarse = raw_eigenvalues(op, count)
    fine = raw_eigenvalues(op.refined(), count)
    corr = (fine - coarse) / 3.0
    return SpectrumResult(mu=fine + corr, bc=op.bc, n=op.n, refine_error=np.abs(corr), mu_raw=fine)


def spectrum(profile: CurvatureProfile, bc: str, count: int, n: int = 2048, **kw) -> SpectrumResult:
    return eigenvalues(build_operator(profile, bc, n, **kw), count)


# --------------------------------------------------------------------------
# Floquet bands


@dataclass(frozen=True)
class BandTable:
    thetas: np.ndarray
    bands: np.ndarray  # shape (theta_count, j_max)
    K: float
    refine_error: np.ndarray

    def theta_index(self, theta: float, tol: float = 1e-12) -> Optional[int]:
        """Index of the grid point equivalent to ``theta`` modulo 2 pi / K."""
        period = 2 * math.pi / self.K
        d = np.abs(np.mod(self.thetas - theta + 0.5 * period, period) - 0.5 * period)
        k = int(np.argmin(d))
        return k if d[k] <= tol * period else None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "j", "mu"])
        for th, row in zip(self.thetas, self.bands):
            for j, m in enumerate(row, start=1):
                w.writerow([f"{th:.17g}", j, f"{m:.17g}"])
        return buf.getvalue()

    def to_gnuplot(self) -> str:
        lines = ["# theta " + " ".join(f"band{j}" for j in range(1, self.bands.shape[1] + 1))]
        for th, row in zip(self.thetas, self.bands):
            lines.append(" ".join(f"{v:.17g}" for v in (th, *row)))
        return "\n".join(lines) + "\n"


def floquet_eigenvalues(profile: CurvatureProfile, K: float, theta: float, j_max: int,
                        n: int = 2048) -> SpectrumResult:
    phase = np.exp(1j * theta * K)
    if abs(phase.imag) < 1e-15:
        phase = complex(round(phase.real), 0.0)
    return eigenvalues(build_operator(profile, "floquet", n, phase=phase), j_max)


def floquet_spectrum(profile: CurvatureProfile, K: float, theta_count: int = 64, j_max: int = 6,
                     n: int = 2048, threads: int = 1) -> BandTable:
    """Bands mu_j(theta) on the uniform grid over ``[-pi/K, pi/K)``."""
    if theta_count < 16:
        raise SolverError("theta_count must be at least 16")
    if not (K > 0):
        raise GeometryError("period translation length K must be positive")
    if not profile.periodic:
        raise GeometryError("Floquet bands need a profile over one period cell")
    thetas = -math.pi / K + (2 * math.pi / K) * np.arange(theta_count) / theta_count

    def solve(th):
        return floquet_eigenvalues(profile, K, th, j_max, n)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            res = list(ex.map(solve, thetas))
    else:
        res = [solve(th) for th in thetas]
    return BandTable(thetas=thetas, bands=np.array([r.mu for r in res]), K=float(K),
                     refine_error=np.array([r.refine_error for r in res]))


def flat_bands(spec: SpectrumResult, K: float, theta_count: int = 64) -> BandTable:
    """Band table of a theta-independent fiber operator (disconnected periodic loops)."""
    thetas = -math.pi / K + (2 * math.pi / K) * np.arange(theta_count) / theta_count
    return BandTable(thetas=thetas, bands=np.tile(spec.mu, (theta_count, 1)), K=float(K),
                     refine_error=np.tile(spec.refine_error, (theta_count, 1)))


# --------------------------------------------------------------------------
# whole line


def infinite_curve_spectrum(profile: CurvatureProfile, j_max: int = 8, n: int = 4095,
                            tol: float = 1e-8, min_decay: float = 1.25) -> SpectrumResult:
    """Negative eigenvalues of the comparison operator on the whole line.

    The problem is truncated to the profile span ``[-R, R]`` with Dirichlet
    ends and re-solved on ``[-2R, 2R]`` at the same grid step; only
    eigenvalues that move by less than ``tol`` count as bound states.
    ``mu`` holds exactly those (so ``len(mu)`` is the number N of discrete
    eigenvalues).
    """
    if profile.periodic:
        raise GeometryError("whole-line spectrum needs a non-periodic profile on [-R, R]")
    beta = decay_exponent(profile)
    if not beta > min_decay:
        raise GeometryError(f"curvature decay exponent {beta:.3g} does not exceed {min_decay}")
    a, b = profile.span
    R = 0.5 * (b - a)
    c = 0.5 * (a + b)
    count = min(j_max, n // 4)
    op = build_operator(profile, "whole-line", n, span=(c - R, c + R))
    wide = build_operator(profile, "whole-line", 2 * n + 1, span=(c - 2 * R, c + 2 * R))
    s1 = eigenvalues(op, count)
    s2 = eigenvalues(wide, count)
    # Dirichlet truncation bounds every eigenvalue from above, so each negative
    # truncated eigenvalue certifies a bound state; all of them must converge
    neg = s1.mu < 0
    moved = np.abs(s2.mu - s1.mu)
    bad = neg & (moved >= tol)
    if np.any(bad) or np.count_nonzero(s2.mu < 0) > np.count_nonzero(neg):
        raise SolverError(f"R-convergence failure: negative eigenvalues {s2.mu[s2.mu < 0]} on [-2R, 2R] "
                          f"moved by {moved[neg | (s2.mu < 0)]} from [-R, R]")
    bound = neg
    if np.any(bound):
        mu1 = float(s1.mu[bound][0])
        edge = 0.25 * float(np.max(profile.kappa_at(np.array([c - R, c + R]))) ** 2)
        if edge >= 1e-3 * abs(mu1):
            raise SolverError(f"truncation radius too small: kappa(+-R)^2/4 = {edge:.3e}")
    idx = np.flatnonzero(bound)
    return SpectrumResult(mu=s1.mu[idx], bc="whole-line", n=n,
                          refine_error=np.maximum(s1.refine_error[idx], moved[idx]), mu_raw=s1.mu_raw[idx])
