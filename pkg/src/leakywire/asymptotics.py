"""Strong-coupling outputs: eigenvalue expansions, counts, band gaps, semiclassics."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import comparison
from .bracketing import resolve_d, squeeze_check
from .comparison import BandTable
from .errors import ConfigError, SolverError
from .geometry import CurvatureProfile
from .transverse import coupling_state

FREE_END_MODES = ("open",)
LOOP_MODES = ("loop",)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else (f"{v:.17g}" if isinstance(v, float) else v) for v in r])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def to_json_dict(payload: dict) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


def to_json(report) -> str:
    return to_json_dict(asdict(report))


# --------------------------------------------------------------------------
# eigenvalue expansion


@dataclass(frozen=True)
class AsymptoticRow:
    j: int
    mu: float
    lam: float
    lower: Optional[float] = None
    upper: Optional[float] = None
    mu_upper: Optional[float] = None   # free-end pair: Dirichlet partner of mu (Neumann)
    lam_upper: Optional[float] = None


@dataclass(frozen=True)
class AsymptoticSpectrum:
    alpha: float
    xi_alpha: float
    d_used: Optional[float]
    bc: str
    kind: str  # expansion | free-end-pair | conjecture | whole-line
    rows: tuple

    def to_csv(self) -> str:
        return _csv(["j", "mu", "lambda", "lower", "upper", "mu_upper", "lambda_upper"],
                    [(r.j, r.mu, r.lam, r.lower, r.upper, r.mu_upper, r.lam_upper) for r in self.rows])

    def to_json(self) -> str:
        return to_json(self)


def eigenvalue_asymptotics(profile: CurvatureProfile, alpha: float, bc: Optional[str] = None,
                           j_max: int = 5, with_brackets: bool = False, n: int = 2048,
                           conjecture: bool = False, d_rule="auto") -> AsymptoticSpectrum:
    """Leading-order eigenvalues ``xi_alpha + mu_j`` below zero.

    Loops use periodic closure.  Curves with free ends get the pair of
    Neumann and Dirichlet values per index; asking for one of them alone is
    refused unless ``conjecture`` is set, in which case the Dirichlet value is
    returned and labeled as such.  Non-periodic whole-line profiles report
    the discrete eigenvalues below ``xi_alpha``.
    """
    cs = coupling_state(alpha)
    xi = cs.xi_alpha
    mode = profile.mode
    if mode == "periodic":
        raise ConfigError("periodic curves have band spectrum; use the bands pipeline")
    if mode == "infinite-truncated" or (mode not in LOOP_MODES + FREE_END_MODES and not profile.periodic):
        spec = comparison.infinite_curve_spectrum(profile, j_max=j_max, n=max(n, 4095))
        rows = tuple(AsymptoticRow(j=j + 1, mu=float(m), lam=float(xi + m)) for j, m in enumerate(spec.mu))
        return AsymptoticSpectrum(alpha=cs.alpha, xi_alpha=xi, d_used=None, bc="whole-line",
                                  kind="whole-line", rows=rows)

    d = resolve_d(d_rule, alpha) if with_brackets else None
    if mode in LOOP_MODES:
        if bc not in (None, "periodic"):
            raise ConfigError(f"closed loops use periodic closure, not {bc!r}")
        spec = comparison.spectrum(profile, "periodic", j_max, n=n)
        rep = squeeze_check(profile, alpha, j_max, d_rule=d_rule, bc="periodic", n=n) if with_brackets else None
        rows = []
        for j, m in enumerate(spec.mu):
            lam = xi + m
            if not lam < 0:
                continue
            lo = up = None
            if rep is not None:
                lo, up = rep.rows[j].lower, rep.rows[j].upper
            rows.append(AsymptoticRow(j=j + 1, mu=float(m), lam=float(lam), lower=lo, upper=up))
        return AsymptoticSpectrum(alpha=cs.alpha, xi_alpha=xi, d_used=d, bc="periodic",
                                  kind="expansion", rows=tuple(rows))

    # free ends
    if bc is not None and bc not in ("dirichlet", "neumann"):
        raise ConfigError(f"free-end curves take dirichlet/neumann closures, not {bc!r}")
    if conjecture:
        spec = comparison.spectrum(profile, "dirichlet", j_max, n=n)
        rows = tuple(AsymptoticRow(j=j + 1, mu=float(m), lam=float(xi + m))
                     for j, m in enumerate(spec.mu) if xi + m < 0)
        return AsymptoticSpectrum(alpha=cs.alpha, xi_alpha=xi, d_used=None, bc="dirichlet",
                                  kind="conjecture", rows=rows)
    if bc is not None:
        raise ConfigError("free-end curves only admit the Dirichlet/Neumann pair; "
                          "a single-closure expansion is available as the labeled conjecture mode")
    neu = comparison.spectrum(profile, "neumann", j_max, n=n)
    dir_ = comparison.spectrum(profile, "dirichlet", j_max, n=n)
    rep_n = rep_d = None
    if with_brackets:
        rep_n = squeeze_check(profile, alpha, j_max, d_rule=d_rule, bc="neumann", n=n)
        rep_d = squeeze_check(profile, alpha, j_max, d_rule=d_rule, bc="dirichlet", n=n)
    rows = []
    for j in range(j_max):
        lam = xi + neu.mu[j]
        if not lam < 0:
            continue
        rows.append(AsymptoticRow(j=j + 1, mu=float(neu.mu[j]), lam=float(lam),
                                  lower=None if rep_n is None else rep_n.rows[j].lower,
                                  upper=None if rep_d is None else rep_d.rows[j].upper,
                                  mu_upper=float(dir_.mu[j]), lam_upper=float(xi + dir_.mu[j])))
    return AsymptoticSpectrum(alpha=cs.alpha, xi_alpha=xi, d_used=d, bc="neumann/dirichlet",
                              kind="free-end-pair", rows=tuple(rows))


# --------------------------------------------------------------------------
# counting


@dataclass(frozen=True)
class CountingEstimate:
    alpha: float
    L: float
    n_formula: float
    n_lower: int
    n_upper: int
    v: float
    free_end: bool

    @property
    def spread(self) -> float:
        """Largest relative deviation of the explicit counts from ``n_formula``."""
        return max(abs(self.n_lower / self.n_formula - 1.0), abs(self.n_upper / self.n_formula - 1.0))

    def to_csv(self) -> str:
        return _csv(["alpha", "L", "n_formula", "n_lower", "n_upper", "v"],
                    [(self.alpha, self.L, self.n_formula, self.n_lower, self.n_upper, self.v)])

    def to_json(self) -> str:
        return to_json(self)


def _count_below(bound: float, coeff: float) -> int:
    """Number of integers m >= 0 with coeff * m^2 < bound."""
    if bound <= 0:
        return 0
    m = int(math.isqrt(int(bound / coeff))) if bound / coeff < 2**62 else int(math.sqrt(bound / coeff))
    while coeff * (m + 1) ** 2 < bound:
        m += 1
    while m >= 0 and coeff * m**2 >= bound:
        m -= 1
    return m + 1


def counting_function(profile: CurvatureProfile, alpha: float) -> CountingEstimate:
    """``(L/pi) sqrt(-xi_alpha)`` with the explicit counts of negative ``nu_j^+`` and ``nu_j^-``.

    The index-independent error in ``nu_j^(+-)`` beyond ``+- v`` is dropped, so
    the counts are those of ``xi + c j^2 +- v`` exactly.
    """
    if profile.mode not in LOOP_MODES + FREE_END_MODES:
        raise ConfigError("the counting function needs a finite curve (loop or open)")
    cs = coupling_state(alpha)
    L = profile.length
    v = 0.25 * profile.kappa_sup**2
    X = -cs.xi_alpha
    if profile.mode in LOOP_MODES:
        c = (2 * math.pi / L) ** 2
        # j over all integers: 2 * #{m >= 1} + 1
        n_lo = max(0, 2 * _count_below(X - v, c) - 1)
        n_up = max(0, 2 * _count_below(X + v, c) - 1)
        free = False
    else:
        c = (math.pi / L) ** 2
        n_lo = max(0, _count_below(X - v, c) - 1)   # j >= 1 with c j^2 < X - v
        n_up = _count_below(X + v, c)               # j - 1 >= 0 with c (j-1)^2 < X + v
        free = True
    return CountingEstimate(alpha=cs.alpha, L=L, n_formula=L / math.pi * cs.zeta_alpha,
                            n_lower=n_lo, n_upper=n_up, v=v, free_end=free)


# --------------------------------------------------------------------------
# gaps


@dataclass(frozen=True)
class GapReport:
    gaps: np.ndarray
    open: np.ndarray
    edge_theta: np.ndarray
    gap_tol: float

    @property
    def open_count(self) -> int:
        return int(np.count_nonzero(self.open))

    def to_csv(self) -> str:
        return _csv(["j", "theta_edge", "gap", "open"],
                    [(j + 1, float(t), float(g), int(o))
                     for j, (t, g, o) in enumerate(zip(self.edge_theta, self.gaps, self.open))])

    def to_json(self) -> str:
        return to_json(self)


def gap_widths(bands: BandTable, gap_tol: float = 1e-8) -> GapReport:
    """``G_j = mu_{j+1} - mu_j`` at the zone edge for odd j and at theta = 0 for even j.

    The zone-edge fiber ``theta = pi/K`` is represented by the grid point
    ``-pi/K`` (same quasi-periodicity phase ``-1``).
    """
    edge = bands.theta_index(math.pi / bands.K)
    centre = bands.theta_index(0.0)
    if edge is None or centre is None:
        raise SolverError("band table lacks samples at theta = 0 or at the zone edge")
    j_max = bands.bands.shape[1]
    gaps, thetas = [], []
    for j in range(1, j_max):
        k = edge if j % 2 == 1 else centre
        gaps.append(bands.bands[k, j] - bands.bands[k, j - 1])
        thetas.append(bands.thetas[k])
    gaps = np.array(gaps)
    return GapReport(gaps=gaps, open=gaps > gap_tol, edge_theta=np.array(thetas), gap_tol=gap_tol)


def disconnected_loop_bands(loop: CurvatureProfile, K: float, theta_count: int = 64, j_max: int = 6,
                            n: int = 2048) -> BandTable:
    """Band table of a chain of disjoint identical loops: every fiber sees the loop spectrum."""
    return comparison.flat_bands(comparison.spectrum(loop, "periodic", j_max, n=n), K, theta_count)


# --------------------------------------------------------------------------
# semiclassical


@dataclass(frozen=True)
class SemiclassicalRow:
    j: int
    mu: float
    expansion: float      # xi_alpha + mu_j h^2
    rescaled: float       # h^2 (xi_{alpha(h)} + mu_j)
    difference: float


@dataclass(frozen=True)
class SemiclassicalView:
    alpha: float
    h: float
    alpha_of_h: float
    xi_alpha: float
    xi_scaled: float      # h^2 xi_{alpha(h)}
    xi_relative_defect: float
    counting: float
    rows: tuple

    def to_csv(self) -> str:
        return _csv(["j", "mu", "expansion", "rescaled", "difference"],
                    [(r.j, r.mu, r.expansion, r.rescaled, r.difference) for r in self.rows])

    def to_json(self) -> str:
        return to_json(self)


def semiclassical_view(profile: CurvatureProfile, alpha: float, h: float, bc: Optional[str] = None,
                       j_max: int = 5, n: int = 2048) -> SemiclassicalView:
    """Rows for the operator with kinetic term scaled by ``h^2``.

    The log shift ``alpha(h) = alpha + ln(h)/(2 pi)`` makes
    ``h^2 xi_{alpha(h)} = xi_alpha`` an identity, so both row forms share the
    same transverse part.
    """
    h = float(h)
    if not (0.0 < h <= 1.0):
        raise ConfigError(f"semiclassical parameter h must lie in (0, 1], got {h!r}")
    cs = coupling_state(alpha)
    a_h = cs.alpha + math.log(h) / (2 * math.pi)
    cs_h = coupling_state(a_h)
    if bc is None:
        bc = "periodic" if profile.periodic else "dirichlet"
    spec = comparison.spectrum(profile, bc, j_max, n=n)
    h2 = h * h
    xi_s = h2 * cs_h.xi_alpha
    rows = tuple(SemiclassicalRow(j=j + 1, mu=float(m), expansion=cs.xi_alpha + m * h2,
                                  rescaled=h2 * (cs_h.xi_alpha + m),
                                  difference=h2 * (cs_h.xi_alpha + m) - (cs.xi_alpha + m * h2))
                 for j, m in enumerate(spec.mu))
    return SemiclassicalView(alpha=cs.alpha, h=h, alpha_of_h=a_h, xi_alpha=cs.xi_alpha, xi_scaled=xi_s,
                             xi_relative_defect=abs(xi_s - cs.xi_alpha) / abs(cs.xi_alpha),
                             counting=profile.length / (math.pi * h) * cs.zeta_alpha, rows=rows)
