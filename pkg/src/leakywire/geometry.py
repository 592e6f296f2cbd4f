"""Curves, arc-length reparametrization, curvature, and tube admissibility.

Every curve is held as a parametric backend ``gamma(t)`` (analytic for the
built-in families, a cubic spline for sampled data) together with a table of
the arc-length map ``s(t)``.  Evaluation at arc length inverts that map by
Newton steps, so unit speed holds to quadrature accuracy rather than to
interpolation accuracy.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

from .errors import GeometryError

MODES = ("loop", "open", "periodic", "infinite-truncated")

_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


# --------------------------------------------------------------------------
# parametric backends


class _Backend:
    """gamma(t) and its derivatives on a base interval [t0, t1].

    ``wrap`` is ``None`` (no extension), ``"loop"`` (gamma is T-periodic) or
    ``"periodic"`` (gamma(t + T) = gamma(t) + K).
    """

    def __init__(self, func: Callable[[np.ndarray, int], np.ndarray], t0: float, t1: float,
                 wrap: Optional[str] = None, K: Optional[np.ndarray] = None, max_order: int = 3):
        self.func = func
        self.t0 = float(t0)
        self.t1 = float(t1)
        self.wrap = wrap
        self.K = None if K is None else np.asarray(K, dtype=float)
        self.max_order = max_order

    @property
    def T(self) -> float:
        return self.t1 - self.t0

    def __call__(self, t, nu: int = 0) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.wrap is None:
            return self.func(t, nu)
        shift = np.floor((t - self.t0) / self.T)
        tt = t - shift * self.T
        out = self.func(tt, nu)
        if self.wrap == "periodic" and nu == 0:
            out = out + shift[..., None] * self.K
        return out


def _spline_backend(t: np.ndarray, pts: np.ndarray, wrap: Optional[str], K=None) -> _Backend:
    if wrap == "loop":
        cs = CubicSpline(t, pts, bc_type="periodic", axis=0)
    elif wrap == "periodic":
        # periodic spline of the deviation from the linear drift t*K/T
        T = t[-1] - t[0]
        drift = np.outer((t - t[0]) / T, K)
        cs = CubicSpline(t, pts - drift, bc_type="periodic", axis=0)
        K = np.asarray(K, dtype=float)

        def f(tt, nu):
            base = cs(tt, nu)
            if nu == 0:
                return base + np.multiply.outer((tt - t[0]) / T, K)
            if nu == 1:
                return base + K / T
            return base

        return _Backend(f, t[0], t[-1], wrap="periodic", K=K)
    else:
        cs = CubicSpline(t, pts, bc_type="natural", axis=0)
    return _Backend(lambda tt, nu: cs(tt, nu), t[0], t[-1], wrap=wrap)


# --------------------------------------------------------------------------
# arc-length curve


@dataclass(frozen=True)
class CurveSamples:
    points: np.ndarray
    closed: bool = False
    period_vector: Optional[np.ndarray] = None
    period_length: Optional[float] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise GeometryError("points must be an (n, 3) array")
        if len(pts) < 8:
            raise GeometryError("at least 8 sample points are required")
        object.__setattr__(self, "points", pts)
        if self.period_vector is not None:
            object.__setattr__(self, "period_vector", np.asarray(self.period_vector, dtype=float))


@dataclass(frozen=True, eq=False)
class ArcLengthCurve:
    """Unit-speed curve on [s0, s0 + L] with its sampling knots."""

    knots: np.ndarray
    positions: np.ndarray
    L: float
    mode: str
    backend: _Backend = field(repr=False)
    period_vector: Optional[np.ndarray] = None
    truncation_radius: Optional[float] = None
    name: str = "samples"
    _table_t: np.ndarray = field(repr=False, default=None)
    _table_s: np.ndarray = field(repr=False, default=None)

    @property
    def s0(self) -> float:
        return float(self.knots[0])

    @property
    def s1(self) -> float:
        return self.s0 + self.L

    # arc-length map -------------------------------------------------------

    def _speed(self, t):
        return np.linalg.norm(self.backend(t, 1), axis=-1)

    def _arc_from_table(self, t: np.ndarray) -> np.ndarray:
        """s(t) for t in the base interval via the cumulative table plus one GL panel."""
        tt, ss = self._table_t, self._table_s
        k = np.clip(np.searchsorted(tt, t, side="right") - 1, 0, len(tt) - 2)
        a = tt[k]
        half = 0.5 * (t - a)
        nodes = a[:, None] + half[:, None] * (_GL_X[None, :] + 1.0)
        sp = self._speed(nodes.ravel()).reshape(nodes.shape)
        return ss[k] + half * (sp @ _GL_W)

    def t_of_s(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        b = self.backend
        if b.wrap is not None:
            shift = np.floor((s - self.s0) / self.L)
            sb = s - shift * self.L
        else:
            shift = np.zeros_like(s)
            sb = s
        t = np.interp(sb, self._table_s, self._table_t)
        for _ in range(6):
            err = self._arc_from_table(t) - sb
            t = t - err / self._speed(t)
            if np.max(np.abs(err)) < 1e-15 * max(1.0, self.L):
                break
        return t + shift * b.T

    def position(self, s) -> np.ndarray:
        return self.backend(self.t_of_s(s), 0)

    def frame_derivatives(self, s):
        """(gamma_t, gamma_tt, gamma_ttt) at the parameters matching arc length s."""
        t = self.t_of_s(s)
        b = self.backend
        return b(t, 1), b(t, 2), b(t, 3)

    def curvature(self, s) -> np.ndarray:
        d1, d2, _ = self.frame_derivatives(s)
        cr = np.cross(d1, d2)
        return np.linalg.norm(cr, axis=-1) / np.linalg.norm(d1, axis=-1) ** 3

    def torsion(self, s) -> np.ndarray:
        d1, d2, d3 = self.frame_derivatives(s)
        cr = np.cross(d1, d2)
        n2 = np.sum(cr * cr, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.einsum("ij,ij->i", cr, d3) / n2

    def speed_deviation(self, s=None) -> float:
        """max | |d gamma/ds| - 1 | by a five-point difference of ``position``."""
        if s is None:
            s = self.knots[1:-1]
        s = np.asarray(s, dtype=float)
        ksup = float(np.max(self.curvature(s))) if len(s) else 1.0
        h = 1e-3 / max(1.0, ksup)
        p = [self.position(s + k * h) for k in (-2, -1, 1, 2)]
        v = (p[0] - 8 * p[1] + 8 * p[2] - p[3]) / (12 * h)
        return float(np.max(np.abs(np.linalg.norm(v, axis=-1) - 1.0)))


def _build_table(backend: _Backend, n_panels: int) -> tuple[np.ndarray, np.ndarray]:
    tt = np.linspace(backend.t0, backend.t1, n_panels + 1)
    a, b = tt[:-1], tt[1:]
    half = 0.5 * (b - a)
    nodes = a[:, None] + half[:, None] * (_GL_X[None, :] + 1.0)
    sp = np.linalg.norm(backend(nodes.ravel(), 1), axis=-1).reshape(nodes.shape)
    seg = half * (sp @ _GL_W)
    return tt, np.concatenate([[0.0], np.cumsum(seg)])


def _make_curve(backend: _Backend, mode: str, knots_t: np.ndarray, *, s0: float = 0.0,
                name: str, n_panels: int = 4096, K=None, R=None) -> ArcLengthCurve:
    tt, ss = _build_table(backend, n_panels)
    L = float(ss[-1])
    knots = s0 + np.interp(knots_t, tt, ss)
    curve = ArcLengthCurve(knots=knots, positions=backend(knots_t, 0), L=L, mode=mode,
                           backend=backend, period_vector=None if K is None else np.asarray(K, float),
                           truncation_radius=R, name=name, _table_t=tt, _table_s=ss + s0)
    # refine knot arc lengths to full precision
    exact = curve._arc_from_table(np.asarray(knots_t, dtype=float))
    object.__setattr__(curve, "knots", exact)
    return curve


def _validate(curve: ArcLengthCurve, tol: float = 1e-8) -> ArcLengthCurve:
    dev = curve.speed_deviation()
    if dev > tol:
        raise GeometryError(f"arc-length reparametrization failed: speed deviates from 1 by {dev:.3e}")
    if curve.mode == "loop":
        gap = np.linalg.norm(curve.position(curve.s0) - curve.position(curve.s1))
        if gap > 1e-8 * max(1.0, curve.L):
            raise GeometryError("loop does not close")
    if curve.mode == "periodic":
        s = np.linspace(curve.s0, curve.s1, 7)
        gap = np.max(np.abs(curve.position(s + curve.L) - curve.position(s) - curve.period_vector))
        if gap > 1e-8 * max(1.0, curve.L):
            raise GeometryError("periodic curve violates gamma(s+L) = K + gamma(s)")
    return curve


# --------------------------------------------------------------------------
# built-in catalog


def _circle(radius: float):
    def f(t, nu):
        c, s = np.cos(t), np.sin(t)
        z = np.zeros_like(t)
        rows = [(c, s), (-s, c), (-c, -s), (s, -c)][nu % 4]
        return radius * np.stack([rows[0], rows[1], z], axis=-1)

    return f


def _ellipse(a: float, b: float):
    def f(t, nu):
        c, s = np.cos(t), np.sin(t)
        z = np.zeros_like(t)
        rows = [(c, s), (-s, c), (-c, -s), (s, -c)][nu % 4]
        return np.stack([a * rows[0], b * rows[1], z], axis=-1)

    return f


def _helix(a: float, b: float):
    def f(t, nu):
        c, s = np.cos(t), np.sin(t)
        rows = [(c, s), (-s, c), (-c, -s), (s, -c)][nu % 4]
        zc = b * t if nu == 0 else (np.full_like(t, b) if nu == 1 else np.zeros_like(t))
        return np.stack([a * rows[0], a * rows[1], zc], axis=-1)

    return f


def _catenary(c: float):
    """Arc-length parametrized catenary; curvature c / (c^2 + s^2)."""

    def f(s, nu):
        u = s / c
        q = np.sqrt(1.0 + u * u)
        z = np.zeros_like(s)
        if nu == 0:
            return np.stack([c * np.arcsinh(u), c * (q - 1.0), z], axis=-1)
        if nu == 1:
            return np.stack([1.0 / q, u / q, z], axis=-1)
        if nu == 2:
            return np.stack([-u / q**3, 1.0 / q**3, z], axis=-1) / c
        return np.stack([(2 * u * u - 1) / q**5, -3 * u / q**5, z], axis=-1) / c**2

    return f


def _sine_line(amplitude: float, wavelength: float):
    k = 2 * math.pi / wavelength

    def f(t, nu):
        z = np.zeros_like(t)
        if nu == 0:
            return np.stack([t, amplitude * np.sin(k * t), z], axis=-1)
        x = np.ones_like(t) if nu == 1 else z
        y = amplitude * k**nu * [np.sin, np.cos, lambda v: -np.sin(v), lambda v: -np.cos(v)][nu % 4](k * t)
        return np.stack([x, y, z], axis=-1)

    return f


_CATALOG = {
    "circle": {"radius": 1.0},
    "planar-ellipse": {"a": 2.0, "b": 1.0},
    "helix": {"a": 1.0, "b": 1.0},
    "bent-line": {"scale": 1.0, "R": 40.0},
    "sine-perturbed-line": {"amplitude": 0.2, "wavelength": 2 * math.pi},
}


def builtin_params(name: str) -> dict:
    if name not in _CATALOG:
        raise GeometryError(f"unknown built-in curve {name!r}; choose from {sorted(_CATALOG)}")
    return dict(_CATALOG[name])


def builtin_curve(name: str, params: Optional[dict] = None, n_knots: int = 512) -> ArcLengthCurve:
    """Construct a catalog curve parametrized by arc length.

    ``circle(radius)`` and ``planar-ellipse(a, b)`` are loops, ``helix(a, b)``
    (radius ``a``, pitch parameter ``b``) and
    ``sine-perturbed-line(amplitude, wavelength)`` are periodic, and
    ``bent-line(scale, R)`` is the catenary with curvature
    ``scale / (scale**2 + s**2)`` truncated to ``[-R, R]``.
    """
    p = builtin_params(name)
    for key, val in (params or {}).items():
        if key not in p:
            raise GeometryError(f"unknown parameter {key!r} for curve {name!r}")
        p[key] = float(val)
    for key, val in p.items():
        if not (val > 0) or not math.isfinite(val):
            if not (name == "sine-perturbed-line" and key == "amplitude" and val == 0):
                raise GeometryError(f"{name}: parameter {key} must be positive, got {val}")

    if name == "circle":
        be = _Backend(_circle(p["radius"]), 0.0, 2 * math.pi, wrap="loop")
        mode, K, R = "loop", None, None
    elif name == "planar-ellipse":
        be = _Backend(_ellipse(p["a"], p["b"]), 0.0, 2 * math.pi, wrap="loop")
        mode, K, R = "loop", None, None
    elif name == "helix":
        K = np.array([0.0, 0.0, 2 * math.pi * p["b"]])
        be = _Backend(_helix(p["a"], p["b"]), 0.0, 2 * math.pi, wrap="periodic", K=K)
        mode, R = "periodic", None
    elif name == "sine-perturbed-line":
        K = np.array([p["wavelength"], 0.0, 0.0])
        be = _Backend(_sine_line(p["amplitude"], p["wavelength"]), 0.0, p["wavelength"],
                      wrap="periodic", K=K)
        mode, R = "periodic", None
    else:
        R = p["R"]
        be = _Backend(_catenary(p["scale"]), -R, R, wrap=None)
        mode, K = "infinite-truncated", None
    knots_t = np.linspace(be.t0, be.t1, n_knots + 1)
    s0 = -R if mode == "infinite-truncated" else 0.0
    curve = _make_curve(be, mode, knots_t, s0=s0, name=name, K=K, R=R)
    return _validate(curve)


# --------------------------------------------------------------------------
# sampled curves


def reparametrize_arclength(raw: CurveSamples) -> ArcLengthCurve:
    """Cubic-spline interpolation of samples, reparametrized by arc length.

    Splines are periodic for closed or translation-periodic samples and
    natural otherwise.  The returned knots are the arc-length positions of
    the input samples.
    """
    pts = raw.points
    scale = float(np.max(np.ptp(pts, axis=0))) or 1.0
    ends_equal = np.linalg.norm(pts[0] - pts[-1]) <= 1e-12 * scale
    if raw.closed and raw.period_vector is not None:
        raise GeometryError("a curve cannot be both closed and translation-periodic")
    if not raw.closed and raw.period_vector is None and ends_equal:
        raise GeometryError("closed flag inconsistent with endpoints: first and last points coincide")
    if raw.closed and ends_equal:
        pts = pts[:-1]
    if raw.period_vector is not None and np.linalg.norm(pts[-1] - pts[0] - raw.period_vector) <= 1e-12 * scale:
        pts = pts[:-1]

    if raw.closed:
        ext = np.vstack([pts, pts[:1]])
    elif raw.period_vector is not None:
        ext = np.vstack([pts, pts[:1] + raw.period_vector])
    else:
        ext = pts
    chords = np.linalg.norm(np.diff(ext, axis=0), axis=1)
    if np.min(chords) <= 1e-9 * scale:
        raise GeometryError("degenerate samples: repeated consecutive points")
    if raw.closed and chords[-1] > 10.0 * np.max(chords[:-1]):
        raise GeometryError("closed flag inconsistent with endpoints: closing chord is far longer "
                            "than the sample spacing")
    t = np.concatenate([[0.0], np.cumsum(chords)])

    if raw.closed:
        wrap, mode = "loop", "loop"
    elif raw.period_vector is not None:
        wrap, mode = "periodic", "periodic"
    else:
        wrap, mode = None, "open"
    be = _spline_backend(t, ext, wrap, raw.period_vector)
    # panels aligned with spline knots keep the GL rule exact-ish per cubic piece
    tt = np.repeat(t[:-1], 8) + np.tile(np.arange(8) / 8.0, len(t) - 1) * np.repeat(np.diff(t), 8)
    tt = np.append(tt, t[-1])
    a, b = tt[:-1], tt[1:]
    half = 0.5 * (b - a)
    nodes = a[:, None] + half[:, None] * (_GL_X[None, :] + 1.0)
    sp = np.linalg.norm(be(nodes.ravel(), 1), axis=-1).reshape(nodes.shape)
    ss = np.concatenate([[0.0], np.cumsum(half * (sp @ _GL_W))])
    curve = ArcLengthCurve(knots=ss[::8].copy(), positions=ext.copy(), L=float(ss[-1]), mode=mode,
                           backend=be, period_vector=raw.period_vector, name="samples",
                           _table_t=tt, _table_s=ss)
    return _validate(curve)


def read_samples_csv(path, closed: bool = False, period_vector=None) -> CurveSamples:
    """Read ``s_or_index,x,y,z`` rows (first column ignored)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = [h.strip() for h in rows[0]]
    if header[1:4] != ["x", "y", "z"]:
        raise GeometryError(f"{path}: expected header s_or_index,x,y,z, got {rows[0]}")
    pts = np.array([[float(v) for v in r[1:4]] for r in rows[1:] if r], dtype=float)
    return CurveSamples(pts, closed=closed, period_vector=period_vector)


# --------------------------------------------------------------------------
# curvature


@dataclass(frozen=True, eq=False)
class CurvatureProfile:
    """kappa(s) on a uniform grid over ``span``.

    ``periodic`` profiles use a grid of ``n`` points on ``[a, b)``; others
    include both endpoints.  ``func``, when present, evaluates kappa exactly
    anywhere (used for resampling and for extending whole-line problems).
    """

    grid: np.ndarray
    kappa: np.ndarray
    kappa_sup: float
    span: tuple
    periodic: bool
    mode: str
    source: str = "analytic"
    torsion: Optional[np.ndarray] = None
    func: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    torsion_func: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    period_vector: Optional[np.ndarray] = None

    def __post_init__(self):
        k = np.asarray(self.kappa, dtype=float)
        if not np.all(np.isfinite(k)) or np.any(k < 0):
            raise GeometryError("curvature values must be finite and nonnegative")
        if abs(self.kappa_sup - float(np.max(k))) > 1e-12 * max(1.0, float(np.max(k))):
            raise GeometryError("kappa_sup must equal max(kappa)")

    @property
    def length(self) -> float:
        return float(self.span[1] - self.span[0])

    def kappa_at(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self.func is not None:
            return np.abs(np.asarray(self.func(s), dtype=float))
        a, b = self.span
        if self.periodic:
            g = np.append(self.grid, b)
            k = np.append(self.kappa, self.kappa[0])
            cs = CubicSpline(g, k, bc_type="periodic")
            return np.abs(cs(a + np.mod(s - a, b - a)))
        cs = CubicSpline(self.grid, self.kappa, bc_type="natural")
        inside = (s >= a) & (s <= b)
        return np.where(inside, np.abs(cs(np.clip(s, a, b))), 0.0)

    def torsion_at(self, s) -> Optional[np.ndarray]:
        if self.torsion_func is not None:
            return np.asarray(self.torsion_func(np.asarray(s, dtype=float)), dtype=float)
        if self.torsion is None:
            return None
        if self.periodic:
            a, b = self.span
            g = np.append(self.grid, b)
            t = np.append(self.torsion, self.torsion[0])
            return CubicSpline(g, t, bc_type="periodic")(a + np.mod(np.asarray(s) - a, b - a))
        return CubicSpline(self.grid, self.torsion, bc_type="natural")(s)


def _uniform_grid(span, n, periodic):
    a, b = span
    if periodic:
        return a + (b - a) * np.arange(n) / n
    return np.linspace(a, b, n)


def profile_from_function(func, span, n: int = 1024, *, periodic: bool, mode: Optional[str] = None,
                          period_vector=None, torsion_func=None) -> CurvatureProfile:
    """Tabulate an analytic curvature function."""
    grid = _uniform_grid(span, n, periodic)
    k = np.abs(np.asarray(func(grid), dtype=float)) * np.ones_like(grid)
    tor = None if torsion_func is None else np.asarray(torsion_func(grid), dtype=float) * np.ones_like(grid)
    if mode is None:
        mode = "loop" if periodic else "open"
    return CurvatureProfile(grid=grid, kappa=k, kappa_sup=float(np.max(k)), span=tuple(map(float, span)),
                            periodic=periodic, mode=mode, source="analytic", torsion=tor,
                            func=lambda s: np.asarray(func(s), dtype=float) * np.ones_like(s),
                            torsion_func=None if torsion_func is None else
                            (lambda s: np.asarray(torsion_func(s), dtype=float) * np.ones_like(s)),
                            period_vector=period_vector)


def constant_profile(kappa: float, L: float, n: int = 1024, mode: str = "loop") -> CurvatureProfile:
    periodic = mode in ("loop", "periodic")
    span = (-L / 2, L / 2) if mode == "infinite-truncated" else (0.0, L)
    return profile_from_function(lambda s: np.full_like(np.asarray(s, float), kappa), span, n,
                                 periodic=periodic, mode=mode)


def read_kappa_csv(path, mode: str = "loop", period_vector=None) -> CurvatureProfile:
    """Read an ``s,kappa`` table sampled on a uniform grid."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if [h.strip() for h in rows[0][:2]] != ["s", "kappa"]:
        raise GeometryError(f"{path}: expected header s,kappa, got {rows[0]}")
    data = np.array([[float(v) for v in r[:2]] for r in rows[1:] if r], dtype=float)
    s, k = data[:, 0], data[:, 1]
    if len(s) < 16:
        raise GeometryError("curvature profile needs at least 16 samples")
    ds = np.diff(s)
    if np.any(ds <= 0) or np.ptp(ds) > 1e-6 * np.mean(ds):
        raise GeometryError("curvature profile must be sampled on a uniform increasing grid")
    if mode not in MODES:
        raise GeometryError(f"unknown curve mode {mode!r}")
    periodic = mode in ("loop", "periodic")
    span = (s[0], s[-1] + ds.mean()) if periodic else (s[0], s[-1])
    if np.any(k < 0) or not np.all(np.isfinite(k)):
        raise GeometryError("curvature values must be finite and nonnegative")
    return CurvatureProfile(grid=s, kappa=k, kappa_sup=float(np.max(k)), span=span, periodic=periodic,
                            mode=mode, source="analytic", period_vector=period_vector)


def curvature_profile(curve: ArcLengthCurve, grid_size: int = 1024) -> CurvatureProfile:
    """kappa(s) = |gamma''(s)| on a uniform grid of ``grid_size`` points.

    Raises ``GeometryError`` when linear interpolation of the grid misses
    the values at the midpoints by more than 5% of ``kappa_sup`` (the grid
    does not resolve the curvature variation).
    """
    if grid_size < 16:
        raise GeometryError("grid_size must be at least 16")
    periodic = curve.mode in ("loop", "periodic")
    span = (curve.s0, curve.s1)
    grid = _uniform_grid(span, grid_size, periodic)
    kappa = curve.curvature(grid)
    fine = _uniform_grid(span, 2 * grid_size, periodic)
    kfine = curve.curvature(fine)
    mids = kfine[1::2]
    if periodic:
        approx = 0.5 * (kappa + np.roll(kappa, -1))
    else:
        approx = 0.5 * (kappa[:-1] + kappa[1:])
        mids = curve.curvature(0.5 * (grid[:-1] + grid[1:]))
    ksup = max(float(np.max(kappa)), 1e-300)
    if np.max(np.abs(approx - mids)) > 0.05 * ksup:
        raise GeometryError(f"grid of {grid_size} points is too coarse for the curvature variation")

    torsion = None
    tfunc = None
    if float(np.min(kappa)) > 1e-8:
        torsion = curve.torsion(grid)
        tfunc = curve.torsion
    return CurvatureProfile(grid=grid, kappa=kappa, kappa_sup=float(np.max(kappa)), span=span,
                            periodic=periodic, mode=curve.mode, source="from-curve", torsion=torsion,
                            func=curve.curvature, torsion_func=tfunc, period_vector=curve.period_vector)


def decay_exponent(profile: CurvatureProfile, tail_fraction: float = 0.5) -> float:
    """Fitted beta in kappa ~ |s|^(-beta) over the outer part of the span.

    Returns ``inf`` when the tail is identically zero.
    """
    a, b = profile.span
    R = max(abs(a), abs(b))
    s = np.linspace(tail_fraction * R, R, 64)
    k = 0.5 * (profile.kappa_at(s) + profile.kappa_at(-s))
    good = k > 1e-300
    if np.count_nonzero(good) < 4:
        return math.inf
    slope = np.polyfit(np.log(s[good]), np.log(k[good]), 1)[0]
    return float(-slope)


# --------------------------------------------------------------------------
# tube admissibility


@dataclass(frozen=True)
class EmbeddingReport:
    d: float
    self_intersection_free: bool
    local_diffeo_ok: bool
    min_tube_clearance: float
    chord_constant: float
    kappa_sup: float


def check_tube_embedding(curve: ArcLengthCurve, d: float, n_samples: Optional[int] = None) -> EmbeddingReport:
    """Sampled test of the tube conditions for radius ``d``.

    Points whose arc separation exceeds ``4 d`` must be farther apart than
    ``2 d``.  For periodic curves the neighbouring period cells are included.
    """
    if not (d > 0):
        raise GeometryError("tube radius must be positive")
    L = curve.L
    if n_samples is None:
        n_samples = int(min(20000, max(512, math.ceil(8 * L / d))))
    s = np.linspace(curve.s0, curve.s1, n_samples, endpoint=curve.mode not in ("loop", "periodic"))
    pts = curve.position(s)
    ksup = float(np.max(curve.curvature(s)))
    guard = 4.0 * d

    if curve.mode == "periodic":
        K = curve.period_vector
        all_s = np.concatenate([s - L, s, s + L])
        all_p = np.vstack([pts - K, pts, pts + K])
    else:
        all_s, all_p = s, pts

    def arcsep(i, j):
        ds = np.abs(all_s[i] - all_s[j])
        if curve.mode == "loop":
            ds = np.minimum(ds, L - ds)
        return ds

    tree = cKDTree(all_p)
    pairs = tree.query_pairs(r=2.0 * d, output_type="ndarray")
    clash = False
    if len(pairs):
        clash = bool(np.any(arcsep(pairs[:, 0], pairs[:, 1]) > guard))

    # clearance and chord constant by brute force on a subsample
    sub = np.linspace(0, len(all_p) - 1, min(len(all_p), 2000)).astype(int)
    dp = np.linalg.norm(all_p[sub][:, None, :] - all_p[sub][None, :, :], axis=-1)
    dsm = arcsep(sub[:, None], sub[None, :])
    far = dsm > guard
    clearance = float(np.min(dp[far])) if np.any(far) else math.inf
    pos = dsm > 0
    chord = min(float(np.min(dp[pos] / dsm[pos])), 1.0) if np.any(pos) else 1.0

    return EmbeddingReport(d=float(d), self_intersection_free=not clash, local_diffeo_ok=d * ksup < 1.0,
                           min_tube_clearance=clearance, chord_constant=chord, kappa_sup=ksup)
