"""Command-line front end.

Usage::

    python -m leakywire <command> [--config FILE] [--set key=value ...]

The config is flat ``key = value`` text with ``#`` comments; several
``key=value`` pairs may share one line when values contain no spaces.
Exit codes: 0 ok, 2 config, 3 geometry, 4 regime, 5 solver, 6 io.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import shlex
import sys
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import asymptotics, bracketing, comparison, geometry, transverse
from .errors import ConfigError, GeometryError, LeakyWireError

COMMANDS = ("spectrum", "bands", "counting", "transverse", "verify-bracketing", "semiclassical")
IO_EXIT = 6


def _bool(v: str) -> bool:
    t = v.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {v!r}")


def _int(v: str) -> int:
    try:
        return int(v)
    except ValueError as exc:
        raise ConfigError(f"expected an integer, got {v!r}") from exc


def _float(v: str) -> float:
    try:
        x = float(v)
    except ValueError as exc:
        raise ConfigError(f"expected a number, got {v!r}") from exc
    if not math.isfinite(x):
        raise ConfigError(f"expected a finite number, got {v!r}")
    return x


def _floats(v: str) -> tuple:
    parts = [p for p in v.replace(",", " ").split() if p]
    if not parts:
        raise ConfigError("expected a nonempty list of numbers")
    return tuple(_float(p) for p in parts)


def _vector(v: str) -> tuple:
    vals = _floats(v)
    if len(vals) != 3:
        raise ConfigError(f"expected three components, got {v!r}")
    return vals


@dataclass(frozen=True)
class RunConfig:
    command: str
    curve_builtin: Optional[str] = None
    curve_params: dict = field(default_factory=dict)
    curve_samples: Optional[str] = None
    curve_closed: bool = False
    curve_period_vector: Optional[tuple] = None
    curve_kappa: Optional[str] = None
    curve_mode: str = "loop"
    curve_K: Optional[float] = None
    profile_n: int = 1024
    alphas: tuple = ()
    bc: Optional[str] = None
    n: int = 2048
    theta_count: int = 64
    j_max: int = 5
    d_rule: str = "auto"
    d_value: Optional[float] = None
    transverse_M: Optional[float] = None
    h: float = 1.0
    with_brackets: bool = False
    conjecture: bool = False
    disconnected: bool = False
    output_dir: str = "."
    output_format: str = "csv"
    output_prefix: Optional[str] = None
    threads: int = 1
    gap_tol: float = 1e-8

    @property
    def d_spec(self):
        return "auto" if self.d_rule == "auto" else self.d_value

    @property
    def prefix(self) -> str:
        return self.output_prefix or self.command


_KEYS = {
    "command": ("command", str),
    "curve.builtin": ("curve_builtin", str),
    "curve.samples": ("curve_samples", str),
    "curve.closed": ("curve_closed", _bool),
    "curve.period_vector": ("curve_period_vector", _vector),
    "curve.kappa": ("curve_kappa", str),
    "curve.mode": ("curve_mode", str),
    "curve.K": ("curve_K", _float),
    "grid.profile": ("profile_n", _int),
    "grid.n": ("n", _int),
    "grid.theta_count": ("theta_count", _int),
    "j_max": ("j_max", _int),
    "alpha": ("alphas", _floats),
    "alpha.sweep": ("alphas", _floats),
    "bc": ("bc", str),
    "d.rule": ("d_rule", str),
    "d.value": ("d_value", _float),
    "transverse.M": ("transverse_M", _float),
    "h": ("h", _float),
    "with_brackets": ("with_brackets", _bool),
    "conjecture": ("conjecture", _bool),
    "bands.disconnected": ("disconnected", _bool),
    "output.dir": ("output_dir", str),
    "output.format": ("output_format", str),
    "output.prefix": ("output_prefix", str),
    "threads": ("threads", _int),
    "gap_tol": ("gap_tol", _float),
}


def _pairs(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.count("=") > 1:
            tokens = shlex.split(line)
        else:
            tokens = [line]
        for tok in tokens:
            if "=" not in tok:
                raise ConfigError(f"line {lineno}: expected key = value, got {tok!r}")
            k, v = tok.split("=", 1)
            yield k.strip(), v.strip()


def parse_config(text: str, overrides=(), command: Optional[str] = None) -> RunConfig:
    """Parse and validate a config document; ``overrides`` are ``key=value`` strings."""
    values: dict = {}
    params: dict = {}
    items = list(_pairs(text))
    for o in overrides:
        if "=" not in o:
            raise ConfigError(f"override {o!r} is not key=value")
        k, v = o.split("=", 1)
        items.append((k.strip(), v.strip()))
    for k, v in items:
        if k in _KEYS:
            attr, conv = _KEYS[k]
            values[attr] = conv(v)
        elif k.startswith("curve.") and k.count(".") == 1:
            params[k.split(".", 1)[1]] = v
        else:
            raise ConfigError(f"unknown config key {k!r}")
    if command is not None:
        if "command" in values and values["command"] != command:
            raise ConfigError(f"config command {values['command']!r} conflicts with {command!r}")
        values["command"] = command
    if "command" not in values:
        raise ConfigError("missing command")
    cfg = RunConfig(**values, curve_params={})
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}; choose from {COMMANDS}")

    sources = [s for s in (cfg.curve_builtin, cfg.curve_samples, cfg.curve_kappa) if s is not None]
    if len(sources) > 1:
        raise ConfigError("conflicting curve sources: give exactly one of curve.builtin, curve.samples, curve.kappa")
    if not sources and not (cfg.command == "transverse" and cfg.transverse_M is not None):
        raise ConfigError("missing curve source (curve.builtin, curve.samples or curve.kappa)")
    if params:
        if cfg.curve_builtin is None:
            raise ConfigError(f"unknown config keys {sorted('curve.' + p for p in params)}")
        try:
            known = geometry.builtin_params(cfg.curve_builtin)
        except GeometryError as exc:
            raise ConfigError(str(exc)) from exc
        for p, v in params.items():
            if p not in known:
                raise ConfigError(f"unknown config key 'curve.{p}' for curve {cfg.curve_builtin!r}")
        cfg = replace(cfg, curve_params={p: _float(v) for p, v in params.items()})

    if cfg.command != "bands" and not cfg.alphas:
        raise ConfigError("alpha (or alpha.sweep) must be a nonempty list")
    if cfg.d_rule not in ("auto", "fixed"):
        raise ConfigError(f"d.rule must be 'auto' or 'fixed', got {cfg.d_rule!r}")
    if cfg.d_rule == "fixed":
        if cfg.d_value is None:
            raise ConfigError("d.rule = fixed needs d.value")
        if not cfg.d_value > 0:
            raise ConfigError(f"tube radius must be positive, got d.value = {cfg.d_value:g}")
    if cfg.curve_mode not in geometry.MODES:
        raise ConfigError(f"curve.mode must be one of {geometry.MODES}")
    if cfg.bc is not None and cfg.bc not in comparison.BOUNDARY_CONDITIONS:
        raise ConfigError(f"bc must be one of {comparison.BOUNDARY_CONDITIONS}")
    if cfg.output_format not in ("csv", "json"):
        raise ConfigError("output.format must be csv or json")
    if cfg.n < 64 or cfg.theta_count < 16 or cfg.j_max < 1 or cfg.profile_n < 16 or cfg.threads < 1:
        raise ConfigError("grid sizes out of range (grid.n >= 64, grid.theta_count >= 16, "
                          "j_max >= 1, grid.profile >= 16, threads >= 1)")
    if cfg.command == "semiclassical" and not (0 < cfg.h <= 1):
        raise ConfigError("h must lie in (0, 1]")
    return cfg


# --------------------------------------------------------------------------
# pipeline


def load_curve(cfg: RunConfig):
    """Return ``(profile, curve)``; ``curve`` is None for raw curvature input."""
    if cfg.curve_builtin is not None:
        curve = geometry.builtin_curve(cfg.curve_builtin, cfg.curve_params)
    elif cfg.curve_samples is not None:
        pv = None if cfg.curve_period_vector is None else np.array(cfg.curve_period_vector)
        raw = geometry.read_samples_csv(cfg.curve_samples, closed=cfg.curve_closed, period_vector=pv)
        curve = geometry.reparametrize_arclength(raw)
    elif cfg.curve_kappa is not None:
        pv = None if cfg.curve_period_vector is None else np.array(cfg.curve_period_vector)
        return geometry.read_kappa_csv(cfg.curve_kappa, mode=cfg.curve_mode, period_vector=pv), None
    else:
        return None, None
    return geometry.curvature_profile(curve, cfg.profile_n), curve


def _period_length(cfg: RunConfig, profile) -> float:
    if cfg.curve_K is not None:
        return cfg.curve_K
    if profile.period_vector is not None:
        return float(np.linalg.norm(profile.period_vector))
    raise ConfigError("band computation needs the period translation length (curve.K or a periodic curve)")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _table(header, rows) -> str:
    return ",".join(header) + "\n" + "".join(",".join(_fmt(v) for v in r) + "\n" for r in rows)


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _alpha_tag(a: float) -> str:
    return f"{a:g}"


def _emit(cfg: RunConfig, per_alpha: list, summary_header, summary_rows) -> list:
    """Write one file per alpha (plus a summary for sweeps); returns written paths."""
    out = Path(cfg.output_dir)
    ext = cfg.output_format
    written = []
    if len(per_alpha) == 1:
        a, rep = per_alpha[0]
        p = out / f"{cfg.prefix}.{ext}"
        write_atomic(p, rep.to_csv() if ext == "csv" else rep.to_json())
        written.append(p)
        return written
    for a, rep in per_alpha:
        p = out / f"{cfg.prefix}_alpha={_alpha_tag(a)}.{ext}"
        write_atomic(p, rep.to_csv() if ext == "csv" else rep.to_json())
        written.append(p)
    p = out / f"{cfg.prefix}_summary.csv"
    write_atomic(p, _table(summary_header, summary_rows))
    written.append(p)
    return written


@dataclass(frozen=True)
class _Simple:
    header: tuple
    rows: tuple
    payload: dict

    def to_csv(self) -> str:
        return _table(self.header, self.rows)

    def to_json(self) -> str:
        return asymptotics.to_json_dict(self.payload)


def _run_transverse(cfg: RunConfig, profile):
    per, summ = [], []
    header = ("alpha", "d", "xi_alpha", "zeta_alpha", "g", "k_plus", "t_plus", "offset_plus_sign",
              "log_offset_plus", "M", "w", "k_minus", "t_minus", "offset_minus_sign", "log_offset_minus")
    for a in cfg.alphas:
        cs = transverse.coupling_state(a)
        d = bracketing.resolve_d(cfg.d_spec, a)
        if cfg.transverse_M is not None:
            M = cfg.transverse_M
        else:
            M = bracketing.estimate_constants(profile, d).M_excess
        tp = transverse.solve_dirichlet_root(cs, d)
        tm = transverse.solve_robin_root(cs, d, M)
        row = (a, d, cs.xi_alpha, cs.zeta_alpha, transverse.solvability(cs, d), tp.k_root, tp.energy,
               tp.offset_sign, tp.log_offset, M, tm.w, tm.k_root, tm.energy, tm.offset_sign, tm.log_offset)
        per.append((a, _Simple(header, (row,), dict(zip(header, row)))))
        summ.append(row)
    return per, header, summ


def run(cfg: RunConfig, stdout=None) -> int:
    """Execute a validated config; returns the process exit status (errors raise)."""
    stdout = stdout or sys.stdout
    profile, curve = load_curve(cfg)
    cmd = cfg.command
    if cmd == "bands":
        K = _period_length(cfg, profile)
        if cfg.disconnected:
            table = asymptotics.disconnected_loop_bands(profile, K, cfg.theta_count, cfg.j_max + 1, n=cfg.n)
        else:
            table = comparison.floquet_spectrum(profile, K, cfg.theta_count, cfg.j_max + 1, n=cfg.n,
                                                threads=cfg.threads)
        gaps = asymptotics.gap_widths(table, cfg.gap_tol)
        out = Path(cfg.output_dir)
        if cfg.output_format == "csv":
            write_atomic(out / f"{cfg.prefix}.csv", table.to_csv())
            write_atomic(out / f"{cfg.prefix}_gaps.csv", gaps.to_csv())
        else:
            write_atomic(out / f"{cfg.prefix}_gaps.json", gaps.to_json())
            write_atomic(out / f"{cfg.prefix}.json", asymptotics.to_json_dict(
                {"thetas": table.thetas, "bands": table.bands, "K": table.K}))
        write_atomic(out / f"{cfg.prefix}.dat", table.to_gnuplot())
        print(f"open gaps: {gaps.open_count} of {len(gaps.gaps)}", file=stdout)
        return 0

    if cmd == "transverse":
        per, header, summ = _run_transverse(cfg, profile)
        _emit(cfg, per, header, summ)
        return 0

    per, summ = [], []
    for a in cfg.alphas:
        if cmd == "spectrum":
            rep = asymptotics.eigenvalue_asymptotics(profile, a, bc=cfg.bc, j_max=cfg.j_max,
                                                     with_brackets=cfg.with_brackets, n=cfg.n,
                                                     conjecture=cfg.conjecture, d_rule=cfg.d_spec)
            lam1 = rep.rows[0].lam if rep.rows else None
            summ.append((a, rep.xi_alpha, len(rep.rows), lam1))
            header = ("alpha", "xi_alpha", "rows", "lambda_1")
        elif cmd == "counting":
            rep = asymptotics.counting_function(profile, a)
            summ.append((a, rep.n_formula, rep.n_lower, rep.n_upper))
            header = ("alpha", "n_formula", "n_lower", "n_upper")
        elif cmd == "verify-bracketing":
            rep = bracketing.squeeze_check(profile, a, cfg.j_max, d_rule=cfg.d_spec, bc=cfg.bc, n=cfg.n)
            print(rep.to_text(), file=stdout)
            summ.append((a, rep.d, int(rep.all_pass), float(np.max(rep.widths))))
            header = ("alpha", "d", "all_pass", "max_width")
        else:  # semiclassical
            rep = asymptotics.semiclassical_view(profile, a, cfg.h, bc=cfg.bc, j_max=cfg.j_max, n=cfg.n)
            summ.append((a, rep.h, rep.alpha_of_h, rep.xi_relative_defect, rep.counting))
            header = ("alpha", "h", "alpha_of_h", "xi_relative_defect", "counting")
        per.append((a, rep))
    _emit(cfg, per, header, summ)
    return 0


def _error_record(exc: BaseException, code: int) -> str:
    return json.dumps({"error": type(exc).__name__, "exit_code": code, "message": str(exc)})


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="leakywire", description="Strong-coupling spectra of leaky wires.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="flat key = value config file")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    args = ap.parse_args(argv)
    try:
        text = ""
        if args.config:
            try:
                text = Path(args.config).read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
        cfg = parse_config(text, args.set, command=args.command)
        return run(cfg)
    except LeakyWireError as exc:
        print(_error_record(exc, exc.exit_code), file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(_error_record(exc, IO_EXIT), file=sys.stderr)
        return IO_EXIT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
