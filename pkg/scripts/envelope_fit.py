"""Fit the exponential closing of the transverse squeeze.

For d = factor * exp(pi alpha) the offsets |t - xi| of the Dirichlet and
Robin disc problems are fitted to c1 zeta^2 sqrt(d zeta) exp(-c2 d zeta).
"""
import argparse
import math
from dataclasses import dataclass

from leakywire import (builtin_curve, coupling_state, curvature_profile, estimate_constants,
                       fit_envelope, solve_dirichlet_root, solve_robin_root)


@dataclass
class EnvelopeConfig:
    alphas: tuple = (-1.0, -1.5, -2.0, -2.5, -3.0)
    factor: float = 1.0
    curve: str = "circle"


def run(cfg: EnvelopeConfig):
    profile = curvature_profile(builtin_curve(cfg.curve), 512)
    plus, minus = [], []
    for a in cfg.alphas:
        cs = coupling_state(a)
        d = cfg.factor * math.exp(math.pi * a)
        M = estimate_constants(profile, d).M_excess
        tp, tm = solve_dirichlet_root(cs, d), solve_robin_root(cs, d, M)
        plus.append(tp)
        minus.append(tm)
        print(f"alpha {a:+.2f}  d zeta {d * cs.zeta_alpha:.4f}  log|t+ - xi| {tp.log_offset:.4f}  "
              f"log|t- - xi| {tm.log_offset:.4f}")
    for name, roots in (("dirichlet", plus), ("robin", minus)):
        f = fit_envelope(roots)
        print(f"{name:>9}: c1 {f.c1:.4g}  c2 {f.c2:.4f}  raw slope {f.slope:.4f}  residual {f.max_residual:.2e}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alphas", type=float, nargs="+", default=list(EnvelopeConfig.alphas))
    ap.add_argument("--factor", type=float, default=EnvelopeConfig.factor)
    a = ap.parse_args()
    run(EnvelopeConfig(alphas=tuple(a.alphas), factor=a.factor))


if __name__ == "__main__":
    main()
