"""Bracket widths on a loop across a coupling sweep.

Writes one row per (alpha, j) and prints the width ratios between
consecutive couplings next to the exponential prediction exp(pi * dalpha).
"""
import argparse
import csv
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from leakywire import builtin_curve, curvature_profile, squeeze_check


@dataclass
class SweepConfig:
    curve: str = "circle"
    alphas: tuple = (-1.0, -1.25, -1.5, -1.75, -2.0)
    j_max: int = 5
    n: int = 2048
    profile_n: int = 1024
    out: Path = field(default=Path("results/squeeze_sweep.csv"))


def run(cfg: SweepConfig):
    profile = curvature_profile(builtin_curve(cfg.curve), cfg.profile_n)
    reports = [squeeze_check(profile, a, cfg.j_max, n=cfg.n) for a in cfg.alphas]
    cfg.out.parent.mkdir(parents=True, exist_ok=True)
    with cfg.out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "d", "j", "mu", "lower_gap", "upper_gap", "width", "pass"])
        for rep in reports:
            for r in rep.rows:
                w.writerow([rep.alpha, f"{rep.d:.17g}", r.j, f"{r.mu:.17g}", f"{r.lower_gap:.17g}",
                            f"{r.upper_gap:.17g}", f"{r.lower_gap + r.upper_gap:.17g}", int(r.passed)])
    for prev, cur in zip(reports, reports[1:]):
        ratio = np.max(cur.widths) / np.max(prev.widths)
        pred = math.exp(math.pi * (cur.alpha - prev.alpha))
        print(f"alpha {prev.alpha:+.2f} -> {cur.alpha:+.2f}: width ratio {ratio:.4f} (exp: {pred:.4f}), "
              f"all pass: {cur.all_pass}")
    return reports


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--curve", default=SweepConfig.curve)
    ap.add_argument("--alphas", type=float, nargs="+", default=list(SweepConfig.alphas))
    ap.add_argument("--j-max", type=int, default=SweepConfig.j_max)
    ap.add_argument("--n", type=int, default=SweepConfig.n)
    ap.add_argument("--out", type=Path, default=Path("results/squeeze_sweep.csv"))
    a = ap.parse_args()
    cfg = SweepConfig(curve=a.curve, alphas=tuple(a.alphas), j_max=a.j_max, n=a.n, out=a.out)
    print(asdict(cfg))
    run(cfg)


if __name__ == "__main__":
    main()
