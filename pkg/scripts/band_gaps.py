"""First gaps of a periodically curved wire with kappa = 1 + eps cos(s).

Compares the finite-difference gap with the Hill-discriminant reference
(when the test oracles are importable) and fits the small-eps slope.
"""
import argparse
import csv
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from leakywire import floquet_spectrum, gap_widths, profile_from_function


@dataclass
class GapConfig:
    eps: tuple = (0.05, 0.1, 0.2, 0.3, 0.4)
    theta_count: int = 64
    j_max: int = 6
    n: int = 2048
    out: Path = field(default=Path("results/band_gaps.csv"))


def hill_reference():
    sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
    try:
        import oracles
    except ImportError:
        return None
    return oracles.first_gap_hill


def run(cfg: GapConfig):
    ref = hill_reference()
    rows = []
    for eps in cfg.eps:
        p = profile_from_function(lambda s: 1 + eps * np.cos(s), (0, 2 * math.pi), 256, periodic=True,
                                  mode="periodic")
        g = gap_widths(floquet_spectrum(p, 2 * math.pi, cfg.theta_count, cfg.j_max, n=cfg.n))
        hill = ref(eps) if ref else float("nan")
        rows.append((eps, *g.gaps[:3], hill))
        print(f"eps {eps:.2f}: G1 {g.gaps[0]:.6e}  G2 {g.gaps[1]:.3e}  G3 {g.gaps[2]:.3e}  Hill G1 {hill:.6e}")
    e = np.array([r[0] for r in rows])
    g1 = np.array([r[1] for r in rows])
    print(f"G1 / eps at the smallest eps: {g1[0] / e[0]:.5f}")
    cfg.out.parent.mkdir(parents=True, exist_ok=True)
    with cfg.out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eps", "G1", "G2", "G3", "G1_hill"])
        w.writerows([[f"{x:.17g}" for x in r] for r in rows])
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, nargs="+", default=list(GapConfig.eps))
    ap.add_argument("--theta-count", type=int, default=GapConfig.theta_count)
    ap.add_argument("--n", type=int, default=GapConfig.n)
    ap.add_argument("--out", type=Path, default=Path("results/band_gaps.csv"))
    a = ap.parse_args()
    run(GapConfig(eps=tuple(a.eps), theta_count=a.theta_count, n=a.n, out=a.out))


if __name__ == "__main__":
    main()
