"""Freeze high-precision I0, I1, K0, K1 values from their integral representations.

I_n(x) = (1/pi) int_0^pi exp(x cos t) cos(n t) dt
K_n(x) = int_0^inf exp(-x cosh t) cosh(n t) dt

Evaluated with mpmath Gauss-Legendre/tanh-sinh quadrature at 30 digits,
independently of the series and continued fractions used by the package.
"""
import argparse
import json
from pathlib import Path

import mpmath as mp


def oracle(x):
    x = mp.mpf(x)
    i0 = mp.quad(lambda t: mp.exp(x * mp.cos(t)), [0, mp.pi / 2, mp.pi]) / mp.pi
    i1 = mp.quad(lambda t: mp.exp(x * mp.cos(t)) * mp.cos(t), [0, mp.pi / 2, mp.pi]) / mp.pi
    # the K integrands decay like exp(-x cosh t); beyond x cosh t = 200 e^3 they
    # are below exp(-4000), so a finite upper limit loses nothing at this precision
    tmax = mp.acosh(max(mp.mpf(200) / x, mp.mpf(2)))
    pts = [0, tmax / 4, tmax / 2, 3 * tmax / 4, tmax, tmax + 1, tmax + 3]
    k0 = mp.quad(lambda t: mp.exp(-x * mp.cosh(t)), pts)
    k1 = mp.quad(lambda t: mp.exp(-x * mp.cosh(t)) * mp.cosh(t), pts)
    return i0, i1, k0, k1


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "tests/data/bessel_oracle.json"))
    ap.add_argument("--points", type=int, default=200)
    args = ap.parse_args()
    mp.mp.dps = 30
    xs = [mp.mpf(10) ** (mp.mpf(-4) + (mp.log10(30) + 4) * k / (args.points - 1)) for k in range(args.points)]
    rows = []
    for x in xs:
        vals = oracle(x)
        rows.append([mp.nstr(x, 20)] + [mp.nstr(v, 20) for v in vals])
    Path(args.out).write_text(json.dumps({"columns": ["x", "i0", "i1", "k0", "k1"], "rows": rows}, indent=1))
    print(f"wrote {len(rows)} rows to {args.out}")


if __name__ == "__main__":
    main()
