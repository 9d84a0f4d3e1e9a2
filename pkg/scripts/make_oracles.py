"""Regenerate tests/fixtures/oracles.json.

The forced scalar reference is classical RK4 with a fixed step of 1e-4 on
[0, 1e3] for y' = -y^2 + 0.01 |y|^3, y(0) = 1.  It takes ~20 s in pure
Python and is deliberately independent of the package's integrator.
"""

import argparse
import json
import math
import time
from pathlib import Path

from scipy.optimize import brentq

FIXTURE = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "oracles.json"


def rk4_forced(y0=1.0, a=1.0, c=0.01, h=1e-4, t_end=1e3):
    def f(y):
        ay = abs(y)
        return -a * ay * y + c * ay ** 3

    n = int(round(t_end / h))
    y = y0
    for _ in range(n):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def implicit_forced(c=0.01, t=1e3):
    """Same problem via separation of variables:
    t = 1/y - 1 - c ln y + c ln((1 - c y) / (1 - c))."""
    def T(y):
        return 1 / y - 1 - c * math.log(y) + c * math.log((1 - c * y) / (1 - c))
    return brentq(lambda y: T(y) - t, 1e-9, 1.0, xtol=1e-22, rtol=1e-15)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=FIXTURE)
    args = ap.parse_args()
    t = time.perf_counter()
    y = rk4_forced()
    print(f"rk4 y(1e3) = {y!r}  ({time.perf_counter() - t:.1f} s)")
    data = json.loads(args.out.read_text()) if args.out.exists() else {}
    data["forced_scalar_rk4"] = {
        "problem": "y' = -a|y|^alpha y + c|y|^(alpha+2), a=1, alpha=1, c=0.01, y(0)=1",
        "method": "classical RK4, fixed step 1e-4 on [0, 1e3]",
        "t": 1000.0,
        "y": y,
        "y_implicit": implicit_forced(),
    }
    args.out.write_text(json.dumps(data, indent=2) + "\n")


if __name__ == "__main__":
    main()
