"""Which eigenvalue does the quotient select, and how long does it take?

Samples random small starts for A = diag(1, 2, 5), H = |x|^2 and records the
matched eigenvalue at several horizons.  Starts close to the invariant plane
y_1 = 0 linger near lambda = 2 for a time that grows like (|y_2|/|y_1|)^4.
"""

import argparse
from collections import Counter

import numpy as np

from powerdecay import (
    AmbiguousLimitError,
    Perturbation,
    SystemSpec,
    decompose_symmetric,
    extract_limit_eigenvalue,
    integrate,
    norm_power,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=40)
    ap.add_argument("--radius", type=float, default=0.1)
    ap.add_argument("--horizons", type=float, nargs="+", default=[1e4, 1e8, 1e12, 1e16, 1e24])
    ap.add_argument("--perturb", type=float, default=0.0, help="c in G = c |x|^(alpha+1) x")
    args = ap.parse_args()
    G = Perturbation.power(2, args.perturb, 1) if args.perturb else Perturbation.zero(2)
    sys_ = SystemSpec(decompose_symmetric(np.diag([1.0, 2.0, 5.0])), norm_power(3, 2), G).with_bounds()
    counts = {h: Counter() for h in args.horizons}
    for seed in range(args.samples):
        u = np.random.default_rng(seed).standard_normal(3)
        y0 = args.radius * u / np.linalg.norm(u)
        tr = integrate(sys_, y0, 0.0, max(args.horizons), extra_times=args.horizons)
        for h in args.horizons:
            k = int(np.searchsorted(tr.t, h))
            part = type(tr)(tr.t[:k + 1], tr.state[:k + 1], tr.on_grid[:k + 1], tr.chart, tr.alpha,
                            tr.norm[:k + 1], tr.lam[:k + 1], tr.v[:k + 1], tr.proj_norms[:k + 1],
                            tr.distinct, tr.meta)
            try:
                lim = extract_limit_eigenvalue(part, sys_.A)
                counts[h][lim.matched if lim.gap <= 1e-4 else "unsettled"] += 1
            except AmbiguousLimitError:
                counts[h]["ambiguous"] += 1
    for h in args.horizons:
        print(f"t = {h:8.0e}: " + ", ".join(f"{k}: {v}" for k, v in sorted(counts[h].items(), key=str)))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
