"""Command line: ``powerdecay {run,verify,batch,oracle}``."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .closedform import BasicCase, exact_unforced, xi_star_norm
from .errors import AssumptionError, ScenarioParseError
from .integrate import sample_grid
from .runner import EXIT_ASSUMPTION, EXIT_OK, EXIT_PARSE, batch, run
from .scenario import load_scenario


def _common(p: argparse.ArgumentParser, seed=True):
    p.add_argument("--t-end", type=float, help="override the final time")
    p.add_argument("--rel-tol", type=float, help="override the integrator relative tolerance")
    if seed:
        p.add_argument("--seed", type=int, help="override the seed of a sampled y0")
    p.add_argument("--strict", action="store_true", default=None,
                   help="check the perturbation growth bound before running")
    p.add_argument("--out", default="runs", help="output directory (default: runs)")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="powerdecay", description=__doc__)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True)
    p = sub.add_parser("run", help="integrate and analyze one scenario")
    p.add_argument("file")
    _common(p)
    p = sub.add_parser("verify", help="like run, but exit 5 when any identity check fails")
    p.add_argument("file")
    _common(p)
    p = sub.add_parser("batch", help="run every *.json scenario in a directory")
    p.add_argument("dir")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default: 1)")
    _common(p)
    p = sub.add_parser("oracle", help="closed-form table for an unforced scalar-coefficient scenario")
    p.add_argument("file")
    p.add_argument("--t-end", type=float)
    p.add_argument("--out", default=None, help="write <out>/<name>/oracle.csv instead of stdout")
    return ap


def _overrides(ns) -> dict:
    o = {"t_end": ns.t_end, "rel_tol": ns.rel_tol, "seed": getattr(ns, "seed", None),
         "strict": ns.strict}
    return {k: v for k, v in o.items() if v is not None}


def _load(ns):
    sc = load_scenario(ns.file)
    ov = _overrides(ns)
    return sc.with_overrides(**ov) if ov else sc


def _print_record(rec, verbose_checks=False):
    print(f"{rec.scenario}: status={rec.status} passed={str(rec.passed).lower()} "
          f"({rec.wall_time:.2f} s)")
    if rec.error:
        print(f"  error: {rec.error}")
    r = rec.report
    if r is None:
        return
    print(f"  Lambda_hat={r.Lambda_hat!r} |xi_hat|={r.xi_norm!r} p_hat={r.p_hat!r} "
          f"eps_hat={r.eps_hat!r}")
    if verbose_checks:
        for k in sorted(r.checks):
            print(f"  {'PASS' if r.checks[k] else 'FAIL'} {k}")
        for k in sorted(r.errors):
            print(f"  FAIL {k}: {r.errors[k]}")
    if rec.report_path:
        print(f"  report: {rec.report_path}")


def _oracle(ns) -> int:
    sc = load_scenario(ns.file)
    sys_ = sc.system
    M = sys_.A
    Hd = sys_.H.descriptor()
    basic = (M.d == 1 and np.allclose(M.A, M.eigenvalues[0] * np.eye(M.n), rtol=0, atol=1e-14)
             and Hd.get("kind") == "lp_norm_power" and "n" in Hd and float(Hd["p"]) == 2.0)
    if not basic:
        print("oracle: scenario is not of the form A = a I, H = |x|^alpha", file=sys.stderr)
        return EXIT_ASSUMPTION
    if not sys_.G.is_zero:
        print("oracle: the closed form needs G = 0", file=sys.stderr)
        return EXIT_ASSUMPTION
    a, alpha = float(M.eigenvalues[0]), sys_.alpha
    bc = BasicCase(a, alpha, sc.y0, sc.t0)
    t_end = ns.t_end if ns.t_end is not None else sc.t_end
    ts = np.array([sc.t0] + sample_grid(sc.t0, t_end, sc.integrator.sample_ratio))
    Y = exact_unforced(bc, ts)
    nrm = np.linalg.norm(Y, axis=1)
    with np.errstate(divide="ignore"):
        wn = np.where(ts > 0, ts ** (1 / alpha) * nrm, np.nan)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"y_{i + 1}" for i in range(bc.n)] + ["norm", "w_norm", "xi_star_norm"])
    xs = xi_star_norm(a, alpha)
    for k, t in enumerate(ts):
        w.writerow([format(float(v), ".17g") for v in [t, *Y[k], nrm[k], wn[k], xs]])
    if ns.out is None:
        sys.stdout.write(buf.getvalue())
    else:
        d = Path(ns.out) / sc.name
        d.mkdir(parents=True, exist_ok=True)
        (d / "oracle.csv").write_text(buf.getvalue())
        print(f"wrote {d / 'oracle.csv'}")
    return EXIT_OK


def main(argv=None) -> int:
    ns = _parser().parse_args(argv)
    try:
        if ns.verb == "oracle":
            return _oracle(ns)
        if ns.verb == "batch":
            if not Path(ns.dir).is_dir():
                print(f"batch: {ns.dir} is not a directory", file=sys.stderr)
                return EXIT_PARSE
            recs = batch(ns.dir, ns.jobs, ns.out, _overrides(ns))
            for rec in recs:
                _print_record(rec)
            print(f"{sum(r.passed for r in recs)}/{len(recs)} passed; "
                  f"summary: {Path(ns.out) / 'summary.csv'}")
            return EXIT_OK
        sc = _load(ns)
        rec = run(sc, ns.out)
        _print_record(rec, verbose_checks=ns.verb == "verify")
        return rec.verify_exit_code() if ns.verb == "verify" else rec.exit_code
    except ScenarioParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except AssumptionError as exc:
        print(f"assumption violated: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION


if __name__ == "__main__":
    sys.exit(main())
