"""Scenario execution: integrate, analyze, persist."""

from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .diagnostics import AsymptoticReport, analyze
from .errors import AssumptionError, IntegrationError, ScenarioParseError
from .integrate import integrate
from .scenario import Scenario, load_scenario, scenario_hash

__all__ = [
    "EXIT_OK",
    "EXIT_PARSE",
    "EXIT_ASSUMPTION",
    "EXIT_DIVERGENCE",
    "EXIT_IDENTITY",
    "SUMMARY_FIELDS",
    "RunRecord",
    "run",
    "batch",
]

EXIT_OK, EXIT_PARSE, EXIT_ASSUMPTION, EXIT_DIVERGENCE, EXIT_IDENTITY = 0, 2, 3, 4, 5

SUMMARY_FIELDS = [
    "scenario", "file", "status", "Lambda_hat", "xi_norm", "p_hat", "eps_hat",
    "residual_eigen_relation", "residual_scalar_identity", "residual_eigenvector",
    "passed", "scenario_hash", "error",
]


@dataclass
class RunRecord:
    scenario: str
    scenario_hash: str | None
    trajectory_path: str | None
    report_path: str | None
    report: AsymptoticReport | None
    status: str                       # "ok" or an error class name
    error: str | None
    wall_time: float
    tool_version: str = __version__
    file: str | None = None

    @property
    def passed(self) -> bool:
        return self.status == "ok" and self.report is not None and self.report.passed

    @property
    def exit_code(self) -> int:
        if self.status == "ScenarioParseError":
            return EXIT_PARSE
        if self.status == "AssumptionError":
            return EXIT_ASSUMPTION
        if self.status != "ok":
            return EXIT_DIVERGENCE
        return EXIT_OK

    def verify_exit_code(self) -> int:
        code = self.exit_code
        if code == EXIT_OK and not self.passed:
            return EXIT_IDENTITY
        return code

    def summary_row(self) -> dict:
        r = self.report
        def g(name):
            v = None if r is None else getattr(r, name)
            return "" if v is None else _fmt(v)
        return {
            "scenario": self.scenario, "file": Path(self.file).name if self.file else "",
            "status": self.status,
            "Lambda_hat": g("Lambda_hat"), "xi_norm": g("xi_norm"), "p_hat": g("p_hat"),
            "eps_hat": g("eps_hat"), "residual_eigen_relation": g("residual_eigen_relation"),
            "residual_scalar_identity": g("residual_scalar_identity"),
            "residual_eigenvector": g("residual_eigenvector"),
            "passed": str(self.passed).lower(), "scenario_hash": self.scenario_hash or "",
            "error": (self.error or "").replace("\n", " "),
        }


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _summary_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def run(scenario: Scenario, out: str | os.PathLike = "runs") -> RunRecord:
    """Integrate and analyze one scenario; write ``<out>/<name>/`` artifacts.

    Integration failures are recorded in the report rather than raised.
    ``report.json`` holds no timing so that reruns are byte-identical.
    """
    t_start = time.perf_counter()
    h = scenario_hash(scenario, __version__)
    d = Path(out) / scenario.name
    d.mkdir(parents=True, exist_ok=True)
    traj_path, rep_path = d / "trajectory.csv", d / "report.json"
    status, error, report, traj = "ok", None, None, None
    try:
        traj = integrate(scenario.system, scenario.y0, scenario.t0, scenario.t_end,
                         scenario.integrator)
    except IntegrationError as exc:
        status, error, traj = type(exc).__name__, str(exc), exc.trajectory
    if traj is not None:
        traj.to_csv(traj_path)
    if status == "ok":
        report = analyze(traj, scenario.system, scenario.analysis)
    doc = {
        "scenario": scenario.name,
        "scenario_hash": h,
        "tool_version": __version__,
        "mode": scenario.mode,
        "in_proven_regime": scenario.in_proven_regime,
        "status": status,
        "error": error,
        "y0": [float(v) for v in scenario.y0],
        "t0": scenario.t0,
        "t_end": scenario.t_end,
        "seed": None if scenario.y0_rule is None else scenario.y0_rule["seed"],
        "integrator": {} if traj is None else {
            "steps": traj.meta.get("steps"),
            "chart_switch_times": traj.meta.get("chart_switch_times"),
            "samples": len(traj),
        },
        "report": None if report is None else report.to_dict(),
        "passed": status == "ok" and report is not None and report.passed,
    }
    rep_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    rec = RunRecord(scenario.name, h, str(traj_path) if traj is not None else None,
                    str(rep_path), report, status, error, time.perf_counter() - t_start,
                    file=scenario.source)
    (d / "summary-row.csv").write_text(_summary_csv([rec.summary_row()]))
    return rec


def _failed(name, file, exc) -> RunRecord:
    return RunRecord(name, None, None, None, None, type(exc).__name__, str(exc), 0.0, file=file)


def _run_file(args) -> RunRecord:
    path, out, overrides = args
    try:
        sc = load_scenario(path)
        if overrides:
            sc = sc.with_overrides(**overrides)
    except (ScenarioParseError, AssumptionError) as exc:
        return _failed(Path(path).stem, str(path), exc)
    return run(sc, out)


def batch(directory, jobs: int = 1, out="runs", overrides: dict | None = None):
    """Run every ``*.json`` in ``directory`` (sorted by filename).

    Returns the list of :class:`RunRecord` and writes ``<out>/summary.csv``.
    Per-file failures become failed rows; duplicate names are rejected after
    the first occurrence.
    """
    directory = Path(directory)
    files = sorted(directory.glob("*.json"))
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    # resolve names up front so duplicates never race on the same output dir
    tasks, records, seen = [], {}, {}
    for f in files:
        try:
            name = json.loads(f.read_text()).get("name")
        except (json.JSONDecodeError, OSError, AttributeError):
            name = None
        if isinstance(name, str) and name in seen:
            records[f] = _failed(name, str(f), ScenarioParseError(
                f"duplicate scenario name (first used by {seen[name].name})", "/name"))
            continue
        if isinstance(name, str):
            seen[name] = f
        tasks.append(f)
    args = [(str(f), str(out), overrides or {}) for f in tasks]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_run_file, args))
    else:
        results = [_run_file(a) for a in args]
    records.update(zip(tasks, results))
    ordered = [records[f] for f in files]
    (out / "summary.csv").write_text(_summary_csv([r.summary_row() for r in ordered]))
    return ordered
