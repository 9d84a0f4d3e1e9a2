"""Scenario files: JSON schema validation, construction and serialization."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .diagnostics import AnalysisConfig
from .errors import (
    AssumptionError,
    InvalidArgumentError,
    NotPositiveDefiniteError,
    PositivityViolationError,
    PowerDecayError,
    ScenarioParseError,
)
from .homogeneous import HomogeneousFn, sphere_bounds
from .integrate import IntegratorConfig
from .spectral import decompose_symmetric, from_given_transform
from .system import Perturbation, SystemSpec, check_perturbation_bound, small_data_radius

__all__ = [
    "SPEC_VERSION",
    "Scenario",
    "load_scenario",
    "parse_scenario",
    "serialize",
    "scenario_hash",
    "schema",
    "guaranteed_radius",
]

SPEC_VERSION = 1
GCOND = "|G(t,x)| <= c_*|x|^(1+alpha+delta) for t >= T_*, |x| <= r_*"


def schema() -> dict:
    text = resources.files(__package__).joinpath("scenario_schema.json").read_text()
    return json.loads(text)


_VALIDATOR = None


def _validator():
    global _VALIDATOR
    if _VALIDATOR is None:
        _VALIDATOR = jsonschema.Draft202012Validator(schema())
    return _VALIDATOR


def _pointer(path) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def _validate(doc):
    errors = list(_validator().iter_errors(doc))
    if not errors:
        return
    err = jsonschema.exceptions.best_match(errors)
    path = list(err.absolute_path)
    if err.validator == "required" and isinstance(err.instance, dict):
        missing = [k for k in err.validator_value if k not in err.instance]
        if missing:
            path.append(missing[0])
    raise ScenarioParseError(err.message, _pointer(path))


def _num(v) -> float:
    if isinstance(v, str):
        return float(Fraction(v.replace(" ", "")))
    return float(v)


def _mat(rows) -> np.ndarray:
    return np.array([[_num(v) for v in r] for r in rows], dtype=float)


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    system: SystemSpec
    y0: np.ndarray
    t0: float
    t_end: float
    mode: str = "exploratory"
    strict: bool = False
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    y0_rule: dict | None = None          # {"radius", "seed"} when y0 was sampled
    description: str = ""
    source: str | None = None

    def __eq__(self, other):
        return isinstance(other, Scenario) and serialize(self) == serialize(other)

    __hash__ = None

    @property
    def in_proven_regime(self) -> bool:
        r0, size = guaranteed_radius(self.system, self.y0)
        return bool(size < r0)

    def with_overrides(self, t_end=None, rel_tol=None, seed=None, strict=None) -> "Scenario":
        """Apply command-line overrides and re-check the assumptions they touch."""
        s = self
        if t_end is not None:
            if not float(t_end) > s.t0:
                raise ScenarioParseError(f"t_end = {t_end} must exceed t0 = {s.t0}", "/t_end")
            s = replace(s, t_end=float(t_end))
        if rel_tol is not None:
            s = replace(s, integrator=replace(s.integrator, rel_tol=float(rel_tol)))
        if seed is not None and s.y0_rule is not None:
            rule = dict(s.y0_rule, seed=int(seed))
            s = replace(s, y0_rule=rule, y0=_sample_y0(s.system.n, rule))
        if strict is not None and strict != s.strict:
            s = replace(s, strict=bool(strict))
        _check_assumptions(s)
        return s


def _sample_y0(n: int, rule: dict) -> np.ndarray:
    rng = np.random.default_rng(int(rule["seed"]))
    u = rng.standard_normal(n)
    return _num(rule["radius"]) * u / np.linalg.norm(u)


def guaranteed_radius(sys: SystemSpec, y0) -> tuple[float, float]:
    """``(r0, size)`` where ``size`` is the initial size measured in the same coordinates.

    For symmetric ``A`` this is ``small_data_radius`` against ``|y0|``.  Otherwise
    the radius is evaluated for ``z = S y`` with ``H(S^-1 z)`` and the bound
    constant of ``G`` transported through ``S``.
    """
    M = sys.A
    y0 = np.asarray(y0, dtype=float)
    if M.symmetric:
        return small_data_radius(sys), float(np.linalg.norm(y0))
    Ht = sys.H.transformed(M.S_inv)
    b = sphere_bounds(Ht, 4000, 0)
    G = sys.G
    sn, sin = float(np.linalg.norm(M.S, 2)), float(np.linalg.norm(M.S_inv, 2))
    c_star = G.c_star * sn * sin ** (1 + sys.alpha + G.delta)
    r = G.r_star / (2.0 * sin)
    if c_star > 0:
        r = min(r, (b.c1 * M.eigenvalues[0] / c_star) ** (1.0 / G.delta) / 2.0)
    return 0.5 * r, float(np.linalg.norm(M.S @ y0))


def _build_system(d: dict, bounds_samples: int, seed: int) -> SystemSpec:
    m = d["matrix"]
    try:
        if "symmetric" in m:
            A = decompose_symmetric(_mat(m["symmetric"]))
        else:
            A = from_given_transform(_mat(m["matrix"]), _mat(m["transform_S"]),
                                     [_num(v) for v in m["eigenvalues"]])
    except NotPositiveDefiniteError as exc:
        raise AssumptionError(f"/system/matrix: {exc}") from None
    except (InvalidArgumentError, PowerDecayError) as exc:
        raise ScenarioParseError(str(exc), "/system/matrix") from None
    try:
        H = HomogeneousFn.from_descriptor(d["H"], "/system/H")
    except InvalidArgumentError as exc:
        msg = str(exc)
        ptr = "/system/H"
        if msg.startswith("/system/H"):
            ptr, _, msg = msg.partition(": ")
        raise ScenarioParseError(msg, ptr) from None
    r_star = _num(d.get("r_star", 1.0))
    T_star = _num(d.get("T_star", 0.0))
    t_star = _num(d.get("t_star", 0.0))
    try:
        G = Perturbation.from_descriptor(d.get("G", {"kind": "zero"}), H.alpha, r_star, T_star,
                                         "/system/G")
    except InvalidArgumentError as exc:
        raise ScenarioParseError(str(exc).partition(": ")[2] or str(exc), "/system/G") from None
    if G.B is not None and G.B.shape != (A.n, A.n):
        raise ScenarioParseError(f"B must be {A.n}x{A.n}", "/system/G/B")
    try:
        sys = SystemSpec(A, H, G, t_star=t_star)
    except InvalidArgumentError as exc:
        raise ScenarioParseError(str(exc), "/system") from None
    try:
        return sys.with_bounds(bounds_samples, seed)
    except PositivityViolationError as exc:
        raise AssumptionError(f"/system/H: H is not positive on the unit sphere "
                              f"(H = {exc.value!r} at {exc.witness})") from None


def _check_assumptions(s: Scenario):
    if s.strict:
        rep = check_perturbation_bound(s.system)
        if not rep.ok:
            raise AssumptionError(
                f"perturbation violates {GCOND}: sampled ratio {rep.max_ratio:.6g} exceeds "
                f"c_* = {rep.c_star:.6g} at t = {rep.witness_t:.6g}, x = {list(rep.witness_x)}")
    if s.mode == "guaranteed":
        r0, size = guaranteed_radius(s.system, s.y0)
        if not size < r0:
            raise AssumptionError(
                f"guaranteed mode needs 0 < |y0| < r0 = {r0:.6g} (small-data radius), got {size:.6g}")


def parse_scenario(doc: dict, source: str | None = None) -> Scenario:
    """Validate a decoded scenario document and build the :class:`Scenario`."""
    _validate(doc)
    ana = AnalysisConfig(**doc.get("analysis", {}))
    try:
        integ = IntegratorConfig(**doc.get("integrator", {}))
    except InvalidArgumentError as exc:
        raise ScenarioParseError(str(exc), "/integrator") from None
    sys = _build_system(doc["system"], ana.bounds_samples, ana.seed)
    rule = None
    if isinstance(doc["y0"], dict):
        rule = {"radius": doc["y0"]["radius"], "seed": int(doc["y0"]["seed"])}
        y0 = _sample_y0(sys.n, rule)
    else:
        y0 = np.array([_num(v) for v in doc["y0"]], dtype=float)
        if y0.shape != (sys.n,):
            raise ScenarioParseError(f"y0 has {y0.size} entries, the system has dimension {sys.n}", "/y0")
        if not np.any(y0 != 0):
            raise ScenarioParseError("y0 must be nonzero", "/y0")
    t0, t_end = _num(doc["t0"]), _num(doc["t_end"])
    if t0 < sys.t_star:
        raise ScenarioParseError(f"t0 = {t0} precedes t_star = {sys.t_star}", "/t0")
    if not t_end > t0:
        raise ScenarioParseError(f"t_end = {t_end} must exceed t0 = {t0}", "/t_end")
    s = Scenario(doc["name"], sys, y0, t0, t_end, doc.get("mode", "exploratory"),
                 bool(doc.get("strict", False)), integ, ana, rule, doc.get("description", ""),
                 source)
    _check_assumptions(s)
    return s


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"invalid JSON: {exc.msg} (line {exc.lineno})", "") from None
    except OSError as exc:
        raise ScenarioParseError(f"cannot read {path}: {exc.strerror}", "") from None
    return parse_scenario(doc, str(path))


def serialize(s: Scenario) -> dict:
    """Canonical document; ``parse_scenario(serialize(s)) == s``."""
    sysd = {"matrix": s.system.A.descriptor(), "H": s.system.H.descriptor(),
            "G": s.system.G.descriptor(), "r_star": repr(s.system.G.r_star),
            "T_star": repr(s.system.G.T_star), "t_star": repr(s.system.t_star)}
    doc = {"spec_version": SPEC_VERSION, "name": s.name, "mode": s.mode, "strict": s.strict,
           "system": sysd,
           "y0": dict(s.y0_rule) if s.y0_rule is not None else [repr(float(v)) for v in s.y0],
           "t0": repr(s.t0), "t_end": repr(s.t_end),
           "integrator": s.integrator.to_dict(), "analysis": s.analysis.to_dict()}
    if s.description:
        doc["description"] = s.description
    return doc


def scenario_hash(s: Scenario, version: str) -> str:
    """sha256 over the canonical document and the tool version."""
    canon = json.dumps(serialize(s), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(f"{version}\n{canon}".encode()).hexdigest()
