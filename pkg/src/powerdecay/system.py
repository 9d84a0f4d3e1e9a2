"""Right-hand side ``y' = -H(y) A y + G(t, y)`` and perturbation bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import InvalidArgumentError, StateError
from .homogeneous import HomogeneousFn, SphereBounds, sphere_bounds
from .spectral import SpectralMatrix

__all__ = [
    "Perturbation",
    "SystemSpec",
    "PerturbationReport",
    "rhs",
    "check_perturbation_bound",
    "small_data_radius",
]


def _num(v) -> float:
    return float(Fraction(str(v))) if isinstance(v, str) else float(v)


@dataclass(frozen=True, eq=False)
class Perturbation:
    """``G(t, x)`` together with the constants of its declared growth bound.

    Serializable kinds:

    * ``zero``
    * ``power``: ``c |x|^(alpha+delta) (B x) (1+t)^(-q)`` (``B`` defaults to I)
    * ``linear``: ``c (B x) (1+t)^(-q)``; violates the superlinear bound and
      exists so that scenarios can exercise the assumption checks.

    ``kind="custom"`` wraps an arbitrary callable and does not serialize.
    """

    kind: str
    alpha: float
    c: float = 0.0
    delta: float = 1.0
    B: np.ndarray | None = None
    q: float = 0.0
    r_star: float = 1.0
    T_star: float = 0.0
    c_star: float = 0.0
    func: Callable | None = field(default=None, repr=False)

    @classmethod
    def zero(cls, alpha, r_star=1.0, T_star=0.0) -> "Perturbation":
        return cls("zero", float(alpha), r_star=float(r_star), T_star=float(T_star))

    @classmethod
    def power(cls, alpha, c, delta, B=None, q=0.0, r_star=1.0, T_star=0.0) -> "Perturbation":
        if not _num(delta) > 0:
            raise InvalidArgumentError("delta must be positive")
        if _num(q) < 0:
            raise InvalidArgumentError("time-damping exponent q must be >= 0")
        B = None if B is None else np.array(B, dtype=float)
        c = _num(c)
        c_star = abs(c) * (1.0 if B is None else float(np.linalg.norm(B, 2)))
        return cls("power", float(alpha), c, _num(delta), B, _num(q), float(r_star),
                   float(T_star), c_star)

    @classmethod
    def linear(cls, alpha, c, B=None, q=0.0, delta=1.0, r_star=1.0, T_star=0.0) -> "Perturbation":
        B = None if B is None else np.array(B, dtype=float)
        c = _num(c)
        c_star = abs(c) * (1.0 if B is None else float(np.linalg.norm(B, 2)))
        return cls("linear", float(alpha), c, _num(delta), B, _num(q), float(r_star),
                   float(T_star), c_star)

    @classmethod
    def custom(cls, alpha, func, c_star, delta, r_star=1.0, T_star=0.0) -> "Perturbation":
        return cls("custom", float(alpha), delta=float(delta), r_star=float(r_star),
                   T_star=float(T_star), c_star=float(c_star), func=func)

    @classmethod
    def from_descriptor(cls, d: dict, alpha: float, r_star=1.0, T_star=0.0,
                        pointer: str = "") -> "Perturbation":
        kind = d.get("kind")
        try:
            if kind == "zero":
                return cls.zero(alpha, r_star, T_star)
            if kind == "power":
                return cls.power(alpha, d["c"], d["delta"], d.get("B"), d.get("q", 0.0),
                                 r_star, T_star)
            if kind == "linear":
                return cls.linear(alpha, d["c"], d.get("B"), d.get("q", 0.0),
                                  d.get("delta", 1.0), r_star, T_star)
        except KeyError as exc:
            raise InvalidArgumentError(f"{pointer}: missing field {exc.args[0]!r}") from None
        raise InvalidArgumentError(f"{pointer}: unknown perturbation kind {kind!r}")

    def descriptor(self) -> dict:
        if self.kind == "zero":
            return {"kind": "zero"}
        if self.kind == "custom":
            raise InvalidArgumentError("custom perturbations do not serialize")
        d = {"kind": self.kind, "c": repr(self.c)}
        if self.kind == "power" or self.delta != 1.0:
            d["delta"] = repr(self.delta)
        if self.B is not None:
            d["B"] = [[repr(float(v)) for v in row] for row in self.B]
        if self.q:
            d["q"] = repr(self.q)
        return d

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "custom":
            return np.asarray(self.func(t, x), dtype=float)
        bx = x if self.B is None else self.B @ x
        damp = (1.0 + t) ** (-self.q) if self.q else 1.0
        if self.kind == "linear":
            return (self.c * damp) * bx
        r = np.sqrt(x @ x)
        return (self.c * damp * r ** (self.alpha + self.delta)) * bx


@dataclass(frozen=True, eq=False)
class SystemSpec:
    A: SpectralMatrix
    H: HomogeneousFn
    G: Perturbation
    t_star: float = 0.0
    bounds: SphereBounds | None = None

    def __post_init__(self):
        if self.A.n != self.H.n:
            raise InvalidArgumentError(f"A is {self.A.n}x{self.A.n} but H acts on R^{self.H.n}")
        if not self.G.delta > 0:
            raise InvalidArgumentError("perturbation delta must be positive")

    @property
    def n(self) -> int:
        return self.A.n

    @property
    def alpha(self) -> float:
        return self.H.alpha

    def with_bounds(self, n_samples: int = 10_000, seed: int = 0) -> "SystemSpec":
        return replace(self, bounds=sphere_bounds(self.H, n_samples, seed))

    def rhs(self, t: float, y) -> np.ndarray:
        return rhs(self, t, y)

    def rhs_unchecked(self, t: float, y: np.ndarray) -> np.ndarray:
        out = -self.H.node(y) * (self.A.A @ y)
        if not self.G.is_zero:
            out = out + self.G(t, y)
        return out


def rhs(sys: SystemSpec, t: float, y) -> np.ndarray:
    """``-H(y) A y + G(t, y)``."""
    y = np.asarray(y, dtype=float)
    if y.shape != (sys.n,):
        raise InvalidArgumentError(f"state must have shape ({sys.n},), got {y.shape}")
    if not np.all(np.isfinite(y)):
        raise InvalidArgumentError("non-finite state")
    if t < sys.t_star:
        raise InvalidArgumentError(f"t = {t} precedes the admissible start {sys.t_star}")
    return sys.rhs_unchecked(float(t), y)


@dataclass(frozen=True)
class PerturbationReport:
    max_ratio: float
    c_star: float
    ok: bool
    exponent: float
    samples: int
    witness_t: float | None = None
    witness_x: tuple | None = None


def check_perturbation_bound(sys: SystemSpec, n_samples: int = 2000, seed: int = 0) -> PerturbationReport:
    """Sampled check of ``|G(t,x)| <= c_star |x|^(1+alpha+delta)`` for ``t >= T_star``, ``|x| <= r_star``."""
    if n_samples < 100:
        raise InvalidArgumentError("need at least 100 samples")
    G = sys.G
    expo = 1.0 + sys.alpha + G.delta
    if G.is_zero:
        return PerturbationReport(0.0, G.c_star, True, expo, n_samples)
    rng = np.random.default_rng(seed)
    t_lo = G.T_star
    t_hi = 1e6 * max(1.0, G.T_star)
    lt = rng.uniform(np.log(max(t_lo, 1e-6)), np.log(t_hi), n_samples)
    ts = np.exp(lt)
    ts[0] = t_lo
    radii = np.exp(rng.uniform(np.log(G.r_star * 1e-8), np.log(G.r_star), n_samples))
    radii[-1] = G.r_star
    dirs = rng.standard_normal((n_samples, sys.n))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    xs = dirs * radii[:, None]
    best, arg = 0.0, None
    for k in range(n_samples):
        g = G(float(ts[k]), xs[k])
        ratio = float(np.linalg.norm(g)) / radii[k] ** expo
        if ratio > best:
            best, arg = ratio, k
    ok = best <= G.c_star * (1 + 1e-6)
    if arg is None:
        return PerturbationReport(best, G.c_star, ok, expo, n_samples)
    return PerturbationReport(best, G.c_star, ok, expo, n_samples, float(ts[arg]),
                              tuple(xs[arg].tolist()))


def small_data_radius(sys: SystemSpec, margin: float = 0.5) -> float:
    """Radius r0 below which global existence and the two-sided decay envelope hold.

    ``r0 = margin * min(r_star / 2, (c1 Lambda_1 / c_star)^(1/delta) / 2)``.
    """
    if not 0 < margin <= 1:
        raise InvalidArgumentError("margin must lie in (0, 1]")
    if sys.bounds is None:
        raise StateError("sphere bounds of H have not been computed (use with_bounds)")
    G = sys.G
    r = G.r_star / 2.0
    if G.c_star > 0:
        r = min(r, (sys.bounds.c1 * sys.A.eigenvalues[0] / G.c_star) ** (1.0 / G.delta) / 2.0)
    return margin * r
