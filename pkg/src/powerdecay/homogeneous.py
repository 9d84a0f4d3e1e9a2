"""Positively homogeneous scalar functions built from a small combinator tree.

A :class:`HomogeneousFn` is an immutable tree whose leaves are powers of
``l^p`` norms ``x -> ||K x||_p ** beta`` and whose inner nodes are products,
positive linear combinations of equal degree, and outer powers.  Keeping the
tree (instead of an opaque callable) is what lets scenarios serialize ``H``.

Evaluation broadcasts over leading axes: ``H(x)`` accepts ``x`` of shape
``(n,)`` or ``(..., n)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    DegreeMismatchError,
    InvalidArgumentError,
    PositivityViolationError,
)

__all__ = [
    "HomogeneousFn",
    "SphereBounds",
    "HolderProbe",
    "evaluate",
    "lp_norm_power",
    "norm_power",
    "product",
    "linear_combination",
    "outer_power",
    "sphere_points",
    "sphere_bounds",
    "holder_probe",
    "degree_equal",
]

DEGREE_ATOL = 1e-12
_DET_TOL = 1e-12


def _as_degree(value) -> Fraction | float:
    """Keep rationals exact; anything else becomes a float."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return Fraction(int(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            try:
                return float(value)
            except ValueError:
                raise InvalidArgumentError(f"cannot parse degree {value!r}") from None
    if isinstance(value, (float, np.floating)):
        return float(value)
    raise InvalidArgumentError(f"unsupported degree type {type(value).__name__}")


def _degree_str(value: Fraction | float) -> str:
    if isinstance(value, Fraction):
        return str(value)
    return repr(float(value))


def degree_equal(a, b) -> bool:
    """Exact comparison for two rationals, absolute tolerance otherwise."""
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return abs(float(a) - float(b)) <= DEGREE_ATOL


# ---------------------------------------------------------------------------
# tree nodes
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class _LpNode:
    K: np.ndarray
    p: float
    beta: Fraction | float
    identity: bool

    def __call__(self, x):
        z = x if self.identity else x @ self.K.T
        if np.isinf(self.p):
            nrm = np.max(np.abs(z), axis=-1)
        elif self.p == 2.0:
            nrm = np.sqrt(np.sum(z * z, axis=-1))
        elif self.p == 1.0:
            nrm = np.sum(np.abs(z), axis=-1)
        else:
            nrm = np.sum(np.abs(z) ** self.p, axis=-1) ** (1.0 / self.p)
        return nrm ** float(self.beta)

    def descriptor(self):
        d = {"kind": "lp_norm_power", "p": "inf" if np.isinf(self.p) else repr(float(self.p)),
             "beta": _degree_str(self.beta)}
        if self.identity:
            d["n"] = int(self.K.shape[0])
        else:
            d["K"] = [[repr(float(v)) for v in row] for row in self.K]
        return d


@dataclass(frozen=True, eq=False)
class _ProductNode:
    factors: tuple

    def __call__(self, x):
        out = self.factors[0].node(x)
        for f in self.factors[1:]:
            out = out * f.node(x)
        return out

    def descriptor(self):
        return {"kind": "product", "factors": [f.node.descriptor() for f in self.factors]}


@dataclass(frozen=True, eq=False)
class _SumNode:
    terms: tuple  # ((coef, HomogeneousFn), ...)

    def __call__(self, x):
        out = 0.0
        for c, f in self.terms:
            out = out + c * f.node(x)
        return out

    def descriptor(self):
        return {"kind": "sum",
                "terms": [{"coef": repr(float(c)), "fn": f.node.descriptor()} for c, f in self.terms]}


@dataclass(frozen=True, eq=False)
class _OuterPowerNode:
    inner: "HomogeneousFn"
    power: Fraction | float

    def __call__(self, x):
        return self.inner.node(x) ** float(self.power)

    def descriptor(self):
        return {"kind": "outer_power", "power": _degree_str(self.power),
                "fn": self.inner.node.descriptor()}


@dataclass(frozen=True, eq=False)
class HomogeneousFn:
    """Positively homogeneous function of declared ``degree`` on R^n."""

    degree: Fraction | float
    n: int
    node: object = field(repr=False)

    @property
    def alpha(self) -> float:
        return float(self.degree)

    def __call__(self, x):
        return evaluate(self, x)

    def descriptor(self) -> dict:
        """JSON-ready combinator tree; numbers are decimal (or p/q) strings."""
        return self.node.descriptor()

    @classmethod
    def from_descriptor(cls, d, pointer: str = "") -> "HomogeneousFn":
        return _from_descriptor(d, pointer)

    def transformed(self, M) -> "HomogeneousFn":
        """Return ``x -> H(M x)`` for an invertible matrix ``M`` (same degree)."""
        M = _check_matrix(M, self.n)
        return HomogeneousFn(self.degree, self.n, _Composed(self, M))


@dataclass(frozen=True, eq=False)
class _Composed:
    base: HomogeneousFn
    M: np.ndarray

    def __call__(self, x):
        return self.base.node(x @ self.M.T)

    def descriptor(self):
        raise InvalidArgumentError("coordinate-transformed H is an in-process object and does not serialize")


def _check_matrix(K, n=None) -> np.ndarray:
    K = np.array(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {K.shape}")
    if n is not None and K.shape[0] != n:
        raise InvalidArgumentError(f"matrix is {K.shape[0]}x{K.shape[0]}, expected {n}x{n}")
    if not np.all(np.isfinite(K)):
        raise InvalidArgumentError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(K)))) ** K.shape[0]
    if abs(np.linalg.det(K)) <= _DET_TOL * scale:
        raise InvalidArgumentError("matrix is singular (|det| below tolerance)")
    return K


def evaluate(H: HomogeneousFn, x) -> float | np.ndarray:
    """H(x); exactly 0 at the origin.  Broadcasts over leading axes."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (H.n,):
        raise InvalidArgumentError(f"expected trailing dimension {H.n}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("non-finite input to H")
    out = H.node(x)
    if np.ndim(out) == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def lp_norm_power(K, p: float = 2.0, beta=1) -> HomogeneousFn:
    """``x -> ||K x||_p ** beta`` with invertible ``K``; degree ``beta``."""
    K = _check_matrix(K)
    p = float(p)
    if not (p >= 1.0):
        raise InvalidArgumentError(f"p must be >= 1, got {p}")
    beta = _as_degree(beta)
    if not float(beta) > 0:
        raise InvalidArgumentError(f"degree must be positive, got {beta}")
    identity = bool(np.array_equal(K, np.eye(K.shape[0])))
    return HomogeneousFn(beta, K.shape[0], _LpNode(K, p, beta, identity))


def norm_power(n: int, beta=1, p: float = 2.0) -> HomogeneousFn:
    """``|x|_p ** beta`` on R^n."""
    return lp_norm_power(np.eye(int(n)), p, beta)


def product(*fns: HomogeneousFn) -> HomogeneousFn:
    """Pointwise product; degrees add."""
    if len(fns) == 1 and isinstance(fns[0], (list, tuple)):
        fns = tuple(fns[0])
    if not fns:
        raise InvalidArgumentError("product of nothing")
    n = fns[0].n
    if any(f.n != n for f in fns):
        raise InvalidArgumentError("product factors live in different dimensions")
    deg = fns[0].degree
    for f in fns[1:]:
        deg = deg + f.degree
    return HomogeneousFn(deg, n, _ProductNode(tuple(fns)))


def linear_combination(terms: Sequence[tuple[float, HomogeneousFn]]) -> HomogeneousFn:
    """Sum ``c_i H_i`` with ``c_i > 0``; every ``H_i`` must have the same degree."""
    terms = [(float(c), f) for c, f in terms]
    if not terms:
        raise InvalidArgumentError("empty linear combination")
    for c, _ in terms:
        if not (c > 0 and np.isfinite(c)):
            raise InvalidArgumentError(f"coefficients must be positive, got {c}")
    deg, n = terms[0][1].degree, terms[0][1].n
    for _, f in terms[1:]:
        if f.n != n:
            raise InvalidArgumentError("terms live in different dimensions")
        if not degree_equal(f.degree, deg):
            raise DegreeMismatchError(f"degree {f.degree} differs from {deg}")
    return HomogeneousFn(deg, n, _SumNode(tuple(terms)))


def outer_power(H: HomogeneousFn, power) -> HomogeneousFn:
    """``x -> H(x) ** power``; degree multiplies."""
    power = _as_degree(power)
    if not float(power) > 0:
        raise InvalidArgumentError("outer power must be positive")
    return HomogeneousFn(H.degree * power, H.n, _OuterPowerNode(H, power))


def _from_descriptor(d, pointer: str) -> HomogeneousFn:
    if not isinstance(d, dict) or "kind" not in d:
        raise InvalidArgumentError(f"{pointer}: expected an object with a 'kind' field")
    kind = d["kind"]
    try:
        if kind == "lp_norm_power":
            p = d.get("p", "2")
            p = np.inf if str(p).strip().lower() in ("inf", "infinity") else float(Fraction(str(p)))
            if "K" in d:
                K = [[float(Fraction(str(v))) for v in row] for row in d["K"]]
            elif "n" in d:
                K = np.eye(int(d["n"]))
            else:
                raise InvalidArgumentError(f"{pointer}: lp_norm_power needs 'K' or 'n'")
            return lp_norm_power(K, p, d["beta"])
        if kind == "product":
            return product(*[_from_descriptor(f, f"{pointer}/factors/{i}")
                             for i, f in enumerate(d["factors"])])
        if kind == "sum":
            return linear_combination([
                (float(Fraction(str(t["coef"]))), _from_descriptor(t["fn"], f"{pointer}/terms/{i}/fn"))
                for i, t in enumerate(d["terms"])])
        if kind == "outer_power":
            return outer_power(_from_descriptor(d["fn"], f"{pointer}/fn"), d["power"])
    except KeyError as exc:
        raise InvalidArgumentError(f"{pointer}: missing field {exc.args[0]!r}") from None
    raise InvalidArgumentError(f"{pointer}: unknown kind {kind!r}")


# ---------------------------------------------------------------------------
# numerical probes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SphereBounds:
    c1: float
    c2: float
    samples: int
    slack: float = 0.0
    argmin: tuple = ()
    argmax: tuple = ()


@dataclass(frozen=True)
class HolderProbe:
    center: tuple
    gamma_hat: float
    C_hat: float
    radius: float
    radii: tuple = ()
    deviations: tuple = ()
    residuals: tuple = ()


def sphere_points(n: int, m: int, seed: int = 0, method: str = "gaussian") -> np.ndarray:
    """``m`` points on the unit sphere of R^n; deterministic for a fixed seed."""
    if method == "grid":
        if n != 2:
            raise InvalidArgumentError("angle grids are only available for n = 2")
        th = 2 * np.pi * np.arange(m) / m
        return np.column_stack([np.cos(th), np.sin(th)])
    if method != "gaussian":
        raise InvalidArgumentError(f"unknown sampling method {method!r}")
    g = np.random.default_rng(seed).standard_normal((m, n))
    nrm = np.linalg.norm(g, axis=1)
    g = g[nrm > 1e-12]
    return g / np.linalg.norm(g, axis=1)[:, None]


def _polish(H: HomogeneousFn, x: np.ndarray, sign: float, rng, iters: int = 60) -> np.ndarray:
    # random-direction pattern search on the sphere, minimizing sign * H
    best, fbest = x, sign * H.node(x)
    step = 0.1
    for _ in range(iters):
        cand = best + step * rng.standard_normal((16, H.n))
        cand /= np.linalg.norm(cand, axis=1)[:, None]
        vals = sign * H.node(cand)
        k = int(np.argmin(vals))
        if vals[k] < fbest:
            best, fbest = cand[k], vals[k]
        else:
            step *= 0.6
    return best


def sphere_bounds(H: HomogeneousFn, n_samples: int = 10_000, seed: int = 0,
                  method: str = "gaussian", polish: bool = True) -> SphereBounds:
    """Estimate ``c1 = min H`` and ``c2 = max H`` over the unit sphere.

    The raw sample extremes are refined by a short local search; ``slack``
    reports how far that search moved them, i.e. how coarse the sampling was.
    """
    if n_samples < 100:
        raise InvalidArgumentError("sphere_bounds needs at least 100 samples")
    pts = sphere_points(H.n, n_samples, seed, method)
    vals = H.node(pts)
    bad = np.flatnonzero(~(vals > 0))
    if bad.size:
        k = int(bad[0])
        raise PositivityViolationError(
            f"H(x) = {vals[k]!r} <= 0 at sphere point {pts[k].tolist()}",
            witness=pts[k].copy(), value=float(vals[k]))
    kmin, kmax = int(np.argmin(vals)), int(np.argmax(vals))
    c1, c2 = float(vals[kmin]), float(vals[kmax])
    xmin, xmax = pts[kmin], pts[kmax]
    slack = 0.0
    if polish:
        rng = np.random.default_rng(seed + 1)
        xmin = _polish(H, xmin, 1.0, rng)
        xmax = _polish(H, xmax, -1.0, rng)
        p1, p2 = float(H.node(xmin)), float(H.node(xmax))
        if not p1 > 0:
            raise PositivityViolationError(f"H(x) = {p1!r} <= 0 at sphere point {xmin.tolist()}",
                                           witness=xmin, value=p1)
        slack = max(c1 - p1, p2 - c2, 0.0)
        c1, c2 = min(c1, p1), max(c2, p2)
    return SphereBounds(c1, c2, int(len(pts)), slack, tuple(xmin.tolist()), tuple(xmax.tolist()))


def holder_probe(H: HomogeneousFn, x0, radii, seed: int = 0, n_dirs: int = 256) -> HolderProbe:
    """Fit ``max |H(x) - H(x0)| ~ C r^gamma`` over spheres of radius r about ``x0``.

    The maximum (not the mean) per shell is used since the Holder-type bound
    has to hold for every nearby point.
    """
    x0 = np.asarray(x0, dtype=float)
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size < 3:
        raise InvalidArgumentError("holder_probe needs at least 3 radii")
    if np.any(radii <= 0) or np.any(radii >= 1) or np.any(np.diff(radii) >= 0):
        raise InvalidArgumentError("radii must be strictly decreasing inside (0, 1)")
    if x0.shape != (H.n,) or abs(np.linalg.norm(x0) - 1.0) > 1e-8:
        raise InvalidArgumentError("x0 must be a unit vector of matching dimension")
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((n_dirs, H.n))
    eye = np.eye(H.n)
    dirs = np.vstack([dirs, eye, -eye, x0, -x0])
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    h0 = H.node(x0)
    devs = np.array([np.max(np.abs(H.node(x0 + r * dirs) - h0)) for r in radii])
    if np.any(devs <= 0):
        raise InvalidArgumentError("degenerate fit: zero deviation on some shell")
    X = np.column_stack([np.ones_like(radii), np.log(radii)])
    coef, *_ = np.linalg.lstsq(X, np.log(devs), rcond=None)
    resid = np.log(devs) - X @ coef
    return HolderProbe(tuple(x0.tolist()), float(coef[1]), float(np.exp(coef[0])),
                       float(radii[0]), tuple(radii.tolist()), tuple(devs.tolist()),
                       tuple(resid.tolist()))
