"""Closed-form and quadrature oracle for ``y' = -a |y|^alpha y + f(t, y)``.

Without forcing the solution keeps its direction and
``|y(t)|^(-alpha) = |y0|^(-alpha) + a alpha (t - t0)``.  With forcing, the
variation-of-constants representation

    y(t) = e^{J2(t)} (y0 + eta(t)) / (1 + |y0|^alpha a alpha (t - t0))^(1/alpha)

with ``J2 = int (a/B - a|y|^alpha)``, ``B = |y0|^(-alpha) + a alpha (tau - t0)``
and ``eta = int e^{J} f`` is evaluated by quadrature along a numerical
trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import AccuracyError, InvalidArgumentError
from .homogeneous import norm_power
from .integrate import Trajectory
from .spectral import decompose_symmetric
from .system import Perturbation, SystemSpec

__all__ = [
    "BasicCase",
    "exact_unforced",
    "xi_star_norm",
    "forced_oracle",
    "forced_xi_star",
    "asymptotic_prediction",
    "J1",
    "adaptive_simpson",
]

SIMPSON_TOL = 1e-10
SIMPSON_MAX_INTERVALS = 1_000_000

# 8-point Gauss-Legendre nodes/weights on [-1, 1]
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True, eq=False)
class BasicCase:
    """Scalar-coefficient system with optional forcing ``f(t, y)``.

    ``M`` and ``delta`` are the declared constants of
    ``|f(t)| <= M |y(t)|^(alpha+1+delta)``.
    """

    a: float
    alpha: float
    y0: np.ndarray
    t0: float = 0.0
    forcing: Callable | None = field(default=None, repr=False)
    M: float | None = None
    delta: float | None = None

    def __post_init__(self):
        if not (self.a > 0 and self.alpha > 0):
            raise InvalidArgumentError("a and alpha must be positive")
        y0 = np.atleast_1d(np.array(self.y0, dtype=float))
        if y0.ndim != 1 or not np.all(np.isfinite(y0)) or not np.any(y0 != 0):
            raise InvalidArgumentError("y0 must be a finite nonzero vector")
        object.__setattr__(self, "y0", y0)
        if self.forcing is not None and (self.M is None or self.delta is None):
            raise InvalidArgumentError("forcing needs its bound constants M and delta")

    @property
    def n(self) -> int:
        return self.y0.size

    def rhs(self, t, y):
        y = np.asarray(y, dtype=float)
        out = -self.a * np.linalg.norm(y) ** self.alpha * y
        if self.forcing is not None:
            out = out + np.asarray(self.forcing(t, y), dtype=float)
        return out

    def as_system(self, alpha_exact=None) -> SystemSpec:
        """The same problem as a :class:`SystemSpec` with ``A = a I``, ``H = |x|^alpha``."""
        deg = self.alpha if alpha_exact is None else alpha_exact
        H = norm_power(self.n, deg)
        A = decompose_symmetric(self.a * np.eye(self.n))
        if self.forcing is None:
            G = Perturbation.zero(H.alpha)
        else:
            G = Perturbation.custom(H.alpha, self.forcing, self.M, self.delta,
                                    r_star=max(1.0, 2 * float(np.linalg.norm(self.y0))),
                                    T_star=self.t0)
        return SystemSpec(A, H, G, t_star=self.t0)


def exact_unforced(bc: BasicCase, t) -> np.ndarray:
    """``y0 / (1 + |y0|^alpha a alpha (t - t0))^(1/alpha)``; vectorized over ``t``."""
    if bc.forcing is not None:
        raise InvalidArgumentError("exact_unforced needs a case without forcing")
    ts = np.asarray(t, dtype=float)
    if np.any(ts < bc.t0):
        raise InvalidArgumentError(f"t must be >= t0 = {bc.t0}")
    r0a = np.linalg.norm(bc.y0) ** bc.alpha
    # log1p keeps the t = t0 case exact and the small-increment case accurate
    scale = np.exp(-np.log1p(r0a * bc.a * bc.alpha * (ts - bc.t0)) / bc.alpha)
    if ts.ndim == 0:
        return bc.y0 * float(scale)
    return scale[:, None] * bc.y0[None, :]


def xi_star_norm(a: float, alpha: float) -> float:
    if not (a > 0 and alpha > 0):
        raise InvalidArgumentError("a and alpha must be positive")
    return float((a * alpha) ** (-1.0 / alpha))


def asymptotic_prediction(bc: BasicCase) -> tuple[float, float]:
    """``(p, |xi*|) = (1/alpha, (a alpha)^(-1/alpha))``."""
    return 1.0 / bc.alpha, xi_star_norm(bc.a, bc.alpha)


def J1(bc: BasicCase, t: float) -> float:
    r0a = np.linalg.norm(bc.y0) ** bc.alpha
    return math.log1p(r0a * bc.a * bc.alpha * (t - bc.t0)) / bc.alpha


def adaptive_simpson(f, lo: float, hi: float, tol: float = SIMPSON_TOL,
                     max_intervals: int = SIMPSON_MAX_INTERVALS):
    """Adaptive Simpson quadrature of a scalar or vector integrand.

    Returns ``(value, error_estimate)``.  Raises :class:`AccuracyError` when
    the interval budget is exhausted before the tolerance is met.
    """
    if hi == lo:
        f0 = np.asarray(f(lo), dtype=float)
        return np.zeros_like(f0), 0.0
    flo, fhi = np.asarray(f(lo), float), np.asarray(f(hi), float)
    mid = 0.5 * (lo + hi)
    fm = np.asarray(f(mid), float)
    whole = (hi - lo) / 6.0 * (flo + 4 * fm + fhi)
    stack = [(lo, hi, flo, fm, fhi, whole, tol)]
    total = np.zeros_like(whole)
    err_total = 0.0
    intervals = 1
    while stack:
        a, b, fa, fm, fb, S, eps = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = np.asarray(f(lm), float), np.asarray(f(rm), float)
        left = (m - a) / 6.0 * (fa + 4 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4 * frm + fb)
        diff = float(np.max(np.abs(left + right - S)))
        if diff <= 15 * eps or (b - a) <= 1e-13 * max(1.0, abs(a)):
            total = total + left + right + (left + right - S) / 15.0
            err_total += diff / 15.0
            continue
        intervals += 1
        if intervals > max_intervals:
            raise AccuracyError(
                f"adaptive Simpson exceeded {max_intervals} subdivisions on [{lo}, {hi}]",
                achieved=err_total + diff / 15.0)
        stack.append((m, b, fm, frm, fb, right, eps / 2))
        stack.append((a, m, fa, flm, fm, left, eps / 2))
    return total, err_total


class _Hermite:
    """Piecewise cubic Hermite interpolant of a trajectory using ``y' = rhs``."""

    def __init__(self, bc: BasicCase, traj: Trajectory):
        self.t = np.asarray(traj.t, dtype=float)
        self.y = np.asarray(traj.y, dtype=float)
        self.d = np.array([bc.rhs(tk, yk) for tk, yk in zip(self.t, self.y)])

    def interval(self, t):
        k = int(np.searchsorted(self.t, t, side="right")) - 1
        return min(max(k, 0), len(self.t) - 2)

    def __call__(self, t, k=None):
        if k is None:
            k = self.interval(t)
        t0, t1 = self.t[k], self.t[k + 1]
        h = t1 - t0
        s = (t - t0) / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1]


class _Representation:
    """Quadrature state for ``J2`` and ``eta`` along a numerical trajectory."""

    def __init__(self, bc: BasicCase, traj: Trajectory, tol: float):
        if traj.chart != "y":
            raise InvalidArgumentError("forced_oracle needs a trajectory in the y chart")
        if abs(traj.t[0] - bc.t0) > 1e-12 * max(1.0, abs(bc.t0)):
            raise InvalidArgumentError("trajectory must start at bc.t0")
        self.bc = bc
        self.tol = tol
        self.interp = _Hermite(bc, traj)
        r0a = float(np.linalg.norm(bc.y0)) ** bc.alpha
        self.r0a = r0a
        self.binv0 = 1.0 / r0a
        # J2 at every trajectory node
        T = self.interp.t
        self.J2_nodes = np.zeros(len(T))
        for k in range(len(T) - 1):
            v, _ = adaptive_simpson(lambda s, k=k: self._h(s, k), T[k], T[k + 1], tol / len(T))
            self.J2_nodes[k + 1] = self.J2_nodes[k] + float(v)

    def _h(self, tau, k=None):
        bc = self.bc
        y = self.interp(tau, k)
        B = self.binv0 + bc.a * bc.alpha * (tau - bc.t0)
        return bc.a / B - bc.a * float(np.linalg.norm(y)) ** bc.alpha

    def J2(self, tau):
        # fixed Gauss-Legendre inside one sample interval; the integrand is smooth there
        k = self.interp.interval(tau)
        t0 = self.interp.t[k]
        if tau == t0:
            return self.J2_nodes[k]
        half = 0.5 * (tau - t0)
        mid = t0 + half
        acc = sum(w * self._h(mid + half * x, k) for x, w in zip(_GL_X, _GL_W))
        return self.J2_nodes[k] + half * acc

    def eJ(self, tau):
        bc = self.bc
        return (math.exp(math.log1p(self.r0a * bc.a * bc.alpha * (tau - bc.t0)) / bc.alpha)
                * math.exp(-self.J2(tau)))

    def eta(self, t):
        """``int_{t0}^t e^{J} f`` split at trajectory nodes."""
        bc = self.bc
        T = self.interp.t
        total = np.zeros(bc.n)
        err = 0.0
        lo = bc.t0
        for k in range(len(T) - 1):
            if lo >= t:
                break
            hi = min(T[k + 1], t)
            if hi <= lo:
                continue

            def g(tau, k=k):
                y = self.interp(tau, k)
                return self.eJ(tau) * np.asarray(bc.forcing(tau, y), dtype=float)

            v, e = adaptive_simpson(g, lo, hi, self.tol / len(T))
            total += v
            err += e
            lo = hi
        return total, err


def forced_oracle(bc: BasicCase, numeric_y: Trajectory, t: float,
                  tol: float = SIMPSON_TOL) -> np.ndarray:
    """Reconstruct ``y(t)`` from the variation-of-constants representation.

    ``numeric_y`` supplies ``|y(tau)|`` on ``[t0, t]`` for the ``J2`` quadrature.
    Without forcing this reduces to :func:`exact_unforced` (``J2`` is then a
    quadrature of the interpolation error only).
    """
    t = float(t)
    if t < bc.t0:
        raise InvalidArgumentError(f"t must be >= t0 = {bc.t0}")
    if not bc.t0 <= t <= numeric_y.t[-1] * (1 + 1e-14) + 1e-300:
        raise InvalidArgumentError(f"t = {t} lies outside the trajectory")
    rep = _Representation(bc, numeric_y, tol)
    j2 = rep.J2(t)
    if bc.forcing is None:
        eta = np.zeros(bc.n)
    else:
        eta, _ = rep.eta(t)
    denom = math.exp(J1(bc, t))
    return math.exp(j2) * (bc.y0 + eta) / denom


def forced_xi_star(bc: BasicCase, numeric_y: Trajectory, tol: float = SIMPSON_TOL) -> np.ndarray:
    """``xi* = e^{J*} (y0 + eta*) / (|y0| (a alpha)^(1/alpha))`` with ``J*``, ``eta*``
    taken as the quadratures up to the last trajectory time."""
    rep = _Representation(bc, numeric_y, tol)
    t_end = float(numeric_y.t[-1])
    j_star = rep.J2(t_end)
    eta = rep.eta(t_end)[0] if bc.forcing is not None else np.zeros(bc.n)
    return (math.exp(j_star) * (bc.y0 + eta)
            / (np.linalg.norm(bc.y0) * (bc.a * bc.alpha) ** (1.0 / bc.alpha)))
