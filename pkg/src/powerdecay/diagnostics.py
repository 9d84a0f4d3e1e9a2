"""Asymptotic extraction and identity checks on trajectories.

Extracted objects: the limit ``Lambda_hat`` of the Dirichlet quotient, the
profile ``xi_hat = lim t^(1/alpha) y(t)``, the decay exponent ``p_hat`` and the
excess rate ``eps_hat``.  All fits are ordinary least squares in log-log
coordinates over a tail window of log-time.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .errors import (
    AmbiguousLimitError,
    InsufficientDataError,
    InvalidArgumentError,
    NonConvergenceError,
    RateIndeterminateError,
)
from .homogeneous import SphereBounds, sphere_bounds
from .integrate import Trajectory
from .spectral import SpectralMatrix
from .system import SystemSpec

__all__ = [
    "AnalysisConfig",
    "LogLogFit",
    "LimitEigenvalue",
    "XiEstimate",
    "EigenRelation",
    "ProjectionDecay",
    "EpsilonEstimate",
    "AsymptoticReport",
    "dirichlet_quotient",
    "estimate_decay_exponent",
    "extract_limit_eigenvalue",
    "extract_xi",
    "verify_eigen_relation",
    "projection_decay",
    "estimate_epsilon",
    "quotient_derivative_check",
    "analyze",
]

EPS = np.finfo(float).eps
UNDERFLOW = 1e-300


@dataclass(frozen=True)
class AnalysisConfig:
    window: float = 0.4              # tail fraction of log-time
    min_samples: int = 30
    min_decades: float = 3.0
    proj_decades: float = 2.0
    richardson_lambda: bool = False
    lambda_tol: float = 1e-4
    identity_tol: float = 1e-3
    bounds_slack: float = 1e-3
    p_tol: float = 0.01              # relative to 1/alpha
    ratio_tol: float = 0.2           # agreement of two-point rate estimates
    bounds_samples: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.window <= 1:
            raise InvalidArgumentError("window must lie in (0, 1]")
        if self.min_samples < 3:
            raise InvalidArgumentError("min_samples must be at least 3")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class LogLogFit:
    slope: float
    intercept: float
    r2: float
    stderr: float
    slope_upper95: float
    n: int
    t_lo: float
    t_hi: float


def _fit(t, v) -> LogLogFit:
    x, yv = np.log(t), np.log(v)
    n = len(x)
    res = stats.linregress(x, yv)
    q = stats.t.ppf(0.975, n - 2) if n > 2 else np.inf
    r2 = float(res.rvalue ** 2) if np.isfinite(res.rvalue) else 1.0
    return LogLogFit(float(res.slope), float(res.intercept), r2, float(res.stderr),
                     float(res.slope + q * res.stderr), n, float(t[0]), float(t[-1]))


def dirichlet_quotient(M: SpectralMatrix, y) -> float:
    """``y.Ay / |y|^2``; for non-symmetric ``A`` evaluated on ``z = S y`` with ``diag(Lambda)``."""
    y = np.asarray(y, dtype=float)
    if y.shape != (M.n,):
        raise InvalidArgumentError(f"y must have shape ({M.n},)")
    if not np.all(np.isfinite(y)):
        raise InvalidArgumentError("y is not finite")
    nn = float(y @ y)
    if nn == 0.0:
        raise InvalidArgumentError("the quotient is undefined at y = 0")
    if M.symmetric:
        return float(y @ M.A @ y) / nn
    z = M.S @ y
    return float(z @ (M.eigenvalues * z)) / float(z @ z)


def _positive(traj: Trajectory):
    k = np.nonzero(traj.t > 0)[0]
    if k.size == 0:
        raise InsufficientDataError("no samples at positive times")
    return k


def _tail_indices(traj: Trajectory, window: float, min_samples: int) -> np.ndarray:
    k = _positive(traj)
    lt = np.log(traj.t[k])
    cut = lt[-1] - window * (lt[-1] - lt[0])
    idx = k[lt >= cut]
    if idx.size < min_samples:
        raise InsufficientDataError(
            f"tail window holds {idx.size} samples, need {min_samples}")
    return idx


def _span_decades(traj: Trajectory) -> float:
    k = _positive(traj)
    return math.log10(traj.t[k[-1]] / traj.t[k[0]])


def estimate_decay_exponent(traj: Trajectory, window: float = 0.4,
                            min_samples: int = 30, min_decades: float = 3.0):
    """``(p_hat, r2, fit)`` with ``p_hat = -slope`` of ``log|y|`` against ``log t``."""
    span = _span_decades(traj)
    if span < min_decades:
        raise InsufficientDataError(
            f"trajectory spans {span:.2f} decades of t, need {min_decades}")
    idx = _tail_indices(traj, window, min_samples)
    f = _fit(traj.t[idx], traj.y_norm[idx])
    return -f.slope, f.r2, f


@dataclass(frozen=True)
class LimitEigenvalue:
    Lambda_hat: float
    matched: float
    gap: float
    mu: float
    index: int


def _aitken(seq_v):
    """Two-point elimination of a power-law correction on a geometric grid.

    Returns ``(limit, q)`` or ``None`` when the differences do not allow it.
    """
    v0, v1, v2 = seq_v
    d1, d2 = v2 - v1, v1 - v0
    if d2 == 0 or d1 == 0:
        return None
    q = d1 / d2
    if not 0 < q < 1:
        return None
    return v2 + d1 * q / (1 - q), q


def _geometric_triples(traj: Trajectory, count: int):
    """Index tuples ``(k-count*m, ..., k-m, k)`` of on-grid samples with equal ratios.

    ``m`` is chosen so that consecutive entries are about a factor ``e`` apart.
    """
    g = np.nonzero(traj.on_grid & (traj.t >= 1.0))[0]
    if g.size < 3:
        return None, None
    r = float(np.exp(np.median(np.diff(np.log(traj.t[g])))))
    m = max(1, int(round(1.0 / math.log(r))))
    while m > 1 and count * m >= g.size:
        m //= 2
    if count * m >= g.size:
        return None, None
    picks = [g[-1 - j * m] for j in range(count, -1, -1)]
    lr = np.diff(np.log(traj.t[picks]))
    if np.max(np.abs(lr - lr[0])) > 1e-9 * max(1.0, abs(lr[0])):
        return None, None
    return picks, float(math.exp(lr[0]))


def extract_limit_eigenvalue(traj: Trajectory, M: SpectralMatrix,
                             richardson: bool = False) -> LimitEigenvalue:
    """Match the final quotient value (optionally extrapolated) to a distinct eigenvalue."""
    if len(traj) == 0:
        raise InsufficientDataError("empty trajectory")
    lam = float(traj.lam[-1])
    if richardson:
        picks, _ = _geometric_triples(traj, 2)
        if picks is not None:
            out = _aitken([float(traj.lam[k]) for k in picks])
            if out is not None:
                lam = out[0]
    k = int(np.argmin(np.abs(M.distinct - lam)))
    gap = abs(lam - float(M.distinct[k]))
    mu = M.mu
    if M.d > 1 and gap > 0.5 * mu:
        raise AmbiguousLimitError(
            f"quotient {lam:.6g} is {gap:.3g} from the nearest eigenvalue {M.distinct[k]:.6g}, "
            f"more than half the minimal spacing {mu:.3g}",
            Lambda_hat=lam, nearest=float(M.distinct[k]), gap=gap)
    return LimitEigenvalue(lam, float(M.distinct[k]), gap, mu, k)


@dataclass(frozen=True)
class XiEstimate:
    xi_hat: np.ndarray
    w_final: np.ndarray
    method: str                      # "richardson", "converged" or "final"
    confident: bool
    eps_estimates: tuple = ()        # per component (eps_1, eps_2) two-point rate estimates
    t_final: float = 0.0


def _oscillation_check(traj: Trajectory, idx, noise: float):
    W = traj.w[idx]
    scale = float(np.max(np.linalg.norm(W, axis=1)))
    dW = np.diff(W, axis=0)
    for i in range(W.shape[1]):
        d = dW[:, i]
        d = d[np.abs(d) > noise * scale]
        changes = int(np.count_nonzero(np.diff(np.sign(d)) != 0))
        if changes > 1:
            raise NonConvergenceError(
                f"component {i + 1} of w = t^(1/alpha) y changes direction {changes} times in the tail")


def extract_xi(traj: Trajectory, alpha: float | None = None, window: float = 0.4,
               ratio_tol: float = 0.2, noise: float = 1e-9, min_samples: int = 30) -> XiEstimate:
    """Extrapolate ``w(t) = t^(1/alpha) y(t)`` to its limit.

    Each component is treated as ``xi_i + c_i t^(-eps_i)`` and the correction
    is eliminated from three on-grid samples a factor ~e apart.  A fourth
    sample gives a second estimate of ``eps_i``; if the two disagree by more
    than ``ratio_tol`` the final ``w`` is used and the estimate is flagged as
    low-confidence.  Components whose increments stay below ``noise * |w|``
    are taken as converged.
    """
    if alpha is not None and abs(alpha - traj.alpha) > 1e-12 * max(1.0, alpha):
        raise InvalidArgumentError(f"alpha = {alpha} does not match the trajectory ({traj.alpha})")
    idx = _tail_indices(traj, window, min_samples)
    _oscillation_check(traj, idx, noise)
    W = traj.w
    w_final = W[-1].copy()
    picks, rho = _geometric_triples(traj, 3)
    if picks is None:
        return XiEstimate(w_final, w_final, "final", False, (), float(traj.t[-1]))
    scale = float(np.linalg.norm(W[picks[-1]]))
    xi = W[picks[-1]].copy()
    confident, any_extrap = True, False
    eps_est = []
    for i in range(traj.n):
        v = [float(W[k, i]) for k in picks]
        d = np.diff(v)
        if np.all(np.abs(d) <= noise * scale):
            # increments at integration-noise level: nothing left to extrapolate
            eps_est.append((math.inf, math.inf))
            xi[i] = v[-1]
            continue
        new = _aitken(v[1:])
        old = _aitken(v[:3])
        if new is None or old is None:
            # a component that is not yet monotone in the tail
            confident = False
            xi[i] = w_final[i]
            eps_est.append((math.nan, math.nan))
            continue
        e1 = -math.log(new[1]) / math.log(rho)
        e2 = -math.log(old[1]) / math.log(rho)
        eps_est.append((e1, e2))
        if abs(e1 - e2) > ratio_tol * max(abs(e1), abs(e2)):
            confident = False
            xi[i] = w_final[i]
        else:
            xi[i] = new[0]
            any_extrap = True
    if not confident:
        return XiEstimate(w_final, w_final, "final", False, tuple(eps_est), float(traj.t[-1]))
    method = "richardson" if any_extrap else "converged"
    return XiEstimate(xi, w_final, method, True, tuple(eps_est), float(traj.t[picks[-1]]))


@dataclass(frozen=True)
class EigenRelation:
    residual_vector: float           # |H(xi) A xi - xi/alpha| / |xi|
    residual_scalar: float           # |alpha Lambda H(xi) - 1|
    residual_eigvec: float           # |A xi - Lambda xi| / (|A| |xi|)
    Lambda: float
    Lambda_prime: float              # 1 / (alpha H(xi))
    xi_norm: float
    xi_lo: float
    xi_hi: float
    bounds_ok: bool


def verify_eigen_relation(xi_hat, sys: SystemSpec, Lambda_hat: float | None = None,
                          bounds: SphereBounds | None = None, slack: float = 1e-3) -> EigenRelation:
    """Residuals of ``H(xi) A xi = xi/alpha`` and ``alpha Lambda H(xi) = 1`` plus the
    norm window ``(alpha c2 Lambda_n)^(-1/alpha) <= |xi| <= (alpha c1 Lambda_1)^(-1/alpha)``.

    Without ``Lambda_hat`` the eigenvalue implied by ``xi`` itself,
    ``1/(alpha H(xi))``, is used.
    """
    xi = np.asarray(xi_hat, dtype=float)
    if xi.shape != (sys.n,):
        raise InvalidArgumentError(f"xi must have shape ({sys.n},)")
    nx = float(np.linalg.norm(xi))
    if nx == 0:
        raise InvalidArgumentError("xi must be nonzero")
    a = sys.alpha
    Hx = float(sys.H(xi))
    A = sys.A.A
    Axi = A @ xi
    lam_p = 1.0 / (a * Hx)
    lam = lam_p if Lambda_hat is None else float(Lambda_hat)
    res_v = float(np.linalg.norm(Hx * Axi - xi / a)) / nx
    res_s = abs(a * lam * Hx - 1.0)
    res_e = float(np.linalg.norm(Axi - lam * xi)) / (sys.A.norm * nx)
    b = bounds or sys.bounds or sphere_bounds(sys.H, 10_000, 0)
    lo = (a * b.c2 * float(sys.A.eigenvalues[-1])) ** (-1.0 / a)
    hi = (a * b.c1 * float(sys.A.eigenvalues[0])) ** (-1.0 / a)
    ok = lo - slack <= nx <= hi + slack
    return EigenRelation(res_v, res_s, res_e, lam, lam_p, nx, lo, hi, bool(ok))


@dataclass(frozen=True)
class ProjectionDecay:
    Lambda: float
    slopes: dict                     # eigenvalue -> LogLogFit or None (underflow)
    underflow: dict                  # eigenvalue -> bool
    vstar_fit: LogLogFit | None
    complement_fit: LogLogFit | None
    angle: float | None              # angle between final v and xi_hat/|xi_hat| (rad)

    def slope(self, lam) -> float:
        for k, f in self.slopes.items():
            if abs(k - lam) <= 1e-12 * max(1.0, abs(lam)):
                return -math.inf if f is None else f.slope
        raise InvalidArgumentError(f"no projection slope for {lam}")


def _last_decades(traj: Trajectory, decades: float, min_samples: int = 3):
    k = _positive(traj)
    t_hi = traj.t[k[-1]]
    idx = k[traj.t[k] >= t_hi / 10 ** decades]
    if idx.size < min_samples:
        raise InsufficientDataError(f"only {idx.size} samples in the last {decades} decades")
    return idx


def _fit_or_underflow(t, v):
    bad = ~(v > UNDERFLOW)
    if np.all(bad):
        return None, True
    if np.any(bad):
        # fit the part before the underflow
        first = int(np.argmax(bad))
        if first < 3:
            return None, True
        return _fit(t[:first], v[:first]), True
    return _fit(t, v), False


def projection_decay(traj: Trajectory, M: SpectralMatrix, Lambda_hat: float,
                     xi_hat=None, decades: float = 2.0) -> ProjectionDecay:
    """Log-log slopes of ``|R_j v(t)|`` for every eigenvalue other than ``Lambda_hat``.

    With ``xi_hat`` also fits ``|R_Lambda v - xi_hat/|xi_hat||`` and reports the
    final angle between ``v`` and ``xi_hat``; the slope of ``|(I - R_Lambda) y|``
    is always reported (to compare with ``-1/alpha - eps``).  Norms that underflow
    count as converged (slope ``-inf``).
    """
    j = M.index_of(Lambda_hat)
    idx = _last_decades(traj, decades)
    t = traj.t[idx]
    slopes, under = {}, {}
    for i, lam in enumerate(M.distinct):
        if i == j:
            continue
        fit, uf = _fit_or_underflow(t, traj.proj_norms[idx, i])
        slopes[float(lam)] = fit
        under[float(lam)] = uf
    R = M.projections[j]
    Y = traj.y[idx]
    comp = np.linalg.norm(Y - Y @ R.T, axis=1)
    comp_fit, _ = _fit_or_underflow(t, comp)
    vstar_fit, angle = None, None
    if xi_hat is not None:
        xi = np.asarray(xi_hat, dtype=float)
        vs = xi / np.linalg.norm(xi)
        V = traj.v[idx]
        dev = np.linalg.norm(V @ R.T - vs, axis=1)
        vstar_fit, _ = _fit_or_underflow(t, dev)
        c = float(np.clip(traj.v[-1] @ vs, -1.0, 1.0))
        angle = float(np.arctan2(np.linalg.norm(traj.v[-1] - c * vs), c))
    return ProjectionDecay(float(M.distinct[j]), slopes, under, vstar_fit, comp_fit, angle)


@dataclass(frozen=True)
class EpsilonEstimate:
    eps_hat: float
    fit: LogLogFit
    floor: float | None              # delta/alpha when delta is declared


def estimate_epsilon(traj: Trajectory, xi_hat, alpha: float | None = None, window: float = 0.4,
                     min_samples: int = 30, delta: float | None = None) -> EpsilonEstimate:
    """Excess rate from the slope of ``log|y - xi_hat t^(-1/alpha)|`` plus ``1/alpha``.

    Samples whose residual sits within ``100 eps |xi_hat|`` (relative to
    ``t^(-1/alpha)``) are round-off; if too few remain the rate is
    indeterminate and only a lower bound is returned through the error.
    """
    a = traj.alpha if alpha is None else float(alpha)
    xi = np.asarray(xi_hat, dtype=float)
    idx = _tail_indices(traj, window, 3)
    floor = 100 * EPS * float(np.linalg.norm(xi))
    res_w = np.linalg.norm(traj.w[idx] - xi, axis=1)
    keep = res_w > floor
    if np.count_nonzero(keep) < min_samples:
        # largest residual seen before the window bounds the observable rate
        k = _positive(traj)
        res_all = np.linalg.norm(traj.w[k] - xi, axis=1)
        above = np.nonzero(res_all > floor)[0]
        lb = 0.0
        if above.size:
            i0 = int(above[np.argmax(res_all[above])])
            t_a, t_b = traj.t[k[i0]], traj.t[idx[-1]]
            if t_b > t_a:
                lb = max(0.0, math.log(res_all[i0] / floor) / math.log(t_b / t_a))
        raise RateIndeterminateError(
            f"residual |w - xi_hat| is at round-off level ({floor:.2e}) across the window",
            lower_bound=lb)
    sel = idx[keep]
    tt = traj.t[sel]
    res_y = res_w[keep] * tt ** (-1.0 / a)
    f = _fit(tt, res_y)
    floor_rate = None if delta is None else float(delta) / a
    return EpsilonEstimate(-(f.slope + 1.0 / a), f, floor_rate)


def quotient_derivative_check(traj: Trajectory, sys: SystemSpec, threshold: float = 1e-12):
    """Compare a finite-difference ``d lambda/dt`` with ``-2 H(y) |A v - lambda v|^2``.

    Uses the three-point formula on the (non-uniform) sample grid at interior
    samples; returns ``(t, fd, exact, rel_err)`` restricted to samples where
    ``|exact| > threshold``.
    """
    if not sys.A.symmetric:
        raise InvalidArgumentError("the quotient equation is stated for symmetric A")
    if traj.chart != "y":
        raise InvalidArgumentError("needs a trajectory in the y chart")
    t, lam = traj.t, traj.lam
    h1 = t[1:-1] - t[:-2]
    h2 = t[2:] - t[1:-1]
    fd = (-h2 / (h1 * (h1 + h2)) * lam[:-2]
          + (h2 - h1) / (h1 * h2) * lam[1:-1]
          + h1 / (h2 * (h1 + h2)) * lam[2:])
    Y = traj.y[1:-1]
    V = traj.v[1:-1]
    Hy = sys.H.node(Y)
    AV = V @ sys.A.A.T
    r = AV - lam[1:-1, None] * V
    exact = -2.0 * Hy * np.einsum("ij,ij->i", r, r)
    keep = np.abs(exact) > threshold
    rel = np.abs(fd[keep] - exact[keep]) / np.abs(exact[keep])
    return t[1:-1][keep], fd[keep], exact[keep], rel


@dataclass
class AsymptoticReport:
    Lambda_hat: float | None = None
    matched_eigenvalue: float | None = None
    Lambda_gap: float | None = None
    Lambda_prime: float | None = None
    xi_hat: list | None = None
    xi_norm: float | None = None
    xi_method: str | None = None
    xi_confident: bool | None = None
    p_hat: float | None = None
    p_fit_r2: float | None = None
    eps_hat: float | None = None
    eps_lower_bound: float | None = None
    eps_floor: float | None = None
    residual_eigen_relation: float | None = None
    residual_scalar_identity: float | None = None
    residual_eigenvector: float | None = None
    xi_norm_bounds: list | None = None
    xi_norm_bounds_ok: bool | None = None
    proj_decay_slopes: dict = field(default_factory=dict)
    proj_decay_r2: dict = field(default_factory=dict)
    proj_decay_upper95: dict = field(default_factory=dict)
    complement_slope: float | None = None
    vstar_slope: float | None = None
    angle_v_xi: float | None = None
    tail_window: list | None = None
    alpha: float | None = None
    checks: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(self.checks.values()) and not self.errors

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return _jsonable(d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=True) + "\n"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def analyze(traj: Trajectory, sys: SystemSpec, cfg: AnalysisConfig | None = None) -> AsymptoticReport:
    """Run every extractor and identity check; failures are recorded, not raised."""
    cfg = cfg or AnalysisConfig()
    rep = AsymptoticReport(alpha=sys.alpha, config=cfg.to_dict())
    a = sys.alpha
    M = sys.A
    bounds = sys.bounds or sphere_bounds(sys.H, cfg.bounds_samples, cfg.seed)

    try:
        p, r2, fit = estimate_decay_exponent(traj, cfg.window, cfg.min_samples, cfg.min_decades)
        rep.p_hat, rep.p_fit_r2 = p, r2
        rep.tail_window = [fit.t_lo, fit.t_hi]
        rep.checks["decay_exponent"] = abs(p - 1.0 / a) <= cfg.p_tol / a
    except InsufficientDataError as exc:
        rep.errors["decay_exponent"] = str(exc)

    lim = None
    try:
        lim = extract_limit_eigenvalue(traj, M, cfg.richardson_lambda)
        rep.Lambda_hat, rep.matched_eigenvalue, rep.Lambda_gap = lim.Lambda_hat, lim.matched, lim.gap
        rep.checks["limit_eigenvalue"] = lim.gap <= cfg.lambda_tol
    except AmbiguousLimitError as exc:
        rep.Lambda_hat, rep.Lambda_gap = exc.Lambda_hat, exc.gap
        rep.errors["limit_eigenvalue"] = str(exc)

    xe = None
    if "decay_exponent" not in rep.errors:
        try:
            xe = extract_xi(traj, None, cfg.window, cfg.ratio_tol, min_samples=cfg.min_samples)
            rep.xi_hat = xe.xi_hat.tolist()
            rep.xi_norm = float(np.linalg.norm(xe.xi_hat))
            rep.xi_method, rep.xi_confident = xe.method, xe.confident
        except (NonConvergenceError, InsufficientDataError) as exc:
            rep.errors["xi"] = str(exc)

    if xe is not None:
        er = verify_eigen_relation(xe.xi_hat, sys, rep.Lambda_hat, bounds, cfg.bounds_slack)
        rep.Lambda_prime = er.Lambda_prime
        rep.residual_eigen_relation = er.residual_vector
        rep.residual_scalar_identity = er.residual_scalar
        rep.residual_eigenvector = er.residual_eigvec
        rep.xi_norm_bounds = [er.xi_lo, er.xi_hi]
        rep.xi_norm_bounds_ok = er.bounds_ok
        tol = cfg.identity_tol
        rep.checks["eigen_relation"] = er.residual_vector <= tol / a
        rep.checks["xi_norm_bounds"] = er.bounds_ok
        if rep.Lambda_hat is not None:
            rep.checks["scalar_identity"] = er.residual_scalar <= tol
            rep.checks["eigenvector"] = er.residual_eigvec <= tol
            rep.checks["Lambda_consistency"] = (
                abs(rep.Lambda_hat - er.Lambda_prime) <= tol * abs(rep.Lambda_hat))
        delta = None if sys.G.is_zero else sys.G.delta
        rep.eps_floor = None if delta is None else delta / a
        try:
            ee = estimate_epsilon(traj, xe.xi_hat, a, cfg.window, cfg.min_samples, delta)
            rep.eps_hat = ee.eps_hat
        except RateIndeterminateError as exc:
            rep.eps_lower_bound = exc.lower_bound
        except InsufficientDataError as exc:
            rep.errors["epsilon"] = str(exc)

    if lim is not None:
        try:
            pd = projection_decay(traj, M, lim.matched, None if xe is None else xe.xi_hat,
                                  cfg.proj_decades)
            for lam, f in pd.slopes.items():
                key = repr(lam)
                rep.proj_decay_slopes[key] = -math.inf if f is None else f.slope
                rep.proj_decay_r2[key] = None if f is None else f.r2
                rep.proj_decay_upper95[key] = -math.inf if f is None else f.slope_upper95
            rep.complement_slope = None if pd.complement_fit is None else pd.complement_fit.slope
            rep.vstar_slope = None if pd.vstar_fit is None else pd.vstar_fit.slope
            rep.angle_v_xi = pd.angle
            if pd.slopes:
                rep.checks["projection_decay"] = all(
                    (f is None) or f.slope < 0 for f in pd.slopes.values())
        except InsufficientDataError as exc:
            rep.errors["projection_decay"] = str(exc)
    return rep
