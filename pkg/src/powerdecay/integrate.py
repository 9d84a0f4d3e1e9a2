"""Long-horizon integration in linear-time, log-time and rescaled charts.

For ``t >= t_switch`` the state is advanced in ``tau = ln t`` with
``dy/dtau = t * rhs(t, y)``.  Solutions decay like ``t^(-1/alpha)``, so in this
chart the dynamics look like ``dy/dtau ~ -y/alpha`` and the step count grows
only with ``ln t_end``.  The rescaled chart integrates ``w = t^(1/alpha) y``
whose limit is a fixed point.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import (
    DivergenceError,
    IntegrationError,
    InvalidArgumentError,
    StateError,
    StiffnessError,
    TrivialSolutionError,
)
from .homogeneous import sphere_bounds
from .system import SystemSpec

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "integrate",
    "integrate_rescaled",
    "continue_trajectory",
    "sample_grid",
]


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-100
    t_switch: float = 10.0
    max_steps: int = 1_000_000
    sample_ratio: float = 1.05
    safety: float = 0.9
    envelope_slack: float = 1e3
    stall_tol: float = 1e-8
    guard: bool = True

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise InvalidArgumentError("tolerances must be positive")
        if not self.t_switch >= 1:
            raise InvalidArgumentError("t_switch must be >= 1")
        if not self.sample_ratio > 1:
            raise InvalidArgumentError("sample_ratio must exceed 1")
        if self.max_steps < 1:
            raise InvalidArgumentError("max_steps must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


# Dormand-Prince 5(4)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
_ORDER = 5
_K_I = 0.7 / _ORDER
_K_P = 0.4 / _ORDER


@dataclass(eq=False)
class Trajectory:
    """Time-ordered samples of a solution together with quotient diagnostics.

    ``chart`` is ``"y"`` for ordinary trajectories and ``"w"`` when ``state``
    holds ``w = t^(1/alpha) y`` from :func:`integrate_rescaled`.
    """

    t: np.ndarray
    state: np.ndarray
    on_grid: np.ndarray
    chart: str
    alpha: float
    norm: np.ndarray
    lam: np.ndarray
    v: np.ndarray
    proj_norms: np.ndarray
    distinct: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    @classmethod
    def from_samples(cls, sys: SystemSpec, t, y, on_grid=None, chart: str = "y",
                     meta: dict | None = None) -> "Trajectory":
        """Wrap externally produced samples (e.g. a closed-form solution)."""
        t = np.asarray(t, dtype=float)
        X = np.atleast_2d(np.asarray(y, dtype=float))
        if X.shape != (t.size, sys.n):
            raise InvalidArgumentError(f"expected samples of shape ({t.size}, {sys.n}), got {X.shape}")
        if t.size < 2 or np.any(np.diff(t) <= 0):
            raise InvalidArgumentError("sample times must be strictly increasing")
        if chart not in ("y", "w"):
            raise InvalidArgumentError("chart must be 'y' or 'w'")
        grid = np.ones(t.size, dtype=bool) if on_grid is None else np.asarray(on_grid, dtype=bool)
        m = {"status": "ok", "source": "samples", "t0": float(t[0]), "chart": chart}
        m.update(meta or {})
        return _make_traj(sys, t, X, grid, chart, m)

    @property
    def n(self) -> int:
        return self.state.shape[1]

    @property
    def y(self) -> np.ndarray:
        if self.chart == "y":
            return self.state
        return self.state * (self.t ** (-1.0 / self.alpha))[:, None]

    @property
    def w(self) -> np.ndarray:
        if self.chart == "w":
            return self.state
        return self.state * (self.t ** (1.0 / self.alpha))[:, None]

    @property
    def y_norm(self) -> np.ndarray:
        if self.chart == "y":
            return self.norm
        return self.norm * self.t ** (-1.0 / self.alpha)

    def header(self) -> list[str]:
        s = self.chart
        return (["t"] + [f"{s}_{i + 1}" for i in range(self.n)] + ["norm", "lambda"]
                + [f"v_{i + 1}" for i in range(self.n)]
                + [f"projnorm_{j + 1}" for j in range(self.proj_norms.shape[1])])

    def to_csv(self, path=None) -> str:
        """CSV with 17 significant digits; returns the text, writes it if ``path`` is given."""
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(self.header())
        for k in range(len(self.t)):
            row = [self.t[k], *self.state[k], self.norm[k], self.lam[k], *self.v[k], *self.proj_norms[k]]
            wr.writerow([format(float(x), ".17g") for x in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def _on_grid(t0, t, ratio):
    if t <= 1.0:
        k = (t - t0) / (ratio - 1.0)
    else:
        k = math.log(t / max(t0, 1.0)) / math.log(ratio)
    return abs(k - round(k)) < 1e-9


def sample_grid(t0: float, t_end: float, ratio: float) -> list[float]:
    """Output times in ``(t0, t_end]``: geometric above 1 (anchored at ``max(t0, 1)``),
    uniform with spacing ``ratio - 1`` below 1; ``t_end`` is always the last entry."""
    out = []
    if t0 < 1.0:
        step = ratio - 1.0
        j = 1
        while t0 + j * step < min(1.0, t_end):
            out.append(t0 + j * step)
            j += 1
        anchor, k = 1.0, 0
    else:
        anchor, k = t0, 1
    lr = math.log(ratio)
    la = math.log(anchor)
    while True:
        tk = math.exp(la + k * lr)
        if tk >= t_end * (1 - 1e-13):
            break
        if tk > t0:
            out.append(tk)
        k += 1
    out.append(float(t_end))
    return out


class _Envelope:
    """Two-sided ``(1+t)^(-1/alpha)``-type bounds widened by a slack factor."""

    def __init__(self, sys: SystemSpec, t0: float, y0: np.ndarray, slack: float):
        M = sys.A
        if M.symmetric and sys.bounds is not None:
            c1, c2 = sys.bounds.c1, sys.bounds.c2
        else:
            Ht = sys.H if M.symmetric else sys.H.transformed(M.S_inv)
            b = sphere_bounds(Ht, 4000, 0)
            c1, c2 = b.c1, b.c2
        self.alpha = sys.alpha
        self.a1 = 0.5 * c1 * M.eigenvalues[0]
        self.a2 = 2.0 * c2 * M.eigenvalues[-1]
        self.sn = float(np.linalg.norm(M.S, 2))
        self.sin = float(np.linalg.norm(M.S_inv, 2))
        self.t0 = t0
        self.z0 = float(np.linalg.norm(M.S @ y0))
        self.slack = slack

    def bounds(self, t: float):
        a, dt = self.alpha, max(t - self.t0, 0.0)
        base = self.z0 ** (-a)
        lo = (base + a * self.a2 * dt) ** (-1.0 / a) / self.sn
        hi = (base + a * self.a1 * dt) ** (-1.0 / a) * self.sin
        return lo / self.slack, hi * self.slack


class _Stepper:
    """Adaptive Dormand-Prince driver for ``x' = f(s, x)`` landing exactly on targets."""

    def __init__(self, f, cfg: IntegratorConfig, counters: dict, h=None, err_prev=1.0):
        self.f = f
        self.cfg = cfg
        self.h = h
        self.err_prev = err_prev
        self.counters = counters
        self.s_last = None
        self.x_last = None

    def t_last(self, mode):
        return self.s_last if mode == "lin" else math.exp(self.s_last)

    def _initial_h(self, s, x, fx, s_end):
        sc = self.cfg.abs_tol + self.cfg.rel_tol * np.max(np.abs(x))
        d0 = np.sqrt(np.mean((x / sc) ** 2))
        d1 = np.sqrt(np.mean((fx / sc) ** 2))
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        h0 = min(h0, abs(s_end - s))
        f1 = self.f(s + h0, x + h0 * fx)
        d2 = np.sqrt(np.mean(((f1 - fx) / sc) ** 2)) / h0
        if max(d1, d2) <= 1e-15:
            h1 = max(1e-6, h0 * 1e-3)
        else:
            h1 = (0.01 / max(d1, d2)) ** (1.0 / _ORDER)
        return min(100 * h0, h1, abs(s_end - s))

    def advance(self, s, x, target, check):
        """Step from ``s`` to exactly ``target``; ``check(s, x)`` runs after each accepted step."""
        cfg, cnt = self.cfg, self.counters
        fx = self.f(s, x)
        if self.h is None:
            self.h = self._initial_h(s, x, fx, target)
        while s < target:
            if cnt["accepted"] + cnt["rejected"] >= cfg.max_steps:
                raise StiffnessError(f"max_steps = {cfg.max_steps} exhausted at s = {s:.6g}")
            h = self.h
            clipped = False
            if s + h >= target - 1e-14 * max(1.0, abs(target)):
                h = target - s
                clipped = True
            if h <= 1e-14 * max(1.0, abs(s)):
                raise StiffnessError(f"step size underflow (h = {h:.3e}) at s = {s:.6g}")
            k = [fx]
            for i in range(1, 6):
                xi = x.copy()
                for j, aij in enumerate(_A[i]):
                    if aij:
                        xi += (h * aij) * k[j]
                k.append(self.f(s + _C[i] * h, xi))
            xn = x.copy()
            for j, bj in enumerate(_B):
                if bj:
                    xn += (h * bj) * k[j]
            fn = self.f(s + h, xn)
            k.append(fn)
            errv = np.zeros_like(x)
            for j, ej in enumerate(_E):
                if ej:
                    errv += (h * ej) * k[j]
            sc = cfg.abs_tol + cfg.rel_tol * max(np.max(np.abs(x)), np.max(np.abs(xn)))
            err = float(np.sqrt(np.mean((errv / sc) ** 2)))
            if not (math.isfinite(err) and np.all(np.isfinite(xn))):
                cnt["rejected"] += 1
                self.h = 0.25 * h
                continue
            if err <= 1.0:
                err = max(err, 1e-10)
                fac = min(5.0, max(0.2, cfg.safety * err ** (-_K_I) * self.err_prev ** _K_P))
                # a step shortened to hit a target says nothing about the nominal size
                self.h = max(h * fac, self.h) if clipped else h * fac
                self.err_prev = err
                cnt["accepted"] += 1
                s = target if clipped else s + h
                x, fx = xn, fn
                self.s_last, self.x_last = s, x
                check(s, x)
            else:
                cnt["rejected"] += 1
                self.h = h * min(1.0, max(0.2, cfg.safety * err ** (-_K_I)))
        return s, x


def _derived(sys: SystemSpec, X: np.ndarray):
    M = sys.A
    nrm = np.linalg.norm(X, axis=1)
    V = X / nrm[:, None]
    if M.symmetric:
        lam = np.einsum("ij,jk,ik->i", V, M.A, V)
    else:
        # quotient of the diagonalized variable z = S y
        Z = X @ M.S.T
        lam = np.einsum("ij,j,ij->i", Z, M.eigenvalues, Z) / np.einsum("ij,ij->i", Z, Z)
    P = np.column_stack([np.linalg.norm(V @ R.T, axis=1) for R in M.projections])
    return nrm, lam, V, P


def _make_traj(sys, ts, xs, grid, chart, meta) -> Trajectory:
    X = np.array(xs, dtype=float)
    nrm, lam, V, P = _derived(sys, X)
    return Trajectory(np.array(ts, dtype=float), X, np.array(grid, dtype=bool), chart,
                      sys.alpha, nrm, lam, V, P, np.array(sys.A.distinct), meta)


def _check_y0(sys, y0):
    y0 = np.array(y0, dtype=float).ravel()
    if y0.shape != (sys.n,):
        raise InvalidArgumentError(f"y0 must have {sys.n} entries")
    if not np.all(np.isfinite(y0)):
        raise InvalidArgumentError("y0 is not finite")
    if not np.any(y0 != 0):
        raise InvalidArgumentError("y0 must be nonzero")
    return y0


def _run(sys, chart, t_start, x_start, targets, cfg, meta, prefix=None):
    """Advance through ``targets`` (pairs of output time and on-grid flag).

    ``meta`` carries the envelope anchor, step counters and the resumable
    controller state (``meta["resume"]``) between calls.
    """
    a = sys.alpha
    rhs = sys.rhs_unchecked

    def f_lin(s, x):
        return rhs(s, x)

    def f_log(s, x):
        t = math.exp(s)
        return t * rhs(t, x)

    def f_w(s, x):
        out = x / a - sys.H.node(x) * (sys.A.A @ x)
        if not sys.G.is_zero:
            out = out + math.exp(s * (1 + 1 / a)) * sys.G(math.exp(s), x * math.exp(-s / a))
        return out

    fns = {"lin": f_lin, "log": f_log, "w": f_w}
    if prefix is None:
        ts, xs, grid = [t_start], [x_start.copy()], [True]
    else:
        ts, xs, grid = prefix

    env = None
    if cfg.guard:
        t_anchor, y_anchor = meta["envelope_anchor"]
        env = _Envelope(sys, t_anchor, np.asarray(y_anchor), cfg.envelope_slack)

    def check(s, x, log):
        t = math.exp(s) if log else s
        nx = math.sqrt(float(x @ x))
        ny = nx if chart == "y" else nx * t ** (-1 / a)
        if not math.isfinite(ny):
            raise DivergenceError(f"non-finite state at t = {t:.6g}")
        if ny < 1e-290:
            raise TrivialSolutionError(f"state reached numeric zero at t = {t:.6g}")
        if env is not None:
            lo, hi = env.bounds(t)
            if not lo <= ny <= hi:
                raise DivergenceError(
                    f"|y| = {ny:.6g} left the decay envelope [{lo:.3g}, {hi:.3g}] at t = {t:.6g}")

    y_ref = float(np.linalg.norm(meta["envelope_anchor"][1]))
    counters = meta.setdefault("steps", {"accepted": 0, "rejected": 0})
    switch_times = meta.setdefault("chart_switch_times", [])
    resume = meta.get("resume")
    st, mode = None, None
    t, x = t_start, x_start.copy()
    try:
        for target, on_grid in targets:
            while t < target:
                want = "w" if chart == "w" else ("lin" if t < cfg.t_switch else "log")
                if want != mode:
                    if mode is not None:
                        switch_times.append(t)
                    mode = want
                    if resume and resume["mode"] == mode:
                        st = _Stepper(fns[mode], cfg, counters, resume["h"], resume["err_prev"])
                    else:
                        st = _Stepper(fns[mode], cfg, counters)
                    resume = None
                if mode == "lin":
                    stop = min(target, cfg.t_switch)
                    _, x = st.advance(t, x, stop, lambda s_, x_: check(s_, x_, False))
                else:
                    stop = target
                    _, x = st.advance(math.log(t), x, math.log(stop), lambda s_, x_: check(s_, x_, True))
                t = stop
            ts.append(target)
            xs.append(x.copy())
            grid.append(on_grid)
    except StiffnessError as exc:
        # a collapsing step while |y| grows is a blow-up, not stiffness
        x_last = st.x_last if st is not None and st.x_last is not None else x
        t_last = st.t_last(mode) if st is not None and st.x_last is not None else t
        ny = float(np.linalg.norm(x_last))
        if chart == "w":
            ny *= t_last ** (-1 / a)
        if ny > 10 * y_ref:
            exc = DivergenceError(f"finite-time blow-up suspected: |y| = {ny:.6g} at t = {t_last:.6g} "
                                  f"({exc})")
        meta["status"] = type(exc).__name__
        meta["error"] = str(exc)
        exc.trajectory = _make_traj(sys, ts, xs, grid, chart, meta)
        raise exc from None
    except IntegrationError as exc:
        meta["status"] = type(exc).__name__
        meta["error"] = str(exc)
        exc.trajectory = _make_traj(sys, ts, xs, grid, chart, meta)
        raise
    meta["status"] = "ok"
    if st is not None:
        meta["resume"] = {"mode": mode, "h": st.h, "err_prev": st.err_prev}
    return ts, xs, grid


def _targets(t0, t_end, ratio, extra=()):
    grid = sample_grid(t0, t_end, ratio)
    # t_end is on the grid only when it coincides with a geometric/uniform node
    pts = {tk: True for tk in grid[:-1]}
    pts[grid[-1]] = _on_grid(t0, t_end, ratio)
    for e in extra:
        if t0 < e < t_end:
            pts.setdefault(float(e), False)
    return sorted(pts.items())


def integrate(sys: SystemSpec, y0, t0: float, t_end: float, cfg: IntegratorConfig | None = None,
              extra_times=()) -> Trajectory:
    """Integrate ``y' = -H(y) A y + G(t, y)`` from ``(t0, y0)`` to ``t_end``.

    Samples land on a geometric grid (ratio ``cfg.sample_ratio``) plus any
    ``extra_times``.  Raises :class:`DivergenceError` when ``|y|`` leaves the
    widened decay envelope; the partial trajectory is attached to the error.
    """
    cfg = cfg or IntegratorConfig()
    y0 = _check_y0(sys, y0)
    t0, t_end = float(t0), float(t_end)
    if not t_end > t0:
        raise InvalidArgumentError(f"t_end = {t_end} must exceed t0 = {t0}")
    if t0 < sys.t_star:
        raise InvalidArgumentError(f"t0 = {t0} precedes the admissible start {sys.t_star}")
    meta = {"config": cfg.to_dict(), "t0": t0, "chart": "y",
            "envelope_anchor": (t0, y0.tolist())}
    targets = _targets(t0, t_end, cfg.sample_ratio, extra_times)
    ts, xs, grid = _run(sys, "y", t0, y0, targets, cfg, meta)
    return _finish(sys, ts, xs, grid, "y", meta)


def _finish(sys, ts, xs, grid, chart, meta) -> Trajectory:
    return _make_traj(sys, ts, xs, grid, chart, meta)


def integrate_rescaled(sys: SystemSpec, y0, t0: float, tau_end: float,
                       cfg: IntegratorConfig | None = None, extra_times=()) -> Trajectory:
    """Integrate ``w = t^(1/alpha) y`` in ``tau = ln t``.

    ``dw/dtau = w/alpha - H(w) A w + e^{tau (1 + 1/alpha)} G(e^tau, e^{-tau/alpha} w)``.
    ``meta["final_speed"]`` holds ``|dw/dtau|`` at ``tau_end``; ``meta["converged"]``
    compares it against ``cfg.stall_tol``.
    """
    cfg = cfg or IntegratorConfig()
    y0 = _check_y0(sys, y0)
    t0 = float(t0)
    if t0 < 1:
        raise InvalidArgumentError("the rescaled chart needs t0 >= 1")
    if t0 < sys.t_star:
        raise InvalidArgumentError(f"t0 = {t0} precedes the admissible start {sys.t_star}")
    t_end = math.exp(tau_end)
    if not t_end > t0:
        raise InvalidArgumentError("tau_end must exceed ln t0")
    a = sys.alpha
    w0 = y0 * t0 ** (1 / a)
    meta = {"config": cfg.to_dict(), "t0": t0, "chart": "w",
            "envelope_anchor": (t0, y0.tolist())}
    targets = _targets(t0, t_end, cfg.sample_ratio, extra_times)
    ts, xs, grid = _run(sys, "w", t0, w0, targets, cfg, meta)
    traj = _finish(sys, ts, xs, grid, "w", meta)
    _record_speed(sys, traj)
    return traj


def _record_speed(sys, traj):
    a = sys.alpha
    w = traj.state[-1]
    t = traj.t[-1]
    dw = w / a - sys.H.node(w) * (sys.A.A @ w)
    if not sys.G.is_zero:
        dw = dw + t ** (1 + 1 / a) * sys.G(t, w * t ** (-1 / a))
    speed = float(np.linalg.norm(dw))
    traj.meta["final_speed"] = speed
    traj.meta["converged"] = speed <= traj.meta["config"]["stall_tol"]


def continue_trajectory(traj: Trajectory, sys: SystemSpec, t_end_new: float,
                        cfg: IntegratorConfig | None = None) -> Trajectory:
    """Resume from the last sample and append samples up to ``t_end_new``."""
    if traj.meta.get("status") != "ok":
        raise StateError(f"cannot resume a trajectory with status {traj.meta.get('status')!r}")
    if "envelope_anchor" not in traj.meta:
        raise StateError("only trajectories produced by the integrator can be resumed")
    t_last = float(traj.t[-1])
    if t_end_new == t_last:
        return traj
    if not t_end_new > t_last:
        raise InvalidArgumentError("t_end_new must not precede the last sample")
    cfg = cfg or IntegratorConfig(**traj.meta["config"])
    meta = dict(traj.meta)
    meta["config"] = cfg.to_dict()
    meta["steps"] = dict(traj.meta.get("steps", {"accepted": 0, "rejected": 0}))
    meta["chart_switch_times"] = list(traj.meta.get("chart_switch_times", []))
    t0 = traj.meta["t0"]
    targets = [(tk, g) for tk, g in _targets(t0, t_end_new, cfg.sample_ratio) if tk > t_last]
    prefix = (list(traj.t), [row.copy() for row in traj.state], list(traj.on_grid))
    ts, xs, grid = _run(sys, traj.chart, t_last, traj.state[-1].copy(), targets, cfg, meta,
                        prefix=prefix)
    out = _finish(sys, ts, xs, grid, traj.chart, meta)
    if traj.chart == "w":
        _record_speed(sys, out)
    return out
