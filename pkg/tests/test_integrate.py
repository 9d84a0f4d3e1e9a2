import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from powerdecay import (
    BasicCase,
    DivergenceError,
    IntegratorConfig,
    InvalidArgumentError,
    Perturbation,
    StateError,
    SystemSpec,
    continue_trajectory,
    decompose_symmetric,
    exact_unforced,
    integrate,
    integrate_rescaled,
    lp_norm_power,
    norm_power,
)
from powerdecay.integrate import sample_grid

from conftest import seeded_y0


def _rel_err(tr, bc):
    ex = exact_unforced(bc, tr.t)
    return np.max(np.linalg.norm(tr.y - ex, axis=1) / np.linalg.norm(ex, axis=1))


def test_basic_case_oracle():
    bc = BasicCase(1.0, 1.0, [1.0, 0.0])
    tr = integrate(bc.as_system(), bc.y0, 0.0, 1e4)
    assert abs(tr.y[-1, 0] * (1 + 1e4) - 1) <= 1e-8
    assert tr.y[-1, 1] == 0.0


def test_invariant_axis():
    S = SystemSpec(decompose_symmetric(np.diag([1.0, 2.0])), norm_power(2, 2), Perturbation.zero(2))
    tr = integrate(S.with_bounds(), [0.0, 0.1], 0.0, 1e6)
    assert np.all(tr.y[:, 0] == 0.0)
    np.testing.assert_allclose(tr.lam, 2.0, rtol=1e-14)


def test_contracts():
    bc = BasicCase(1.0, 1.0, [1.0])
    with pytest.raises(InvalidArgumentError):
        integrate(bc.as_system(), bc.y0, 5.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        IntegratorConfig(t_switch=0.5)
    with pytest.raises(InvalidArgumentError):
        IntegratorConfig(sample_ratio=1.0)


@pytest.mark.parametrize("rel_tol", [1e-6, 1e-8, 1e-10])
@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 3.0])
def test_oracle_equivalence_under_tightening(rel_tol, alpha):
    bc = BasicCase(1.0, alpha, [0.6, 0.8])
    tr = integrate(bc.as_system(), bc.y0, 0.0, 1e6, IntegratorConfig(rel_tol=rel_tol))
    assert _rel_err(tr, bc) <= 10 * rel_tol


@settings(max_examples=25)
@given(st.floats(0.3, 4), st.floats(0.2, 5), st.floats(0.01, 3), st.floats(0, 50))
def test_oracle_equivalence_random(alpha, a, r, t0):
    bc = BasicCase(a, alpha, [r, -0.5 * r], t0)
    tr = integrate(bc.as_system(), bc.y0, t0, t0 + 1e7)
    assert _rel_err(tr, bc) <= 1e-9


def test_sample_grid():
    g = sample_grid(0.0, 100.0, 1.05)
    assert g[-1] == 100.0 and np.all(np.diff(g) > 0)
    np.testing.assert_allclose(np.diff(g[:5]), 0.05)
    above = np.array([t for t in g[:-1] if t > 1])
    np.testing.assert_allclose(above[1:] / above[:-1], 1.05, rtol=1e-12)


def test_chart_switch_consistency(diag125):
    y0 = seeded_y0(1)
    a = integrate(diag125, y0, 0.0, 1e3, IntegratorConfig(t_switch=10.0), extra_times=[10.0])
    b = integrate(diag125, y0, 0.0, 1e3, IntegratorConfig(t_switch=1e4), extra_times=[10.0])
    assert a.meta["chart_switch_times"] and not b.meta["chart_switch_times"]
    for t in [10.0, 1e3]:
        ya, yb = a.y[a.t == t][0], b.y[b.t == t][0]
        assert np.linalg.norm(ya - yb) <= 1e-9 * np.linalg.norm(yb)


def test_rescaled_matches_plain(diag125):
    y0 = np.array([0.05, 0.1, -0.08])
    tr = integrate(diag125, y0, 1.0, np.exp(20.0))
    rw = integrate_rescaled(diag125, y0, 1.0, 20.0)
    common, ia, ib = np.intersect1d(tr.t, rw.t, return_indices=True)
    assert common.size > 50
    err = np.linalg.norm(tr.w[ia] - rw.state[ib], axis=1) / np.linalg.norm(rw.state[ib], axis=1)
    assert err.max() <= 1e-7


def test_rescaled_fixed_point(diag125):
    # w = e1 / sqrt(alpha * 1) is a fixed point for Lambda = 1
    w = np.array([1 / np.sqrt(2), 0, 0])
    rw = integrate_rescaled(diag125, w, 1.0, 10.0)
    np.testing.assert_allclose(rw.state, np.tile(w, (len(rw), 1)), rtol=0, atol=1e-14)
    assert rw.meta["final_speed"] <= 1e-14


@pytest.mark.parametrize("seed", range(20))
def test_rescaled_converges(diag125, seed):
    # order-one start in w; "generic" means away from the invariant plane w_1 = 0,
    # near which the escape takes far longer than tau = 40
    w0 = seeded_y0(seed, radius=1.0)
    rw = integrate_rescaled(diag125, w0, 1.0, 40.0)
    if abs(w0[0]) >= 0.1:
        assert rw.meta["converged"] and rw.meta["final_speed"] <= 1e-8
    else:
        early = integrate_rescaled(diag125, w0, 1.0, 30.0)
        assert rw.meta["final_speed"] < early.meta["final_speed"]


@pytest.mark.parametrize("seed", range(5))
def test_monotone_norm(diag125, seed):
    tr = integrate(diag125, seeded_y0(seed), 0.0, 1e12)
    assert np.all(np.diff(tr.norm) <= 0)


@pytest.mark.parametrize("seed", range(5))
def test_comparison_envelope(seed):
    # G = 0: c1 Lambda_1 |y|^(alpha+1) <= -d|y|/dt <= c2 Lambda_n |y|^(alpha+1)
    H = lp_norm_power(np.diag([1.0, 2.0, 0.5]), 2, 1.5)
    S = SystemSpec(decompose_symmetric(np.diag([1.0, 2.0, 5.0])), H, Perturbation.zero(1.5)).with_bounds()
    y0 = seeded_y0(seed)
    tr = integrate(S, y0, 0.0, 1e10)
    a, r0, c1, c2 = 1.5, np.linalg.norm(y0), S.bounds.c1, S.bounds.c2
    lo = (r0 ** -a + a * c2 * 5.0 * tr.t) ** (-1 / a)
    hi = (r0 ** -a + a * c1 * 1.0 * tr.t) ** (-1 / a)
    slack = 1e-8 + S.bounds.slack
    assert np.all(tr.norm >= lo * (1 - slack)) and np.all(tr.norm <= hi * (1 + slack))


def test_first_decade_envelope(diag125_perturbed):
    y0 = seeded_y0(3)
    tr = integrate(diag125_perturbed, y0, 0.0, 1e8)
    ratio = tr.norm * (1 + tr.t) ** 0.5
    first = tr.t <= 10
    C1, C2 = ratio[first].min(), ratio[first].max()
    assert np.all(ratio >= C1 / 10) and np.all(ratio <= 10 * C2)


def test_unit_norm_direction(diag125_perturbed):
    tr = integrate(diag125_perturbed, seeded_y0(4), 0.0, 1e8)
    assert np.all(np.abs(np.linalg.norm(tr.v, axis=1) - 1) <= 1e-10)
    assert np.all(np.diff(tr.t) > 0) and np.all(tr.norm > 0)


def test_continuation_matches_single_run():
    bc = BasicCase(1.0, 1.0, [0.6, 0.8])
    S = bc.as_system()
    one = integrate(S, bc.y0, 0.0, 1e8)
    part = integrate(S, bc.y0, 0.0, 1e4)
    two = continue_trajectory(part, S, 1e8)
    # the resumed run also keeps the old end point 1e4 as a sample
    assert set(one.t) <= set(two.t) and set(two.t) - set(one.t) == {1e4}
    _, ia, ib = np.intersect1d(one.t, two.t, return_indices=True)
    err = np.linalg.norm(one.y[ia] - two.y[ib], axis=1) / np.linalg.norm(one.y[ia], axis=1)
    assert err.max() <= 1e-9
    assert continue_trajectory(two, S, 1e8) is two


def test_continuation_after_divergence():
    S = SystemSpec(decompose_symmetric(np.eye(2)), norm_power(2, 2),
                   Perturbation.power(2, 10.0, 1.0)).with_bounds()
    with pytest.raises(DivergenceError) as exc:
        integrate(S, [3.0, 0.0], 0.0, 1e3)
    partial = exc.value.trajectory
    assert partial is not None and partial.meta["status"] != "ok"
    with pytest.raises(StateError):
        continue_trajectory(partial, S, 1e4)


def test_csv_layout(diag125):
    tr = integrate(diag125, seeded_y0(0), 0.0, 100.0)
    text = tr.to_csv()
    head, first = text.splitlines()[:2]
    assert head == ("t,y_1,y_2,y_3,norm,lambda,v_1,v_2,v_3,"
                    "projnorm_1,projnorm_2,projnorm_3")
    assert len(first.split(",")) == 12
    assert float(first.split(",")[1]) == tr.y[0, 0]
