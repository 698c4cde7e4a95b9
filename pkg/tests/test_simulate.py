"""Path simulation, wealth accounting, growth rates, and the saddle harness."""

import numpy as np
import pytest

import puccilab as pl
from puccilab.simulate import _run_engine

PI = np.pi


@pytest.fixture(scope="module")
def sim_setup(canonical_bounds, grid2000, star_pair, c_theta, linear_pair):
    return {
        "domain": canonical_bounds.domain,
        "bounds": canonical_bounds,
        "grid": grid2000,
        "star": star_pair,
        "c": c_theta,
        "drift": linear_pair,
    }


# -- configuration checks ------------------------------------------------------


def test_path_config_validation():
    with pytest.raises(pl.InputError):
        pl.PathConfig(x0=1.0, dt=-1.0)
    with pytest.raises(pl.InputError):
        pl.PathConfig(x0=1.0, T=0.5)
    with pytest.raises(pl.InputError):
        pl.PathConfig(x0=1.0, dt=1e-3, T=1.0, store_stride=3)
    with pytest.raises(pl.InputError):
        pl.PathConfig(x0=1.0, seed=-1)


def test_start_point_must_be_interior(sim_setup):
    cfg = pl.PathConfig(x0=-1.0, dt=1e-3, T=1.0)
    with pytest.raises(pl.InputError):
        pl.simulate_X(sim_setup["c"], None, cfg, sim_setup["domain"])


# -- state paths ----------------------------------------------------------------


def test_seed_determinism(sim_setup):
    cfg = pl.PathConfig(x0=sim_setup["star"].x0, dt=1e-3, T=2.0, seed=42)
    p1 = pl.simulate_X(sim_setup["c"], sim_setup["drift"], cfg, sim_setup["domain"])
    p2 = pl.simulate_X(sim_setup["c"], sim_setup["drift"], cfg, sim_setup["domain"])
    assert np.array_equal(p1.states, p2.states)
    p3 = pl.simulate_X(sim_setup["c"], sim_setup["drift"],
                       pl.PathConfig(x0=sim_setup["star"].x0, dt=1e-3, T=2.0, seed=43),
                       sim_setup["domain"])
    assert not np.array_equal(p1.states, p3.states)


def test_paths_match_ensemble_rows(sim_setup):
    cfg = pl.PathConfig(x0=sim_setup["star"].x0, dt=1e-3, T=1.0, seed=8)
    recs = pl.simulate_paths(sim_setup["c"], sim_setup["drift"], cfg,
                             sim_setup["domain"], 3)
    for i, rec in enumerate(recs):
        single = pl.simulate_X(
            sim_setup["c"], sim_setup["drift"],
            pl.PathConfig(x0=sim_setup["star"].x0, dt=1e-3, T=1.0, seed=8,
                          path_index=i),
            sim_setup["domain"])
        assert np.array_equal(rec.states, single.states)


def test_quadratic_variation(sim_setup):
    cfg = pl.PathConfig(x0=PI / 2, dt=1e-3, T=1.0, seed=7, eps_boundary=1e-3)
    recs = pl.simulate_paths(sim_setup["c"], None, cfg, sim_setup["domain"], 100)
    rates = [np.sum(np.diff(r.states) ** 2) / (r.times[-1] - r.times[0])
             for r in recs if len(r.times) > 50]
    assert abs(np.mean(rates) - 2.0) / 2.0 <= 0.05


def test_recurrent_drift_keeps_paths_inside(sim_setup):
    cfg = pl.PathConfig(x0=sim_setup["star"].x0, dt=1e-3, T=50.0, seed=21)
    recs = pl.simulate_paths(sim_setup["c"], sim_setup["drift"], cfg,
                             sim_setup["domain"], 50)
    assert sum(r.stopped for r in recs) == 0
    for r in recs:
        dist = sim_setup["domain"].boundary_distance(r.states)
        assert float(np.mean(dist > 0.3)) >= 0.9


def test_stopped_paths_are_truncated_and_flagged(sim_setup):
    # without drift the martingale paths exit in finite time
    cfg = pl.PathConfig(x0=PI / 2, dt=1e-3, T=5.0, seed=3, eps_boundary=1e-3)
    recs = pl.simulate_paths(sim_setup["c"], None, cfg, sim_setup["domain"], 50)
    stopped = [r for r in recs if r.stopped]
    assert stopped
    for r in stopped:
        assert r.stop_time is not None
        assert r.times[-1] <= r.stop_time
        assert np.all(sim_setup["domain"].boundary_distance(r.states) > 0.0)


# -- wealth ----------------------------------------------------------------------


def test_wealth_starts_at_one_and_origin_equality(sim_setup):
    cfg = pl.PathConfig(x0=sim_setup["star"].x0, dt=1e-3, T=1.0, seed=12)
    rec = pl.simulate_X(sim_setup["c"], sim_setup["drift"], cfg, sim_setup["domain"])
    w = pl.wealth_path(rec, sim_setup["star"].lam, sim_setup["star"],
                       pl.StrategySpec.pi_star())
    assert w.wealth[0] == 1.0
    assert w.bound[0] == pytest.approx(1.0, abs=1e-12)


def test_zero_position_keeps_wealth_flat(sim_setup):
    cfg = pl.PathConfig(x0=sim_setup["star"].x0, dt=1e-3, T=1.0, seed=12)
    rec = pl.simulate_X(sim_setup["c"], sim_setup["drift"], cfg, sim_setup["domain"])
    w = pl.wealth_path(rec, sim_setup["star"].lam, sim_setup["star"],
                       pl.StrategySpec.constant_proportion(0.0))
    assert np.all(w.wealth == 1.0)


def test_custom_strategy_positions(sim_setup):
    cfg = pl.PathConfig(x0=sim_setup["star"].x0, dt=1e-3, T=1.0, seed=12)
    rec = pl.simulate_X(sim_setup["c"], sim_setup["drift"], cfg, sim_setup["domain"])
    w = pl.wealth_path(rec, sim_setup["star"].lam, sim_setup["star"],
                       pl.StrategySpec.custom(lambda x, t: np.ones_like(x)))
    # unit position holds the increment of X itself
    assert w.wealth[-1] == pytest.approx(1.0 + (rec.states[-1] - rec.states[0]),
                                         abs=1e-12)


def test_pi_star_requires_normalized_start(sim_setup):
    cfg = pl.PathConfig(x0=0.3, dt=1e-3, T=1.0, seed=12)
    rec = pl.simulate_X(sim_setup["c"], sim_setup["drift"], cfg, sim_setup["domain"])
    with pytest.raises(pl.InputError):
        pl.wealth_path(rec, sim_setup["star"].lam, sim_setup["star"],
                       pl.StrategySpec.pi_star())


def test_wealth_rejects_outside_states(sim_setup):
    rec = pl.PathRecord(times=np.array([0.0, 1e-3]),
                        states=np.array([sim_setup["star"].x0, PI + 0.1]),
                        dt=1e-3, seed=0, path_index=0)
    with pytest.raises(pl.EvaluationError):
        pl.wealth_path(rec, 1.0, sim_setup["star"], pl.StrategySpec.pi_star())


# -- growth rates ----------------------------------------------------------------


def _record_with_wealth(times, wealth):
    return pl.PathRecord(times=times, states=np.full_like(times, 1.0),
                         dt=float(times[1] - times[0]), seed=0, path_index=0,
                         wealth=wealth, bound=None)


def test_growth_rate_exact_exponential():
    t = np.linspace(0.0, 10.0, 1001)
    rec = _record_with_wealth(t, np.exp(0.7 * t))
    assert pl.growth_rate(rec) == pytest.approx(0.7, abs=1e-12)


def test_growth_rate_constant_wealth():
    t = np.linspace(0.0, 10.0, 1001)
    rec = _record_with_wealth(t, np.ones_like(t))
    assert pl.growth_rate(rec) == 0.0


def test_growth_rate_positivity_violation():
    t = np.linspace(0.0, 10.0, 101)
    v = np.exp(t)
    v[40] = -0.5
    rec = _record_with_wealth(t, v)
    with pytest.raises(pl.PositivityError) as err:
        pl.growth_rate(rec)
    assert err.value.time == pytest.approx(t[40])


# -- pathwise bound at module scale ----------------------------------------------


def test_pathwise_bound_envelope(sim_setup):
    # the discrete trading defect stays within an O(sqrt(dt)) envelope of the
    # comparison process; the envelope constant is frozen from measurement
    cfg = pl.PathConfig(x0=sim_setup["star"].x0, dt=1e-3, T=5.0, seed=3)
    recs = pl.simulate_paths(sim_setup["c"], sim_setup["drift"], cfg,
                             sim_setup["domain"], 50)
    worst = np.inf
    strat = pl.StrategySpec.pi_star()
    for r in recs:
        w = pl.wealth_path(r, sim_setup["star"].lam, sim_setup["star"], strat)
        d = (w.wealth - w.bound) / np.exp(sim_setup["star"].lam * w.times)
        worst = min(worst, float(d.min()))
    assert worst >= -0.15


def test_engine_growth_matches_record_route(sim_setup):
    cfg = pl.PathConfig(x0=sim_setup["star"].x0, dt=1e-3, T=4.0, seed=9)
    strat = pl.StrategySpec.pi_star()
    out = _run_engine(sim_setup["c"], sim_setup["drift"], sim_setup["domain" ],
                      cfg, 4, strategies=[strat], lam_star=sim_setup["star"].lam,
                      eig_star=sim_setup["star"], window=(2.0, 4.0),
                      growth_stride=100)
    recs = pl.simulate_paths(sim_setup["c"], sim_setup["drift"], cfg,
                             sim_setup["domain"], 4)
    for i, rec in enumerate(recs):
        w = pl.wealth_path(rec, sim_setup["star"].lam, sim_setup["star"], strat)
        mask = (w.times >= 2.0) & (w.times <= 4.0) \
            & (np.arange(w.times.size) % 100 == 0) & (w.times > 0)
        expect = np.mean(np.log(w.wealth[mask]) / w.times[mask])
        assert out.growth[strat.label][i] == pytest.approx(expect, abs=1e-12)


# -- ball geometry ----------------------------------------------------------------


def test_ball_simulation_smoke():
    ball = pl.Ball(2, 1.0)
    g = pl.make_grid(ball, 500)
    c = pl.CovarianceField.radial(pl.ScalarField.constant(1.0),
                                  pl.ScalarField.constant(1.0))
    pair = pl.principal_eig_linear(c, g)
    cfg = pl.PathConfig(x0=(0.0, 0.0), dt=1e-3, T=5.0, seed=9)
    recs = pl.simulate_paths(c, pair, cfg, ball, 20)
    assert sum(r.stopped for r in recs) == 0
    r_all = np.concatenate([ball.radius_of(r.states) for r in recs])
    assert r_all.max() < 1.0
    w = pl.wealth_path(recs[0], pair.lam, pair, pl.StrategySpec.pi_star())
    assert w.wealth[0] == 1.0
    assert w.bound[0] == pytest.approx(1.0, abs=1e-12)
    again = pl.simulate_paths(c, pair, cfg, ball, 20)
    assert np.array_equal(recs[3].states, again[3].states)


# -- saddle harness ----------------------------------------------------------------


def test_minmax_experiment_small(sim_setup):
    cfg = pl.SaddleConfig(dt=1e-3, T=40.0, n_paths=24, seed=5, kappas=(0.5,),
                          tol=0.1, n_sampled=1, solver=pl.SolverConfig(n=2000))
    rep = pl.minmax_experiment(sim_setup["bounds"], sim_setup["domain"],
                               sim_setup["grid"], cfg)
    assert rep.verdicts["pi_star_lower_bound"]
    assert rep.verdicts["worst_case_upper_bound"]
    scenarios = {c.scenario for c in rep.cells}
    assert scenarios == {"c=theta", "c=Theta", "sampled_0"}
    for cell in rep.cells:
        if cell.strategy == "pi_star":
            assert cell.mean_rate >= rep.lambda_star - cfg.tol


def test_minmax_experiment_rejects_overflow_horizon(sim_setup):
    cfg = pl.SaddleConfig(T=1000.0, n_paths=2)
    with pytest.raises(pl.InputError):
        pl.minmax_experiment(sim_setup["bounds"], sim_setup["domain"],
                             sim_setup["grid"], cfg)
