import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qabench.bench import (
    UNSOLVED,
    BenchReport,
    bayesian_bootstrap,
    derive_seed,
    gauge_average,
    is_unsolved,
    optimal_tf_scan,
    resolve_ground_energy,
    scaling_fit,
    stopping_reward,
    success_prob,
    tts,
    ttt,
    weighted_mean,
    weighted_quantile,
    weighted_success,
)
from qabench.instances import IsingInstance, gen_weak_strong
from qabench.solvers import SampleSet, SolverConfig, make_stub_solver, solve_sa


# --- time to solution ----------------------------------------------------


def test_tts_midpoint_value():
    # ln(0.01)/ln(0.5) = 6.643856...: about seven repeats of a coin-flip
    # solver to reach 99% confidence
    assert tts(0.5, 1.0) == pytest.approx(6.643856189774723, abs=1e-12)


def test_tts_certain_solver_costs_one_run():
    assert tts(1.0, 7.5) == 7.5


def test_tts_never_below_single_run():
    # p > p_d: one run already clears the target confidence
    assert tts(0.999, 3.0) == 3.0


def test_tts_zero_probability_is_unsolved():
    assert is_unsolved(tts(0.0, 10.0))


def test_tts_rejects_bad_inputs():
    with pytest.raises(ValueError):
        tts(1.2, 1.0)
    with pytest.raises(ValueError):
        tts(0.5, -1.0)
    with pytest.raises(ValueError):
        tts(0.5, 1.0, p_d=1.0)


@given(
    st.floats(min_value=0.01, max_value=0.98),
    st.floats(min_value=0.011, max_value=0.99),
)
def test_tts_monotone_in_p(p1, p2):
    lo, hi = sorted((p1, p2))
    assert tts(hi, 2.0) <= tts(lo, 2.0)


def test_ttt_counts_target_hits():
    inst = IsingInstance(n=2, h=np.zeros(2), J={(0, 1): -1.0})
    states = np.array([[1, 1], [1, -1], [-1, -1], [1, -1]], dtype=np.int8)
    ss = SampleSet.from_states(inst, states, "x")
    # two of four reps reach -1.0
    assert ttt(ss, target_energy=-1.0, t_f=1.0) == pytest.approx(tts(0.5, 1.0))


def test_success_prob_tolerance_window():
    inst = IsingInstance(n=2, h=np.zeros(2), J={(0, 1): -1.0})
    states = np.array([[1, 1], [1, -1]], dtype=np.int8)
    ss = SampleSet.from_states(inst, states, "x")
    assert success_prob(ss, -1.0) == 0.5
    assert success_prob(ss, -1.0, tolerance=2.0) == 1.0


# --- stopping rule -------------------------------------------------------


def test_stopping_free_samples_take_whole_budget():
    values = np.array([0.0, 1.0, 2.0, 5.0])
    decision = stopping_reward(values, cost_per_sample=0.0, budget=50)
    assert decision.n_star == 50


def test_stopping_prohibitive_cost_takes_one():
    values = np.array([0.0, 1.0, 2.0, 5.0])
    decision = stopping_reward(values, cost_per_sample=100.0, budget=50)
    assert decision.n_star == 1


def test_stopping_hand_computed_two_point():
    # draws are 0 or 10 with equal mass; E[max of n] = 10 * (1 - 0.5^n)
    values = np.array([0.0, 10.0])
    decision = stopping_reward(values, cost_per_sample=2.0, budget=6)
    ns = np.arange(1, 7)
    expected = 10 * (1 - 0.5**ns) - 2.0 * ns
    assert np.allclose(decision.rewards, expected)
    assert decision.n_star == int(ns[np.argmax(expected)])
    assert decision.expected_reward == pytest.approx(expected.max())


def test_stopping_ties_prefer_more_samples():
    # constant values: every n gives the same max; zero cost leaves a flat
    # net curve and the rule must not stop early
    decision = stopping_reward(np.array([3.0, 3.0, 3.0]), 0.0, budget=8)
    assert decision.n_star == 8


def test_stopping_requires_data():
    with pytest.raises(ValueError):
        stopping_reward(np.array([]), 1.0)


# --- weighted statistics -------------------------------------------------


def test_weighted_mean_basic():
    assert weighted_mean(np.array([1.0, 3.0]), np.array([0.25, 0.75])) == 2.5


def test_weighted_success_clips_rounding():
    vals = np.ones(3)
    w = np.array([0.4, 0.4, 0.2000000000000004])
    assert weighted_success(vals, w) == 1.0
    assert weighted_success(np.zeros(3), w) == 0.0


def test_weighted_quantile_uniform_weights():
    vals = np.array([3.0, 1.0, 2.0])
    w = np.full(3, 1 / 3)
    assert weighted_quantile(vals, w, 0.0) == 1.0
    assert weighted_quantile(vals, w, 0.5) == 2.0
    assert weighted_quantile(vals, w, 1.0) == 3.0


def test_weighted_quantile_respects_weights():
    vals = np.array([1.0, 100.0])
    assert weighted_quantile(vals, np.array([0.99, 0.01]), 0.5) == 1.0
    assert weighted_quantile(vals, np.array([0.01, 0.99]), 0.5) == 100.0


def test_weighted_quantile_handles_unsolved():
    vals = np.array([1.0, 2.0, UNSOLVED])
    w = np.full(3, 1 / 3)
    assert weighted_quantile(vals, w, 0.5) == 2.0
    assert is_unsolved(weighted_quantile(vals, w, 1.0))


# --- bootstrap -----------------------------------------------------------


def test_bootstrap_deterministic_per_seed():
    vals = np.array([0.0, 1.0, 1.0, 0.0, 1.0])
    a = bayesian_bootstrap(vals, weighted_mean, seed=3)
    b = bayesian_bootstrap(vals, weighted_mean, seed=3)
    assert (a.lower, a.upper) == (b.lower, b.upper)


def test_bootstrap_interval_brackets_mean():
    rng = np.random.default_rng(0)
    vals = rng.normal(10.0, 1.0, 200)
    ci = bayesian_bootstrap(vals, weighted_mean, n_boot=500, seed=1)
    assert ci.lower < 10.0 < ci.upper
    assert ci.upper - ci.lower < 0.6
    assert not ci.flagged


def test_bootstrap_single_observation_flagged():
    ci = bayesian_bootstrap(np.array([4.0]), weighted_mean, seed=0)
    assert ci.flagged
    assert ci.lower == ci.upper == 4.0


def test_bootstrap_with_unsolved_values_flagged():
    vals = np.array([1.0, 2.0, UNSOLVED, 3.0])
    ci = bayesian_bootstrap(
        vals, lambda v, w: weighted_quantile(v, w, 0.9), n_boot=200, seed=2
    )
    assert ci.flagged
    assert is_unsolved(ci.upper)
    assert math.isfinite(ci.lower)


def test_bootstrap_narrows_with_more_data():
    rng = np.random.default_rng(5)
    small = rng.normal(0, 1, 20)
    large = rng.normal(0, 1, 2000)
    ci_small = bayesian_bootstrap(small, weighted_mean, n_boot=300, seed=1)
    ci_large = bayesian_bootstrap(large, weighted_mean, n_boot=300, seed=1)
    assert (ci_large.upper - ci_large.lower) < (ci_small.upper - ci_small.lower)


# --- report container ----------------------------------------------------


def test_report_widens_interval_to_contain_estimate():
    rep = BenchReport(
        metric="x", estimate=5.0, ci_lower=1.0, ci_upper=4.0, ci_level=0.95
    )
    assert rep.ci_upper == 5.0


def test_report_widening_repairs_inverted_finite_interval():
    rep = BenchReport(metric="x", estimate=1.0, ci_lower=2.0, ci_upper=0.0,
                      ci_level=0.95)
    assert rep.ci_lower <= rep.estimate <= rep.ci_upper


def test_report_rejects_inverted_interval_around_unsolved():
    # an unsolved estimate cannot anchor the bounds, so inversion is an error
    with pytest.raises(ValueError):
        BenchReport(metric="x", estimate=UNSOLVED, ci_lower=2.0, ci_upper=0.0,
                    ci_level=0.95)


# --- seed derivation -----------------------------------------------------


def test_derive_seed_stable_and_distinct():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    seen = {derive_seed(0, i, j) for i in range(10) for j in range(10)}
    assert len(seen) == 100


# --- gauge averaging -----------------------------------------------------


def test_gauge_average_single_gauge_is_plain_run():
    inst = gen_weak_strong(0.44)
    cfg = SolverConfig(repetitions=20, sweeps=80, seed=9)
    res = gauge_average(inst, solve_sa, cfg, n_gauges=1)
    plain = solve_sa(inst, cfg)
    assert np.array_equal(res.samples.states, plain.states)
    assert np.array_equal(res.samples.energies, plain.energies)


def test_gauge_average_pools_and_maps_back():
    inst = gen_weak_strong(0.44)
    cfg = SolverConfig(repetitions=10, sweeps=120, seed=9)
    res = gauge_average(inst, solve_sa, cfg, n_gauges=3, seed=2)
    assert res.samples.n_reps == 30
    assert len(res.per_gauge_success) == 3
    # mapped-back energies are consistent with the original frame
    recomputed = SampleSet.from_states(inst, res.samples.states, "check")
    assert np.array_equal(res.samples.energies, recomputed.energies)
    assert res.success_dispersion() >= 0.0


def test_resolve_ground_energy_prefers_declared():
    inst = gen_weak_strong(0.3)
    assert resolve_ground_energy(inst) == inst.known_ground_energy
    bare = IsingInstance(n=2, h=np.zeros(2), J={(0, 1): -1.0})
    # small instances fall back to exhaustive search
    assert resolve_ground_energy(bare) == -1.0


# --- sweep scans ---------------------------------------------------------


def scan_pool(count=4):
    return [gen_weak_strong(0.40 + 0.01 * k) for k in range(count)]


def test_scan_finds_interior_optimum():
    ground = np.ones(16, dtype=np.int8)
    excited = ground.copy()
    excited[0] = -1
    table = {10: 0.05, 30: 0.5, 100: 0.9, 300: 0.95, 1000: 0.96}
    stub = make_stub_solver(lambda sw: table[sw], ground, excited)
    report = optimal_tf_scan(
        scan_pool(), stub, SolverConfig(repetitions=400, seed=0),
        sweeps_grid=[10, 30, 100, 300, 1000], n_boot=100,
    )
    assert report.metric == "optimal_tf"
    assert report.details["best_sweeps"] == 100.0
    assert report.flags == []
    assert report.estimate == min(v for v in report.point_values if math.isfinite(v))


def test_scan_flags_boundary_optimum():
    ground = np.ones(16, dtype=np.int8)
    excited = ground.copy()
    excited[0] = -1
    # monotone improvement: the best grid point is the last one
    stub = make_stub_solver(lambda sw: min(0.9, sw / 1000), ground, excited)
    report = optimal_tf_scan(
        scan_pool(2), stub, SolverConfig(repetitions=200, seed=0),
        sweeps_grid=[100, 300, 900], n_boot=50,
    )
    assert "boundary-optimum" in report.flags


def test_scan_marks_unsolved_points():
    ground = np.ones(16, dtype=np.int8)
    excited = ground.copy()
    excited[0] = -1
    stub = make_stub_solver(lambda sw: 0.0 if sw < 50 else 0.8, ground, excited)
    report = optimal_tf_scan(
        scan_pool(2), stub, SolverConfig(repetitions=100, seed=0),
        sweeps_grid=[10, 100], n_boot=50,
    )
    assert is_unsolved(report.point_values[0])
    assert math.isfinite(report.point_values[1])


def test_scan_rejects_empty_inputs():
    with pytest.raises(ValueError):
        optimal_tf_scan([], solve_sa, SolverConfig(), [10])
    with pytest.raises(ValueError):
        optimal_tf_scan(scan_pool(1), solve_sa, SolverConfig(), [])
    with pytest.raises(ValueError):
        optimal_tf_scan(scan_pool(1), solve_sa, SolverConfig(), [0, 10])


# --- scaling fits --------------------------------------------------------


def test_scaling_fit_recovers_exponent():
    rng = np.random.default_rng(5)
    sizes = [8, 12, 16, 20]
    pools = [list(np.exp(0.3 * s + rng.normal(0, 0.05, 40))) for s in sizes]
    fit = scaling_fit(sizes, pools)
    assert fit.metric == "scaling_slope"
    assert fit.estimate == pytest.approx(0.3, abs=0.02)
    assert fit.ci_lower <= fit.estimate <= fit.ci_upper
    assert "intercept" in fit.details


def test_scaling_fit_sqrt_transform():
    rng = np.random.default_rng(6)
    sizes = [16, 36, 64, 100]
    # decay exponent set against sqrt(N): slope 0.5 in sqrt coordinates
    pools = [list(np.exp(0.5 * np.sqrt(s) + rng.normal(0, 0.05, 40))) for s in sizes]
    fit = scaling_fit(sizes, pools, size_transform="sqrt")
    assert fit.estimate == pytest.approx(0.5, abs=0.03)


def test_scaling_fit_input_validation():
    with pytest.raises(ValueError):
        scaling_fit([8, 12], [[1.0], [2.0]])  # too few sizes
    with pytest.raises(ValueError):
        scaling_fit([8, 12, 16], [[1.0], [2.0], [math.inf]])
    with pytest.raises(ValueError):
        scaling_fit([8, 12, 16], [[1.0], [-2.0], [3.0]])
    with pytest.raises(ValueError):
        scaling_fit([8, 12, 16], [[1.0], [2.0], [3.0]], size_transform="log")
