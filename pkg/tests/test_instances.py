import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qabench.instances import (
    GenerationError,
    IsingInstance,
    Schedule,
    apply_gauge_to_states,
    default_schedule,
    energies,
    energy,
    gauge_transform,
    gen_frustrated_loops,
    gen_random_pm1,
    gen_range_k,
    gen_signature,
    gen_weak_strong,
    random_gauges,
    renormalize,
    signature_states,
)
from qabench.solvers import solve_exact
from qabench.topology import build_chimera


# --- energy convention ---------------------------------------------------


def test_energy_hand_computed():
    # E = sum h_i s_i + sum_{i<j} J_ij s_i s_j, checked against pencil and
    # paper on a 3-spin triangle
    inst = IsingInstance(
        n=3,
        h=np.array([0.5, -1.0, 0.25]),
        J={(0, 1): -1.0, (1, 2): 2.0, (0, 2): 0.5},
    )
    s = np.array([1, -1, 1], dtype=np.int8)
    # fields: 0.5 + 1.0 + 0.25 = 1.75; bonds: +1.0 - 2.0 + 0.5 = -0.5
    assert energy(inst, s) == 1.25


def test_energy_batch_matches_single():
    inst = gen_range_k(build_chimera(1), k=7, seed=3)
    rng = np.random.default_rng(1)
    states = (1 - 2 * rng.integers(0, 2, size=(20, inst.n))).astype(np.int8)
    batch = energies(inst, states)
    for row, e in zip(states, batch):
        assert energy(inst, row) == e


def test_instance_validation():
    with pytest.raises(ValueError):
        IsingInstance(n=2, h=np.zeros(3), J={})
    with pytest.raises(ValueError):
        IsingInstance(n=2, h=np.zeros(2), J={(0, 0): 1.0})
    with pytest.raises(ValueError):
        IsingInstance(n=2, h=np.zeros(2), J={(0, 5): 1.0})
    with pytest.raises(ValueError):
        IsingInstance(n=2, h=np.array([np.nan, 0.0]), J={})
    with pytest.raises(ValueError):
        IsingInstance(n=2, h=np.zeros(2), J={(0, 1): np.inf})
    with pytest.raises(ValueError):  # same bond given under both orderings
        IsingInstance(n=2, h=np.zeros(2), J={(0, 1): 1.0, (1, 0): 2.0})


def test_reversed_coupler_key_is_normalized():
    inst = IsingInstance(n=2, h=np.zeros(2), J={(1, 0): 1.5})
    assert inst.J == {(0, 1): 1.5}


def test_planted_must_score_declared_ground():
    with pytest.raises(ValueError):
        IsingInstance(
            n=2,
            h=np.zeros(2),
            J={(0, 1): -1.0},
            planted=(1, 1),
            known_ground_energy=-2.0,  # actual planted energy is -1
        )


def test_coupler_arrays_sorted():
    inst = IsingInstance(n=3, h=np.zeros(3), J={(1, 2): 1.0, (0, 1): -1.0})
    i_idx, j_idx, vals = inst.coupler_arrays()
    assert list(zip(i_idx, j_idx)) == [(0, 1), (1, 2)]
    assert vals.tolist() == [-1.0, 1.0]


# --- gauges --------------------------------------------------------------


@given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=0, max_value=1000))
def test_gauge_invariance_of_energy(seed, state_seed):
    inst = gen_range_k(build_chimera(1), k=7, seed=seed)
    rng = np.random.default_rng(state_seed)
    s = (1 - 2 * rng.integers(0, 2, inst.n)).astype(np.int8)
    a = (1 - 2 * rng.integers(0, 2, inst.n)).astype(np.int8)
    gauged = gauge_transform(inst, a)
    # transforming instance and state together leaves the energy bit-identical
    assert energy(inst, s) == energy(gauged, a * s)


def test_gauge_transform_is_involution():
    inst = gen_random_pm1(build_chimera(1), seed=5)
    a = np.array([1, -1, 1, -1, 1, 1, -1, -1], dtype=np.int8)
    back = gauge_transform(gauge_transform(inst, a), a)
    assert np.array_equal(back.h, inst.h)
    assert back.J == inst.J


def test_apply_gauge_to_states_roundtrip(rng):
    states = (1 - 2 * rng.integers(0, 2, size=(6, 8))).astype(np.int8)
    a = (1 - 2 * rng.integers(0, 2, 8)).astype(np.int8)
    assert np.array_equal(
        apply_gauge_to_states(apply_gauge_to_states(states, a), a), states
    )


def test_random_gauges_single_is_identity():
    # one gauge means "no transformation" so gauge-averaged runs with G=1
    # reduce to plain runs
    assert np.all(random_gauges(8, count=1, seed=1) == 1)
    gs = random_gauges(8, count=3, seed=1)
    assert gs.shape == (3, 8)
    assert set(np.unique(gs)) <= {-1, 1}
    assert not np.array_equal(gs[1], gs[2])


def test_gauge_transform_preserves_planted():
    g = build_chimera(1)
    inst = gen_frustrated_loops(g, alpha=0.5, seed=11)
    a = (1 - 2 * np.random.default_rng(2).integers(0, 2, inst.n)).astype(np.int8)
    gauged = gauge_transform(inst, a)
    assert gauged.known_ground_energy == inst.known_ground_energy
    assert energy(gauged, np.asarray(gauged.planted)) == inst.known_ground_energy


# --- renormalize ---------------------------------------------------------


def test_renormalize_shrinks_to_caps():
    inst = IsingInstance(n=2, h=np.array([4.0, -1.0]), J={(0, 1): 3.0})
    out = renormalize(inst, h_max=2.0, j_max=1.0)
    lam = max(4.0 / 2.0, 3.0 / 1.0)
    assert out.h[0] == 4.0 / lam
    assert out.J[(0, 1)] == 3.0 / lam


def test_renormalize_never_grows():
    inst = IsingInstance(n=2, h=np.array([0.1, 0.0]), J={(0, 1): -0.2})
    out = renormalize(inst)
    assert out.h[0] == 0.1
    assert out.J[(0, 1)] == -0.2


def test_renormalize_rescales_declared_ground():
    g = build_chimera(1)
    inst = gen_frustrated_loops(g, alpha=0.5, seed=3, coupler_cap=3.0)
    out = renormalize(inst, j_max=1.0)
    assert out.known_ground_energy == energy(out, np.asarray(out.planted))


# --- generators ----------------------------------------------------------


def test_gen_random_pm1_structure(c2_graph):
    inst = gen_random_pm1(c2_graph, seed=0)
    assert inst.n == c2_graph.n_sites
    assert np.all(inst.h == 0)
    assert set(inst.J) == set(c2_graph.active_couplers)
    assert set(inst.J.values()) <= {-1.0, 1.0}


def test_gen_random_pm1_seed_determinism(c2_graph):
    a = gen_random_pm1(c2_graph, seed=9)
    b = gen_random_pm1(c2_graph, seed=9)
    c = gen_random_pm1(c2_graph, seed=10)
    assert a.J == b.J
    assert a.J != c.J


@pytest.mark.parametrize("k", [1, 3, 7])
def test_gen_range_k_value_set(cell_graph, k):
    inst = gen_range_k(cell_graph, k=k, seed=4)
    allowed = {m / k for m in range(1, k + 1)} | {-m / k for m in range(1, k + 1)}
    assert set(inst.J.values()) <= allowed
    if k > 1:
        assert len(set(np.abs(list(inst.J.values())))) > 1


def test_gen_range_k_rejects_bad_k(cell_graph):
    with pytest.raises(ValueError):
        gen_range_k(cell_graph, k=0, seed=0)


def test_gen_frustrated_loops_planted_is_ground(c2_graph):
    inst = gen_frustrated_loops(c2_graph, alpha=0.2, seed=12)
    planted = np.asarray(inst.planted)
    assert energy(inst, planted) == inst.known_ground_energy
    sol = solve_exact(inst)
    assert sol.ground_energy == inst.known_ground_energy


def test_gen_frustrated_loops_coupler_cap(c2_graph):
    # dense enough that loop contributions pile up and the cap actually binds
    inst = gen_frustrated_loops(c2_graph, alpha=1.0, seed=0, coupler_cap=3.0)
    vals = np.abs(list(inst.J.values()))
    assert vals.max() <= 3.0
    assert np.any(vals == 3.0)


def test_gen_frustrated_loops_respects_custom_planted(cell_graph):
    planted = tuple(-1 if q % 3 == 0 else 1 for q in range(8))
    inst = gen_frustrated_loops(cell_graph, alpha=0.5, seed=2, planted=planted)
    assert np.array_equal(inst.planted, planted)
    assert energy(inst, np.asarray(planted)) == inst.known_ground_energy


def test_gen_frustrated_loops_budget_exhaustion():
    # demand far more loops than the saturating couplers can absorb
    g = build_chimera(1)
    with pytest.raises(GenerationError):
        gen_frustrated_loops(g, alpha=40.0, seed=0, coupler_cap=1.0)


def test_gen_frustrated_loops_rejects_fractional_cap(cell_graph):
    with pytest.raises(ValueError):
        gen_frustrated_loops(cell_graph, alpha=0.5, seed=0, coupler_cap=0.5)


def test_gen_weak_strong_structure():
    inst = gen_weak_strong(h_weak=0.44)
    assert inst.n == 16
    assert inst.num_couplers == 36
    assert set(inst.J.values()) == {-1.0}
    # weak cell carries the tunable field, strong cell the full one
    assert np.allclose(inst.h[:8], -0.44)
    assert np.allclose(inst.h[8:], -1.0)
    # declared ground is the energy of the all-up state, bit for bit
    all_up = np.ones(16, dtype=np.int8)
    assert inst.known_ground_energy == energy(inst, all_up)
    assert inst.known_ground_energy == pytest.approx(-44.0 - 8 * 0.44)


def test_gen_weak_strong_unique_all_up_ground():
    inst = gen_weak_strong(h_weak=0.44)
    sol = solve_exact(inst)
    assert sol.degeneracy == 1
    assert np.all(sol.ground_states[0] == 1)
    assert sol.ground_energy == inst.known_ground_energy


def test_gen_weak_strong_field_window():
    with pytest.raises(ValueError):
        gen_weak_strong(h_weak=0.0)
    with pytest.raises(ValueError):
        gen_weak_strong(h_weak=0.5)


def test_gen_signature_ground_manifold():
    inst = gen_signature(4)
    cluster, isolated = signature_states(4)
    assert cluster.shape == (16, 8)
    for state in cluster:
        assert energy(inst, state) == -8.0
    assert energy(inst, isolated) == -8.0
    sol = solve_exact(inst)
    assert sol.ground_energy == -8.0
    assert sol.degeneracy == 17


def test_gen_signature_minimum_core():
    with pytest.raises(ValueError):
        gen_signature(2)


@pytest.mark.parametrize("n_core", [3, 5])
def test_gen_signature_scales(n_core):
    inst = gen_signature(n_core)
    sol = solve_exact(inst)
    assert sol.ground_energy == -2.0 * n_core
    assert sol.degeneracy == 2**n_core + 1


# --- schedules -----------------------------------------------------------


def test_default_schedule_endpoints():
    sched = default_schedule()
    assert sched.a(0.0) == 1.0 and sched.b(0.0) == 0.0
    assert sched.a(1.0) == 0.0 and sched.b(1.0) == 1.0


def test_schedule_interpolates():
    sched = Schedule(
        s_values=(0.0, 0.5, 1.0),
        a_values=(2.0, 1.0, 0.0),
        b_values=(0.0, 1.0, 4.0),
    )
    assert sched.a(0.25) == 1.5
    assert sched.b(0.75) == 2.5


def test_schedule_validation():
    with pytest.raises(ValueError):
        Schedule(s_values=(0.0, 0.9), a_values=(1.0, 0.0), b_values=(0.0, 1.0))
    with pytest.raises(ValueError):  # A must not increase
        Schedule(s_values=(0.0, 1.0), a_values=(0.5, 1.0), b_values=(0.0, 1.0))
    with pytest.raises(ValueError):  # B must not decrease
        Schedule(s_values=(0.0, 1.0), a_values=(1.0, 0.0), b_values=(1.0, 0.0))
