"""Reference solvers: exhaustive search, simulated annealing, spin-vector
Monte Carlo, simulated quantum annealing, and parallel tempering.

Every stochastic solver derives one RNG stream per repetition from
(seed, repetition index), so results do not depend on execution order, and
every SampleSet recomputes its energies through instances.energy, making the
energy-consistency invariant hold bit for bit.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .instances import IsingInstance, Schedule, default_schedule, energies, energy


class SizeLimitError(ValueError):
    """Raised when a problem exceeds the exhaustive-search size guard."""


@dataclass(frozen=True)
class SolverConfig:
    """Shared knob set for the Monte Carlo solvers; fields not used by a
    given solver are ignored by it."""

    repetitions: int = 100
    sweeps: int = 1000
    seed: int = 0
    beta_initial: float = 0.1
    beta_final: float = 3.0
    temperature: float = 0.05
    trotter_slices: int = 16
    slice_mode: str = "fixed"
    temperature_ladder: tuple[float, ...] | None = None
    clusters: tuple[tuple[int, ...], ...] | None = None
    update_order: str = "sequential"

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.sweeps < 0:
            raise ValueError("sweeps must be >= 0")
        if self.beta_initial <= 0 or self.beta_final <= 0:
            raise ValueError("inverse temperatures must be positive")
        if self.beta_final < self.beta_initial:
            raise ValueError("beta_final must be >= beta_initial")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.trotter_slices < 2:
            raise ValueError("trotter_slices must be >= 2")
        if self.slice_mode not in ("fixed", "best"):
            raise ValueError("slice_mode must be 'fixed' or 'best'")
        if self.temperature_ladder is not None:
            ladder = tuple(float(t) for t in self.temperature_ladder)
            if len(ladder) < 2:
                raise ValueError("temperature ladder needs at least two rungs")
            if any(t <= 0 for t in ladder):
                raise ValueError("ladder temperatures must be positive")
            if any(b >= a for a, b in zip(ladder, ladder[1:])):
                raise ValueError("ladder temperatures must strictly decrease")
            object.__setattr__(self, "temperature_ladder", ladder)
        if self.clusters is not None:
            object.__setattr__(
                self,
                "clusters",
                tuple(tuple(int(q) for q in c) for c in self.clusters),
            )
            for c in self.clusters:
                if not c:
                    raise ValueError("empty cluster in cluster_moves list")
        if self.update_order not in ("sequential", "random"):
            raise ValueError("update_order must be 'sequential' or 'random'")
        if self.update_order == "random" and self.clusters is not None:
            raise ValueError("cluster moves require the sequential update order")


@dataclass
class SampleSet:
    """States and energies from repeated solver runs on one instance."""

    states: np.ndarray
    energies: np.ndarray
    solver: str
    parameters: dict = field(default_factory=dict)
    seed: int | None = None
    wall_times: np.ndarray | None = None

    @classmethod
    def from_states(
        cls,
        instance: IsingInstance,
        states: np.ndarray,
        solver: str,
        parameters: dict | None = None,
        seed: int | None = None,
        wall_times: np.ndarray | None = None,
    ) -> "SampleSet":
        states = np.atleast_2d(np.asarray(states, dtype=np.int8))
        if states.size and not np.all(np.abs(states) == 1):
            raise ValueError("states must be +/-1 valued")
        if states.shape[1] != instance.n:
            raise ValueError("state width does not match instance size")
        e = energies(instance, states)
        if wall_times is None:
            wall_times = np.zeros(states.shape[0])
        return cls(
            states=states,
            energies=e,
            solver=solver,
            parameters=dict(parameters or {}),
            seed=seed,
            wall_times=np.asarray(wall_times, dtype=np.float64),
        )

    @classmethod
    def concatenate(cls, parts: Sequence["SampleSet"]) -> "SampleSet":
        if not parts:
            raise ValueError("nothing to concatenate")
        return cls(
            states=np.vstack([p.states for p in parts]),
            energies=np.concatenate([p.energies for p in parts]),
            solver=parts[0].solver,
            parameters=dict(parts[0].parameters, pooled_from=len(parts)),
            seed=parts[0].seed,
            wall_times=np.concatenate([p.wall_times for p in parts]),
        )

    @property
    def n_reps(self) -> int:
        return self.states.shape[0]

    def min_energy(self) -> float:
        return float(np.min(self.energies))

    def best_state(self) -> np.ndarray:
        return self.states[int(np.argmin(self.energies))]


Solver = Callable[[IsingInstance, SolverConfig], SampleSet]


def _rep_rng(seed: int, rep: int) -> np.random.Generator:
    """Counter-derived stream: repetition r of seed s is always the same."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(rep,)))
    )


def _random_state(rng: np.random.Generator, n: int) -> np.ndarray:
    return (1 - 2 * rng.integers(0, 2, size=n)).astype(np.int8)


# ---------------------------------------------------------------------------
# exhaustive search
# ---------------------------------------------------------------------------


@dataclass
class ExactSolution:
    """Complete ground-state description from exhaustive enumeration.

    degeneracy is the exact count; ground_states holds at most the cap the
    solver was called with (truncated marks the difference). States are sorted
    lexicographically.
    """

    ground_energy: float
    ground_states: np.ndarray
    degeneracy: int
    truncated: bool


def _coupling_components(n: int, J: Mapping[tuple[int, int], float]):
    adj: dict[int, list[int]] = {}
    for i, j in J:
        adj.setdefault(i, []).append(j)
        adj.setdefault(j, []).append(i)
    seen: set[int] = set()
    components: list[list[int]] = []
    singletons: list[int] = []
    for start in range(n):
        if start in seen:
            continue
        if start not in adj:
            singletons.append(start)
            continue
        seen.add(start)
        comp = [start]
        frontier = [start]
        while frontier:
            nxt = []
            for q in frontier:
                for r in adj[q]:
                    if r not in seen:
                        seen.add(r)
                        comp.append(r)
                        nxt.append(r)
            frontier = nxt
        components.append(sorted(comp))
    return components, singletons


def _sub_csr(members: list[int], h: np.ndarray, J: Mapping[tuple[int, int], float]):
    index = {q: t for t, q in enumerate(members)}
    m = len(members)
    h_sub = np.array([h[q] for q in members])
    J_sub: dict[tuple[int, int], float] = {}
    for (i, j), v in J.items():
        if i in index and j in index:
            a, b = index[i], index[j]
            key = (a, b) if a < b else (b, a)
            J_sub[key] = v
    return m, h_sub, J_sub


def _csr_arrays(m: int, J_sub: Mapping[tuple[int, int], float]):
    counts = np.zeros(m, dtype=np.int64)
    for i, j in J_sub:
        counts[i] += 1
        counts[j] += 1
    offsets = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    cols = np.zeros(max(int(offsets[-1]), 1), dtype=np.int64)
    vals = np.zeros(max(int(offsets[-1]), 1), dtype=np.float64)
    cursor = offsets[:-1].copy()
    for (i, j), v in sorted(J_sub.items()):
        cols[cursor[i]] = j
        vals[cursor[i]] = v
        cursor[i] += 1
        cols[cursor[j]] = i
        vals[cursor[j]] = v
        cursor[j] += 1
    return offsets, cols, vals


def _enumerate_ground(m, h_sub, J_sub, atol, cap):
    """(count, states) for a small subproblem via the Gray-code kernels."""
    offsets, cols, vals = _csr_arrays(m, J_sub)
    emin = _kernels.exact_min_energy(h_sub, offsets, cols, vals, m)
    out = np.zeros((cap, m), dtype=np.int8)
    count = int(_kernels.exact_collect(h_sub, offsets, cols, vals, m, emin, atol, out))
    return count, out[: min(count, cap)]


def solve_exact(
    instance: IsingInstance,
    max_component_size: int = 30,
    max_states: int = 4096,
    atol: float = 1e-9,
) -> ExactSolution:
    """Exhaustive ground-state search with exact degeneracy counting.

    The coupling graph is split into connected components, each enumerated
    independently (Gray-code updates, compiled); the guard limits the
    enumeration bits per component, so sparse instances over many more spins
    than the guard remain solvable. Components with no fields use spin-flip
    symmetry to halve the enumeration and are charged one bit less. Ground
    states within atol of the component minimum are collected; the assembled
    list is capped at max_states while degeneracy stays exact.
    """
    if max_states < 1:
        raise ValueError("max_states must be >= 1")
    n = instance.n
    components, singletons = _coupling_components(n, instance.J)
    for comp in components:
        # field-free components enumerate with one spin pinned, halving the
        # search, so the guard charges them one bit less
        bits = len(comp) - (0 if np.any(instance.h[comp]) else 1)
        if bits > max_component_size:
            raise SizeLimitError(
                f"connected component with {len(comp)} spins needs a "
                f"{bits}-bit exhaustive search, above the limit of "
                f"{max_component_size}"
            )

    # per block: (members, list-of-ground-rows (np int8), exact count)
    blocks: list[tuple[list[int], np.ndarray, int]] = []
    for q in singletons:
        if instance.h[q] > 0:
            blocks.append(([q], np.array([[-1]], dtype=np.int8), 1))
        elif instance.h[q] < 0:
            blocks.append(([q], np.array([[1]], dtype=np.int8), 1))
        else:
            blocks.append(([q], np.array([[1], [-1]], dtype=np.int8), 2))

    for comp in components:
        m, h_sub, J_sub = _sub_csr(comp, instance.h, instance.J)
        if not np.any(h_sub):
            # no fields: pin spin 0 up, enumerate the rest, mirror the result
            h_red = np.zeros(m - 1)
            J_red: dict[tuple[int, int], float] = {}
            for (a, b), v in J_sub.items():
                if a == 0:
                    h_red[b - 1] += v
                else:
                    J_red[(a - 1, b - 1)] = v
            count, states = _enumerate_ground(m - 1, h_red, J_red, atol, max_states)
            pinned = np.hstack(
                [np.ones((states.shape[0], 1), dtype=np.int8), states]
            )
            mirrored = np.vstack([pinned, -pinned])[:max_states]
            blocks.append((comp, mirrored, 2 * count))
        else:
            count, states = _enumerate_ground(m, h_sub, J_sub, atol, max_states)
            blocks.append((comp, states, count))

    degeneracy = 1
    for _, _, count in blocks:
        degeneracy *= count

    assembled: list[np.ndarray] = []
    for combo in itertools.islice(
        itertools.product(*(range(len(rows)) for _, rows, _ in blocks)), max_states
    ):
        state = np.zeros(n, dtype=np.int8)
        for (members, rows, _), pick in zip(blocks, combo):
            state[np.array(members)] = rows[pick]
        assembled.append(state)
    states_arr = np.array(assembled, dtype=np.int8)
    order = np.lexsort(states_arr.T[::-1])
    states_arr = states_arr[order]

    ground_energy = min(energy(instance, s) for s in states_arr)
    return ExactSolution(
        ground_energy=ground_energy,
        ground_states=states_arr,
        degeneracy=degeneracy,
        truncated=degeneracy > states_arr.shape[0],
    )


# ---------------------------------------------------------------------------
# Monte Carlo solvers
# ---------------------------------------------------------------------------


def solve_sa(instance: IsingInstance, config: SolverConfig) -> SampleSet:
    """Simulated annealing on a linear inverse-temperature ramp. With
    sweeps=0 the returned states are the uniform random initial ones.

    update_order='sequential' scans spins 0..n-1 each sweep; 'random' draws
    the visit sequence per sweep, which mixes degenerate configurations a
    fixed scan would deterministically toggle instead."""
    n = instance.n
    offsets, cols, vals = instance.adjacency_csr()
    betas = np.linspace(config.beta_initial, config.beta_final, config.sweeps)
    membership = None
    if config.clusters:
        membership = np.zeros((len(config.clusters), n), dtype=np.bool_)
        for c, members in enumerate(config.clusters):
            for q in members:
                if not 0 <= q < n:
                    raise ValueError(f"cluster spin {q} out of range")
                membership[c, q] = True
    states = np.empty((config.repetitions, n), dtype=np.int8)
    walls = np.empty(config.repetitions)
    for rep in range(config.repetitions):
        rng = _rep_rng(config.seed, rep)
        state = _random_state(rng, n)
        urand = rng.random((config.sweeps, n))
        tic = time.perf_counter()
        if config.update_order == "random":
            order = rng.integers(0, n, size=(config.sweeps, n))
            _kernels.sa_kernel_ordered(
                instance.h, offsets, cols, vals, state, betas, urand, order
            )
        elif membership is None:
            _kernels.sa_kernel(instance.h, offsets, cols, vals, state, betas, urand)
        else:
            u_cluster = rng.random((config.sweeps, membership.shape[0]))
            _kernels.sa_cluster_kernel(
                instance.h, offsets, cols, vals, state, betas, urand,
                membership, u_cluster,
            )
        walls[rep] = time.perf_counter() - tic
        states[rep] = state
    params = {
        "sweeps": config.sweeps,
        "beta_initial": config.beta_initial,
        "beta_final": config.beta_final,
        "cluster_moves": bool(config.clusters),
        "update_order": config.update_order,
    }
    return SampleSet.from_states(
        instance, states, "sa", params, seed=config.seed, wall_times=walls
    )


def _sweep_fractions(sweeps: int) -> np.ndarray:
    """Anneal fraction per sweep: s advances linearly and ends at exactly 1."""
    return (np.arange(sweeps) + 1.0) / max(sweeps, 1)


def solve_svmc(
    instance: IsingInstance,
    config: SolverConfig,
    schedule: Schedule | None = None,
) -> SampleSet:
    """Spin-vector Monte Carlo: O(2) rotors at fixed temperature following
    the anneal schedule; final angles project to spins by sign(cos), with
    cos = 0 mapping to +1."""
    schedule = schedule or default_schedule()
    n = instance.n
    offsets, cols, vals = instance.adjacency_csr()
    frac = _sweep_fractions(config.sweeps)
    a_arr = np.asarray(schedule.a(frac), dtype=np.float64)
    b_arr = np.asarray(schedule.b(frac), dtype=np.float64)
    beta = 1.0 / config.temperature
    states = np.empty((config.repetitions, n), dtype=np.int8)
    walls = np.empty(config.repetitions)
    for rep in range(config.repetitions):
        rng = _rep_rng(config.seed, rep)
        theta = rng.random(n) * np.pi
        u_prop = rng.random((config.sweeps, n))
        u_acc = rng.random((config.sweeps, n))
        tic = time.perf_counter()
        _kernels.svmc_kernel(
            instance.h, offsets, cols, vals, theta, a_arr, b_arr, beta,
            u_prop, u_acc,
        )
        walls[rep] = time.perf_counter() - tic
        states[rep] = np.where(np.cos(theta) >= 0.0, 1, -1).astype(np.int8)
    params = {"sweeps": config.sweeps, "temperature": config.temperature}
    return SampleSet.from_states(
        instance, states, "svmc", params, seed=config.seed, wall_times=walls
    )


def solve_sqa(
    instance: IsingInstance,
    config: SolverConfig,
    schedule: Schedule | None = None,
) -> SampleSet:
    """Path-integral simulated quantum annealing with periodic Trotter slices.

    The inter-slice coupling J_perp(s) = -ln(tanh(beta_p * A(s)))/(2*beta_p)
    follows from the standard Suzuki-Trotter mapping; the tanh argument is
    clamped away from 0 and 1 so early/late sweeps stay finite. The measured
    slice is slice 0 ("fixed") or the lowest-energy slice ("best")."""
    schedule = schedule or default_schedule()
    n = instance.n
    n_slices = config.trotter_slices
    offsets, cols, vals = instance.adjacency_csr()
    beta = 1.0 / config.temperature
    beta_p = beta / n_slices
    frac = _sweep_fractions(config.sweeps)
    a_arr = np.asarray(schedule.a(frac), dtype=np.float64)
    b_arr = np.asarray(schedule.b(frac), dtype=np.float64)
    tanh_val = np.clip(np.tanh(beta_p * a_arr), 1e-12, 1.0 - 1e-12)
    jperp_arr = -np.log(tanh_val) / (2.0 * beta_p)
    states = np.empty((config.repetitions, n), dtype=np.int8)
    walls = np.empty(config.repetitions)
    for rep in range(config.repetitions):
        rng = _rep_rng(config.seed, rep)
        slices = (1 - 2 * rng.integers(0, 2, size=(n_slices, n))).astype(np.int8)
        urand = rng.random((config.sweeps, n_slices, n))
        tic = time.perf_counter()
        _kernels.sqa_kernel(
            instance.h, offsets, cols, vals, slices, b_arr, jperp_arr,
            beta_p, urand,
        )
        walls[rep] = time.perf_counter() - tic
        if config.slice_mode == "best":
            slice_energies = energies(instance, slices)
            states[rep] = slices[int(np.argmin(slice_energies))]
        else:
            states[rep] = slices[0]
    params = {
        "sweeps": config.sweeps,
        "temperature": config.temperature,
        "trotter_slices": n_slices,
        "slice_mode": config.slice_mode,
    }
    return SampleSet.from_states(
        instance, states, "sqa", params, seed=config.seed, wall_times=walls
    )


def solve_pt(instance: IsingInstance, config: SolverConfig) -> SampleSet:
    """Parallel tempering; each repetition runs an independent ladder and
    reports the final state of the coldest rung."""
    if config.temperature_ladder is None:
        raise ValueError("parallel tempering requires a temperature_ladder")
    n = instance.n
    offsets, cols, vals = instance.adjacency_csr()
    i_idx, j_idx, j_val = instance.coupler_arrays()
    betas = 1.0 / np.asarray(config.temperature_ladder)
    n_rungs = len(betas)
    states = np.empty((config.repetitions, n), dtype=np.int8)
    walls = np.empty(config.repetitions)
    for rep in range(config.repetitions):
        rng = _rep_rng(config.seed, rep)
        rung_states = (1 - 2 * rng.integers(0, 2, size=(n_rungs, n))).astype(np.int8)
        urand = rng.random((config.sweeps, n_rungs, n))
        u_swap = rng.random((config.sweeps, n_rungs - 1))
        tic = time.perf_counter()
        _kernels.pt_kernel(
            instance.h, offsets, cols, vals, i_idx, j_idx, j_val,
            rung_states, betas, urand, u_swap,
        )
        walls[rep] = time.perf_counter() - tic
        states[rep] = rung_states[-1]
    params = {
        "sweeps": config.sweeps,
        "temperature_ladder": list(config.temperature_ladder),
    }
    return SampleSet.from_states(
        instance, states, "pt", params, seed=config.seed, wall_times=walls
    )


def make_stub_solver(
    success_probability,
    ground_state: Sequence[int],
    excited_state: Sequence[int],
) -> Solver:
    """A synthetic solver for harness validation: each repetition returns the
    given ground state with probability p and the excited state otherwise.

    success_probability may be a float, a {sweeps: p} mapping, or a callable
    of the sweep count, so scans see a controlled p(sweeps) curve.
    """
    ground = np.asarray(ground_state, dtype=np.int8)
    excited = np.asarray(excited_state, dtype=np.int8)
    if not callable(success_probability) and not isinstance(
        success_probability, Mapping
    ):
        if not 0.0 <= float(success_probability) <= 1.0:
            raise ValueError("success probability must lie in [0, 1]")

    def solver(instance: IsingInstance, config: SolverConfig) -> SampleSet:
        if callable(success_probability):
            p = float(success_probability(config.sweeps))
        elif isinstance(success_probability, Mapping):
            p = float(success_probability[config.sweeps])
        else:
            p = float(success_probability)
        if not 0.0 <= p <= 1.0:
            raise ValueError("success probability must lie in [0, 1]")
        states = np.empty((config.repetitions, instance.n), dtype=np.int8)
        for rep in range(config.repetitions):
            rng = _rep_rng(config.seed, rep)
            states[rep] = ground if rng.random() < p else excited
        return SampleSet.from_states(
            instance, states, "stub", {"sweeps": config.sweeps, "p": p},
            seed=config.seed,
        )

    return solver


SOLVERS: dict[str, Solver] = {
    "sa": solve_sa,
    "svmc": solve_svmc,
    "sqa": solve_sqa,
    "pt": solve_pt,
}
