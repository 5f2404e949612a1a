"""Ising instances, planted-instance generators, gauges, and anneal schedules.

Energy convention throughout:

    E(s) = sum_i h_i s_i + sum_{i<j} J_ij s_i s_j,   s_i in {-1, +1}

so a *negative* J_ij is ferromagnetic (rewards aligned spins).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .topology import HardwareGraph


class GenerationError(RuntimeError):
    """Raised when a randomized generator cannot satisfy its constraints."""


def _normalize_couplings(n: int, J) -> dict[tuple[int, int], float]:
    out: dict[tuple[int, int], float] = {}
    for (i, j), val in J.items():
        i, j = int(i), int(j)
        if i == j:
            raise ValueError(f"self-coupling on spin {i}")
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"coupler ({i}, {j}) out of range for n={n}")
        key = (i, j) if i < j else (j, i)
        if key in out:
            raise ValueError(f"duplicate coupler {key}")
        val = float(val)
        if not math.isfinite(val):
            raise ValueError(f"coupler {key} has non-finite value {val}")
        out[key] = val
    return out


@dataclass
class IsingInstance:
    """An Ising problem. Treated as immutable after construction.

    planted, when set, is a configuration whose energy is known_ground_energy;
    generators that plant a ground state set both.
    """

    n: int
    h: np.ndarray
    J: dict[tuple[int, int], float]
    planted: np.ndarray | None = None
    known_ground_energy: float | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        self.h = np.asarray(self.h, dtype=np.float64)
        if self.h.shape != (self.n,):
            raise ValueError(f"h must have shape ({self.n},), got {self.h.shape}")
        if not np.all(np.isfinite(self.h)):
            raise ValueError("h must be finite")
        self.J = _normalize_couplings(self.n, self.J)
        keys = sorted(self.J)
        self._i_idx = np.fromiter((k[0] for k in keys), dtype=np.int64, count=len(keys))
        self._j_idx = np.fromiter((k[1] for k in keys), dtype=np.int64, count=len(keys))
        self._j_val = np.fromiter((self.J[k] for k in keys), dtype=np.float64, count=len(keys))
        if self.planted is not None:
            self.planted = np.asarray(self.planted, dtype=np.int8)
            if self.planted.shape != (self.n,):
                raise ValueError("planted state has wrong shape")
            if not np.all(np.abs(self.planted) == 1):
                raise ValueError("planted state must be +/-1 valued")
            if self.known_ground_energy is not None:
                e = energy(self, self.planted)
                if e != self.known_ground_energy:
                    raise ValueError(
                        f"planted state has energy {e}, not the declared "
                        f"ground energy {self.known_ground_energy}"
                    )

    def coupler_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Couplers as (i, j, value) arrays in sorted key order."""
        return self._i_idx, self._j_idx, self._j_val

    def adjacency_csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Neighbor lists in CSR form (offsets, neighbor ids, coupling values)."""
        counts = np.zeros(self.n, dtype=np.int64)
        for i, j in self.J:
            counts[i] += 1
            counts[j] += 1
        offsets = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        cols = np.zeros(offsets[-1], dtype=np.int64)
        vals = np.zeros(offsets[-1], dtype=np.float64)
        cursor = offsets[:-1].copy()
        for (i, j), v in sorted(self.J.items()):
            cols[cursor[i]] = j
            vals[cursor[i]] = v
            cursor[i] += 1
            cols[cursor[j]] = i
            vals[cursor[j]] = v
            cursor[j] += 1
        return offsets, cols, vals

    @property
    def num_couplers(self) -> int:
        return len(self.J)

    def max_abs_h(self) -> float:
        return float(np.max(np.abs(self.h))) if self.n else 0.0

    def max_abs_j(self) -> float:
        return max((abs(v) for v in self.J.values()), default=0.0)


def energy(instance: IsingInstance, state: Sequence[int]) -> float:
    """Ising energy of a +/-1 configuration.

    The reduction order (field dot product, then couplers in sorted key order,
    pairwise-summed) is fixed, which makes energies of gauge-equivalent
    configurations agree bit for bit.
    """
    s = np.asarray(state, dtype=np.float64)
    i_idx, j_idx, j_val = instance.coupler_arrays()
    e = float(np.dot(instance.h, s))
    if len(j_val):
        e += float(np.sum(j_val * s[i_idx] * s[j_idx]))
    return e


def energies(instance: IsingInstance, states: np.ndarray) -> np.ndarray:
    """energy() applied row-wise; same reduction order, hence same floats."""
    return np.array([energy(instance, row) for row in np.atleast_2d(states)])


def gauge_transform(instance: IsingInstance, gauge: Sequence[int]) -> IsingInstance:
    """Apply a +/-1 gauge a: h_i -> a_i h_i, J_ij -> a_i a_j J_ij.

    The spectrum is untouched; state s of the original corresponds to a*s of
    the transformed instance. Ground energy and metadata carry over.
    """
    a = np.asarray(gauge, dtype=np.int8)
    if a.shape != (instance.n,) or not np.all(np.abs(a) == 1):
        raise ValueError("gauge must be a +/-1 vector of length n")
    h = instance.h * a
    J = {(i, j): v * a[i] * a[j] for (i, j), v in instance.J.items()}
    planted = instance.planted * a if instance.planted is not None else None
    return IsingInstance(
        n=instance.n,
        h=h,
        J=J,
        planted=planted,
        known_ground_energy=instance.known_ground_energy,
        metadata=dict(instance.metadata),
    )


def apply_gauge_to_states(states: np.ndarray, gauge: Sequence[int]) -> np.ndarray:
    """Map states of a gauged instance back to the original frame (involution)."""
    a = np.asarray(gauge, dtype=np.int8)
    return (np.atleast_2d(states) * a).astype(np.int8)


def random_gauges(n: int, count: int, seed: int) -> np.ndarray:
    """count random +/-1 gauge vectors; a single gauge is the identity."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if count == 1:
        return np.ones((1, n), dtype=np.int8)
    rng = np.random.default_rng(seed)
    return (1 - 2 * rng.integers(0, 2, size=(count, n))).astype(np.int8)


def renormalize(
    instance: IsingInstance,
    h_max: float = 2.0,
    j_max: float = 1.0,
) -> IsingInstance:
    """Scale h and J down (never up) onto the device range |h| <= h_max,
    |J| <= j_max, dividing both by the same factor so the spectrum only
    rescales. known_ground_energy is recomputed from the planted state when
    one is present, otherwise divided by the same factor."""
    if h_max <= 0 or j_max <= 0:
        raise ValueError("ranges must be positive")
    lam = max(1.0, instance.max_abs_h() / h_max, instance.max_abs_j() / j_max)
    if lam == 1.0:
        return instance
    h = instance.h / lam
    J = {k: v / lam for k, v in instance.J.items()}
    metadata = dict(instance.metadata)
    metadata["renormalized_by"] = lam
    ground = None
    if instance.known_ground_energy is not None:
        if instance.planted is not None:
            probe = IsingInstance(n=instance.n, h=h, J=J, metadata=metadata)
            ground = energy(probe, instance.planted)
        else:
            ground = instance.known_ground_energy / lam
    return IsingInstance(
        n=instance.n,
        h=h,
        J=J,
        planted=None if instance.planted is None else instance.planted.copy(),
        known_ground_energy=ground,
        metadata=metadata,
    )


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def gen_random_pm1(graph: HardwareGraph, seed: int) -> IsingInstance:
    """J_ij drawn uniformly from {-1, +1} on every active coupler; h = 0."""
    rng = np.random.default_rng(seed)
    J = {}
    for pair in graph.active_couplers:
        J[pair] = -1.0 if rng.random() < 0.5 else 1.0
    return IsingInstance(
        n=graph.n_sites,
        h=np.zeros(graph.n_sites),
        J=J,
        metadata={"generator": "random_pm1", "seed": seed, "grid_size": graph.grid_size},
    )


def gen_range_k(graph: HardwareGraph, k: int, seed: int) -> IsingInstance:
    """J_ij uniform over {+/-1/k, +/-2/k, ..., +/-k/k} on active couplers; h = 0."""
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = np.random.default_rng(seed)
    J = {}
    for pair in graph.active_couplers:
        magnitude = int(rng.integers(1, k + 1)) / k
        sign = -1.0 if rng.random() < 0.5 else 1.0
        J[pair] = sign * magnitude
    return IsingInstance(
        n=graph.n_sites,
        h=np.zeros(graph.n_sites),
        J=J,
        metadata={
            "generator": "range_k",
            "seed": seed,
            "k": k,
            "grid_size": graph.grid_size,
        },
    )


def _walk_until_loop(
    rng: np.random.Generator,
    graph: HardwareGraph,
    max_steps: int,
) -> list[int] | None:
    """Random walk (no immediate backtracking) until the first self-intersection;
    returns the closed cycle as a vertex list, or None if the walk stalled."""
    active = graph.active_qubits
    start = int(active[rng.integers(0, len(active))])
    path = [start]
    index_of = {start: 0}
    prev = -1
    for _ in range(max_steps):
        here = path[-1]
        options = [q for q in graph.neighbors(here) if q != prev]
        if not options:
            return None
        nxt = int(options[rng.integers(0, len(options))])
        if nxt in index_of:
            return path[index_of[nxt]:]
        index_of[nxt] = len(path)
        path.append(nxt)
        prev = here
    return None


def gen_frustrated_loops(
    graph: HardwareGraph,
    alpha: float,
    seed: int,
    coupler_cap: float = 3.0,
    planted: Sequence[int] | None = None,
) -> IsingInstance:
    """Planted-solution instance built from M = round(alpha * N_active) random
    frustrated loops.

    Each loop contributes L-1 couplings satisfied by the planted configuration
    and one violated coupling (chosen uniformly on the loop), for a loop ground
    energy of -(L-2). Couplings accumulate additively; a loop that would push
    any |J| beyond coupler_cap is discarded and redrawn. The planted
    configuration is a ground state with energy sum_m -(L_m - 2).
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if coupler_cap < 1:
        raise ValueError("coupler_cap must be >= 1")
    rng = np.random.default_rng(seed)
    n = graph.n_sites
    n_active = graph.n_active_qubits
    if planted is None:
        s_star = (1 - 2 * rng.integers(0, 2, size=n)).astype(np.int8)
    else:
        s_star = np.asarray(planted, dtype=np.int8)
        if s_star.shape != (n,) or not np.all(np.abs(s_star) == 1):
            raise ValueError("planted must be a +/-1 vector over all sites")

    m_loops = int(round(alpha * n_active))
    J: dict[tuple[int, int], float] = {}
    ground = 0.0
    rejections = 0
    budget = 100 * max(m_loops, 1)
    placed = 0
    lengths: list[int] = []
    while placed < m_loops:
        if rejections > budget:
            raise GenerationError(
                f"frustrated-loop generation stalled after {rejections} rejected "
                f"loops (alpha={alpha}, coupler_cap={coupler_cap}); the graph is "
                "too constrained for these parameters"
            )
        cycle = _walk_until_loop(rng, graph, max_steps=2 * n)
        if cycle is None:
            rejections += 1
            continue
        length = len(cycle)
        edges = [
            (cycle[t], cycle[(t + 1) % length]) for t in range(length)
        ]
        violated = int(rng.integers(0, length))
        updates: dict[tuple[int, int], float] = {}
        for t, (u, v) in enumerate(edges):
            key = (u, v) if u < v else (v, u)
            sign = 1.0 if t == violated else -1.0
            updates[key] = updates.get(key, 0.0) + sign * s_star[u] * s_star[v]
        if any(abs(J.get(k, 0.0) + dv) > coupler_cap for k, dv in updates.items()):
            rejections += 1
            continue
        for k, dv in updates.items():
            new = J.get(k, 0.0) + dv
            if new == 0.0:
                J.pop(k, None)
            else:
                J[k] = new
        ground += -(length - 2)
        placed += 1
        lengths.append(length)

    inst = IsingInstance(
        n=n,
        h=np.zeros(n),
        J=J,
        metadata={
            "generator": "frustrated_loops",
            "seed": seed,
            "alpha": alpha,
            "coupler_cap": coupler_cap,
            "n_loops": m_loops,
            "loop_lengths": lengths,
            "grid_size": graph.grid_size,
        },
    )
    # the declared ground energy must match energy(planted) bit for bit
    e_planted = energy(inst, s_star)
    if e_planted != float(ground):
        raise GenerationError(
            f"planted energy {e_planted} deviates from loop budget {ground}"
        )
    return replace(inst, planted=s_star, known_ground_energy=e_planted)


def gen_weak_strong(h_weak: float = 0.44) -> IsingInstance:
    """Two ferromagnetically coupled K_{4,4} cells (16 spins): qubits 0-7 form
    the weak cell with field -h_weak, qubits 8-15 the strong cell with field
    -1. All 36 couplers are -1. The all-up state is the unique ground state;
    the weak-cell-flipped state is a local minimum for 0 < h_weak < 0.5."""
    if not 0.0 < h_weak < 0.5:
        raise ValueError("h_weak must lie strictly between 0 and 0.5")
    J: dict[tuple[int, int], float] = {}
    for base in (0, 8):
        for a in range(4):
            for b in range(4, 8):
                J[(base + a, base + b)] = -1.0
    for b in range(4, 8):
        J[(b, 8 + b)] = -1.0
    h = np.concatenate([np.full(8, -h_weak), np.full(8, -1.0)])
    planted = np.ones(16, dtype=np.int8)
    inst = IsingInstance(
        n=16,
        h=h,
        J=J,
        metadata={"generator": "weak_strong", "h_weak": h_weak},
    )
    return replace(
        inst, planted=planted, known_ground_energy=energy(inst, planted)
    )


def gen_signature(n_core: int = 4) -> IsingInstance:
    """Ring-plus-spokes gadget whose ground space splits into 2**n_core
    clustered states (core all up, outer spins free) plus one isolated state
    (all down), all at energy -2*n_core.

    Spins 0..n_core-1 form a ferromagnetic ring with field -1; spin n_core+i
    hangs off core spin i through a ferromagnetic spoke and carries field +1.
    For a core-up configuration the outer field and the spoke cancel exactly,
    which is what makes the outer spins free.
    """
    if n_core < 3:
        raise ValueError("n_core must be >= 3 (the core is a ring)")
    J: dict[tuple[int, int], float] = {}
    for i in range(n_core):
        a, b = i, (i + 1) % n_core
        J[(min(a, b), max(a, b))] = -1.0
    for i in range(n_core):
        J[(i, n_core + i)] = -1.0
    h = np.concatenate([np.full(n_core, -1.0), np.full(n_core, 1.0)])
    return IsingInstance(
        n=2 * n_core,
        h=h,
        J=J,
        known_ground_energy=float(-2 * n_core),
        metadata={"generator": "signature", "n_core": n_core},
    )


def signature_states(n_core: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """(cluster_states, isolated_state) of the signature gadget: the
    2**n_core core-up states and the single all-down state."""
    outer = ((np.arange(2**n_core)[:, None] >> np.arange(n_core)) & 1).astype(np.int8)
    cluster = np.concatenate(
        [np.ones((2**n_core, n_core), dtype=np.int8), 1 - 2 * outer], axis=1
    )
    isolated = -np.ones(2 * n_core, dtype=np.int8)
    return cluster, isolated


# ---------------------------------------------------------------------------
# anneal schedules
# ---------------------------------------------------------------------------


@dataclass
class Schedule:
    """Transverse-field amplitude A(s) and problem amplitude B(s) in h*GHz,
    sampled on a grid of the dimensionless anneal fraction s in [0, 1] and
    interpolated linearly in between."""

    s_values: np.ndarray
    a_values: np.ndarray
    b_values: np.ndarray

    def __post_init__(self):
        self.s_values = np.asarray(self.s_values, dtype=np.float64)
        self.a_values = np.asarray(self.a_values, dtype=np.float64)
        self.b_values = np.asarray(self.b_values, dtype=np.float64)
        if not (self.s_values.shape == self.a_values.shape == self.b_values.shape):
            raise ValueError("schedule columns must have equal length")
        if self.s_values.ndim != 1 or len(self.s_values) < 2:
            raise ValueError("schedule needs at least two sample points")
        if self.s_values[0] != 0.0 or self.s_values[-1] != 1.0:
            raise ValueError("schedule must span s = 0 to s = 1")
        if np.any(np.diff(self.s_values) <= 0):
            raise ValueError("schedule s grid must be strictly increasing")
        if np.any(self.a_values < 0) or np.any(self.b_values < 0):
            raise ValueError("schedule amplitudes must be nonnegative")
        if np.any(np.diff(self.a_values) > 0):
            raise ValueError("A(s) must be nonincreasing")
        if np.any(np.diff(self.b_values) < 0):
            raise ValueError("B(s) must be nondecreasing")

    def a(self, s) -> float | np.ndarray:
        out = np.interp(s, self.s_values, self.a_values)
        return float(out) if np.isscalar(s) else out

    def b(self, s) -> float | np.ndarray:
        out = np.interp(s, self.s_values, self.b_values)
        return float(out) if np.isscalar(s) else out


def default_schedule() -> Schedule:
    """The linear reference schedule A(s) = 1 - s, B(s) = s (h*GHz)."""
    return Schedule(
        s_values=np.array([0.0, 1.0]),
        a_values=np.array([1.0, 0.0]),
        b_values=np.array([0.0, 1.0]),
    )
