"""Repetition-style quantum annealing correction (three problem copies plus a
penalty qubit) and the nested variant (all-to-all copies with inter-copy
penalties), with majority and energy-minimizing decoders."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from . import bench
from .instances import IsingInstance, energy
from .solvers import SolverConfig, Solver
from .topology import EmbeddingError, HardwareGraph


@dataclass
class DecodedSample:
    """One decoded repetition: the logical state, which logical qubits had
    non-unanimous copies, and which had exactly tied votes."""

    state: np.ndarray
    broken: tuple[int, ...] = ()
    ties: tuple[int, ...] = ()


def _majority_refine(
    logical: IsingInstance,
    state: np.ndarray,
    broken: Sequence[int],
    seed: int,
) -> np.ndarray:
    """Greedy descent over the broken qubits: repeatedly set each to the sign
    minimizing its local energy, flipping only on strict improvement, until a
    full pass changes nothing. Visits follow a seed-shuffled order."""
    state = state.copy()
    order = np.array(sorted(broken), dtype=np.int64)
    if len(order) == 0:
        return state
    rng = np.random.default_rng(seed)
    rng.shuffle(order)
    offsets, cols, vals = logical.adjacency_csr()
    changed = True
    while changed:
        changed = False
        for i in order:
            local = logical.h[i]
            for t in range(offsets[i], offsets[i + 1]):
                local += vals[t] * state[cols[t]]
            if state[i] * local > 0:  # flipping strictly lowers the energy
                state[i] = -state[i]
                changed = True
    return state


@dataclass
class QacCode:
    """Three problem copies per logical qubit, ferromagnetically tied to one
    penalty qubit.

    logical_qubits maps logical id -> ((copy0, copy1, copy2), penalty or
    None); a missing penalty qubit simply drops its penalty couplers.
    Problem couplings are scaled by alpha and placed copy-wise; each penalty
    coupler has strength -beta (scaled per qubit in "scaled_to_mean" mode by
    the mean incident |J|).
    """

    logical_qubits: dict[int, tuple[tuple[int, int, int], int | None]]
    alpha: float = 1.0
    beta: float = 0.2
    penalty_mode: str = "uniform"

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.penalty_mode not in ("uniform", "scaled_to_mean"):
            raise ValueError("penalty_mode must be 'uniform' or 'scaled_to_mean'")
        claimed: dict[int, int] = {}
        for lid, (triple, penalty) in sorted(self.logical_qubits.items()):
            if len(triple) != 3 or len(set(triple)) != 3:
                raise ValueError(f"logical qubit {lid} needs three distinct copies")
            for q in triple + ((penalty,) if penalty is not None else ()):
                if q in claimed:
                    raise ValueError(
                        f"physical qubit {q} claimed by logical qubits "
                        f"{claimed[q]} and {lid}"
                    )
                claimed[q] = lid

    @classmethod
    def dense(
        cls,
        n_logical: int,
        alpha: float = 1.0,
        beta: float = 0.2,
        penalty_mode: str = "uniform",
        with_penalty: bool = True,
    ) -> "QacCode":
        """Block layout: logical i uses physical 4i..4i+2 plus penalty 4i+3."""
        return cls(
            logical_qubits={
                i: ((4 * i, 4 * i + 1, 4 * i + 2), 4 * i + 3 if with_penalty else None)
                for i in range(n_logical)
            },
            alpha=alpha,
            beta=beta,
            penalty_mode=penalty_mode,
        )

    def n_physical(self) -> int:
        top = 0
        for triple, penalty in self.logical_qubits.values():
            top = max(top, *triple)
            if penalty is not None:
                top = max(top, penalty)
        return top + 1

    def _beta_for(self, lid: int, logical: IsingInstance) -> float:
        if self.penalty_mode == "uniform":
            return self.beta
        incident = [abs(v) for (i, j), v in logical.J.items() if lid in (i, j)]
        scale = float(np.mean(incident)) if incident else 1.0
        return self.beta * scale

    def encode(
        self, logical: IsingInstance, graph: HardwareGraph | None = None
    ) -> IsingInstance:
        """Physical instance: alpha-scaled fields on each copy, alpha-scaled
        copy-wise couplings, and -beta penalty couplers. With a hardware
        graph, problem placements must land on active couplers (an error if
        not), while unavailable penalty couplers are dropped."""
        missing = [i for i in range(logical.n) if i not in self.logical_qubits]
        if missing:
            raise ValueError(f"code does not cover logical qubits {missing}")
        n_phys = graph.n_sites if graph is not None else self.n_physical()
        h_phys = np.zeros(n_phys)
        J_phys: dict[tuple[int, int], float] = {}
        owner: dict[tuple[int, int], str] = {}

        def place(i: int, j: int, value: float, label: str, required: bool) -> None:
            key = (i, j) if i < j else (j, i)
            if graph is not None and not graph.is_active_coupler(*key):
                if required:
                    raise EmbeddingError(
                        f"{label} needs hardware coupler {key}, which is not active"
                    )
                return
            if key in owner:
                raise ValueError(
                    f"physical coupler {key} claimed twice: {owner[key]} and {label}"
                )
            owner[key] = label
            J_phys[key] = value

        for lid in range(logical.n):
            triple, penalty = self.logical_qubits[lid]
            if graph is not None:
                for q in triple:
                    if not graph.is_active_qubit(q):
                        raise EmbeddingError(
                            f"logical qubit {lid} needs inactive physical qubit {q}"
                        )
                if penalty is not None and not graph.is_active_qubit(penalty):
                    penalty = None
            for q in triple:
                h_phys[q] += self.alpha * logical.h[lid]
            if penalty is not None:
                b = self._beta_for(lid, logical)
                for q in triple:
                    place(q, penalty, -b, f"penalty {lid}", required=False)
        for (i, j), val in sorted(logical.J.items()):
            ti, _ = self.logical_qubits[i]
            tj, _ = self.logical_qubits[j]
            for c in range(3):
                place(
                    ti[c], tj[c], self.alpha * val,
                    f"coupling ({i}, {j}) copy {c}", required=True,
                )

        return IsingInstance(
            n=n_phys,
            h=h_phys,
            J=J_phys,
            metadata={"code": self.describe()},
        )

    def encode_state(self, logical_state: Sequence[int], n_phys: int | None = None) -> np.ndarray:
        """The codeword for a logical configuration: every copy and penalty
        qubit takes the logical value; unused physical qubits sit at +1."""
        out = np.ones(n_phys or self.n_physical(), dtype=np.int8)
        for lid, (triple, penalty) in self.logical_qubits.items():
            for q in triple:
                out[q] = logical_state[lid]
            if penalty is not None:
                out[penalty] = logical_state[lid]
        return out

    def decode(
        self,
        physical_state: Sequence[int],
        logical: IsingInstance,
        strategy: str = "majority",
        seed: int = 0,
    ) -> DecodedSample:
        """Majority vote over the three copies; "energy_min" then greedily
        re-optimizes the broken qubits. Three copies never tie."""
        if strategy not in ("majority", "energy_min"):
            raise ValueError("strategy must be 'majority' or 'energy_min'")
        phys = np.asarray(physical_state)
        state = np.empty(logical.n, dtype=np.int8)
        broken = []
        for lid in range(logical.n):
            triple, _ = self.logical_qubits[lid]
            votes = int(phys[triple[0]]) + int(phys[triple[1]]) + int(phys[triple[2]])
            state[lid] = 1 if votes > 0 else -1
            if abs(votes) != 3:
                broken.append(lid)
        if strategy == "energy_min" and broken:
            state = _majority_refine(logical, state, broken, seed)
        return DecodedSample(state=state, broken=tuple(broken))

    def describe(self) -> dict:
        return {
            "kind": "qac",
            "alpha": self.alpha,
            "beta": self.beta,
            "penalty_mode": self.penalty_mode,
            "logical_qubits": {
                str(lid): [list(triple), penalty]
                for lid, (triple, penalty) in sorted(self.logical_qubits.items())
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QacCode":
        return cls(
            logical_qubits={
                int(lid): (tuple(entry[0]), entry[1])
                for lid, entry in data["logical_qubits"].items()
            },
            alpha=data["alpha"],
            beta=data["beta"],
            penalty_mode=data["penalty_mode"],
        )


# in-cell layouts: (problem locals, penalty local) per logical side
CELL_LAYOUT = (((0, 1, 2), 7), ((4, 5, 6), 3))
SQUARE_LAYOUT = (((0, 1, 4), 5), ((2, 3, 6), 7))


def chimera_cell_code(
    graph: HardwareGraph,
    alpha: float = 1.0,
    beta: float = 0.2,
    penalty_mode: str = "uniform",
    layout: tuple = CELL_LAYOUT,
) -> tuple[QacCode, dict[tuple[int, int, int], int]]:
    """Tile a code layout over every unit cell: each cell hosts two logical
    qubits, one per partition, with the penalty on the opposite partition.

    Cells missing a problem qubit are skipped; a missing penalty qubit keeps
    the logical qubit but drops its penalty. Returns the code and a map from
    (row, col, side) to logical id.
    """
    logical_qubits: dict[int, tuple[tuple[int, int, int], int | None]] = {}
    cell_map: dict[tuple[int, int, int], int] = {}
    lid = 0
    for row in range(graph.grid_size):
        for col in range(graph.grid_size):
            for side, (problems, pen_local) in enumerate(layout):
                triple = tuple(graph.qubit(row, col, p) for p in problems)
                if not all(graph.is_active_qubit(q) for q in triple):
                    continue
                penalty = graph.qubit(row, col, pen_local)
                if not graph.is_active_qubit(penalty):
                    penalty = None
                logical_qubits[lid] = (triple, penalty)
                cell_map[(row, col, side)] = lid
                lid += 1
    return (
        QacCode(
            logical_qubits=logical_qubits,
            alpha=alpha,
            beta=beta,
            penalty_mode=penalty_mode,
        ),
        cell_map,
    )


@dataclass
class NestedCode:
    """All-to-all nesting: nesting_level full copies of a complete logical
    problem, every cross-copy coupling carried, copies of one logical qubit
    tied by -gamma penalties. Fields are boosted by field_boost (default: the
    nesting level), physical qubit (i, c) living at index c * n_logical + i."""

    n_logical: int
    nesting_level: int
    gamma: float
    field_boost: float | None = None

    def __post_init__(self):
        if self.n_logical < 1:
            raise ValueError("n_logical must be >= 1")
        if self.nesting_level < 1:
            raise ValueError("nesting_level must be >= 1")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")

    def boost(self) -> float:
        return float(self.nesting_level if self.field_boost is None else self.field_boost)

    def physical(self, i: int, c: int) -> int:
        return c * self.n_logical + i

    def n_physical(self) -> int:
        return self.n_logical * self.nesting_level

    def encode(self, logical: IsingInstance, graph=None) -> IsingInstance:
        """Requires a complete logical graph (explicit zeros allowed), since
        every copy pair of every logical pair carries a coupling."""
        if graph is not None:
            raise ValueError(
                "nested encoding targets all-to-all connectivity; compose with "
                "a clique embedding to reach hardware"
            )
        if logical.n != self.n_logical:
            raise ValueError("code size does not match the logical instance")
        for i in range(logical.n):
            for j in range(i + 1, logical.n):
                if (i, j) not in logical.J:
                    raise ValueError(
                        f"nested encoding needs a complete logical graph; "
                        f"coupling ({i}, {j}) is absent (an explicit zero is fine)"
                    )
        n_copies = self.nesting_level
        h_phys = np.zeros(self.n_physical())
        J_phys: dict[tuple[int, int], float] = {}
        for i in range(logical.n):
            for c in range(n_copies):
                h_phys[self.physical(i, c)] = self.boost() * logical.h[i]
        for (i, j), val in sorted(logical.J.items()):
            for ca in range(n_copies):
                for cb in range(n_copies):
                    a, b = self.physical(i, ca), self.physical(j, cb)
                    key = (a, b) if a < b else (b, a)
                    J_phys[key] = val
        for i in range(logical.n):
            for ca in range(n_copies):
                for cb in range(ca + 1, n_copies):
                    J_phys[(self.physical(i, ca), self.physical(i, cb))] = -self.gamma
        return IsingInstance(
            n=self.n_physical(),
            h=h_phys,
            J=J_phys,
            metadata={"code": self.describe()},
        )

    def encode_state(self, logical_state: Sequence[int]) -> np.ndarray:
        out = np.empty(self.n_physical(), dtype=np.int8)
        for i in range(self.n_logical):
            for c in range(self.nesting_level):
                out[self.physical(i, c)] = logical_state[i]
        return out

    def decode(
        self,
        physical_state: Sequence[int],
        logical: IsingInstance,
        strategy: str = "majority",
        seed: int = 0,
    ) -> DecodedSample:
        """Majority vote over the copies. Even nesting levels can tie; tied
        qubits are flagged and then filled by the local-field rule (visiting
        them in a seed-shuffled order) before any energy_min refinement."""
        if strategy not in ("majority", "energy_min"):
            raise ValueError("strategy must be 'majority' or 'energy_min'")
        phys = np.asarray(physical_state)
        state = np.empty(logical.n, dtype=np.int8)
        broken: list[int] = []
        ties: list[int] = []
        for i in range(logical.n):
            votes = sum(int(phys[self.physical(i, c)]) for c in range(self.nesting_level))
            if votes > 0:
                state[i] = 1
            elif votes < 0:
                state[i] = -1
            else:
                state[i] = 1  # provisional; resolved below
                ties.append(i)
            if abs(votes) != self.nesting_level:
                broken.append(i)
        if ties:
            order = np.array(ties, dtype=np.int64)
            rng = np.random.default_rng(seed)
            rng.shuffle(order)
            offsets, cols, vals = logical.adjacency_csr()
            for i in order:
                local = logical.h[i]
                for t in range(offsets[i], offsets[i + 1]):
                    local += vals[t] * state[cols[t]]
                state[i] = -1 if local > 0 else 1
        if strategy == "energy_min" and broken:
            state = _majority_refine(logical, state, broken, seed)
        return DecodedSample(state=state, broken=tuple(broken), ties=tuple(ties))

    def describe(self) -> dict:
        return {
            "kind": "nqac",
            "n_logical": self.n_logical,
            "nesting_level": self.nesting_level,
            "gamma": self.gamma,
            "field_boost": self.field_boost,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NestedCode":
        return cls(
            n_logical=data["n_logical"],
            nesting_level=data["nesting_level"],
            gamma=data["gamma"],
            field_boost=data.get("field_boost"),
        )


def code_from_dict(data: dict):
    if data.get("kind") == "qac":
        return QacCode.from_dict(data)
    if data.get("kind") == "nqac":
        return NestedCode.from_dict(data)
    raise ValueError(f"unknown code kind: {data.get('kind')!r}")


def decoded_success_prob(
    samples,
    code,
    logical: IsingInstance,
    ground_energy: float,
    strategy: str = "energy_min",
    tolerance: float = 0.0,
    seed: int = 0,
) -> tuple[float, np.ndarray]:
    """Decode every repetition and return (success fraction, indicator array)."""
    if samples.n_reps == 0:
        raise ValueError("empty sample set")
    hits = np.empty(samples.n_reps)
    for r in range(samples.n_reps):
        decoded = code.decode(samples.states[r], logical, strategy=strategy, seed=seed)
        hits[r] = 1.0 if energy(logical, decoded.state) <= ground_energy + tolerance else 0.0
    return float(np.mean(hits)), hits


def penalty_scan(
    logical: IsingInstance,
    penalty_values: Sequence[float],
    code_factory: Callable[[float], "QacCode | NestedCode"],
    solver: Solver,
    config: SolverConfig,
    decode_strategy: str = "energy_min",
    tolerance: float = 0.0,
    n_boot: int = 500,
    level: float = 0.95,
    seed: int = 0,
) -> bench.BenchReport:
    """Decoded success probability as a function of the penalty strength.

    Each grid point encodes with code_factory(value), solves on a derived
    seed, decodes, and bootstraps a CI over the per-repetition success
    indicators. The estimate is the best penalty value; a best value at the
    grid edge (including single-point grids) is flagged "boundary-optimum".
    """
    if not penalty_values:
        raise ValueError("need at least one penalty value")
    ground = bench.resolve_ground_energy(logical)
    axis, values, lowers, uppers = [], [], [], []
    for idx, penalty in enumerate(penalty_values):
        code = code_factory(float(penalty))
        physical = code.encode(logical)
        cfg = replace(config, seed=bench.derive_seed(config.seed, idx))
        samples = solver(physical, cfg)
        p, hits = decoded_success_prob(
            samples, code, logical, ground,
            strategy=decode_strategy, tolerance=tolerance, seed=seed,
        )
        ci = bench.bayesian_bootstrap(
            hits, bench.weighted_success, n_boot=n_boot, level=level,
            seed=bench.derive_seed(seed, idx),
        )
        axis.append(float(penalty))
        values.append(p)
        lowers.append(ci.lower)
        uppers.append(ci.upper)
    best = int(np.argmax(values))
    flags = []
    if best == 0 or best == len(values) - 1:
        flags.append("boundary-optimum")
    return bench.BenchReport(
        metric="penalty_scan",
        estimate=values[best],
        ci_lower=lowers[best],
        ci_upper=uppers[best],
        ci_level=level,
        flags=flags,
        axis_name="penalty",
        axis=axis,
        point_values=values,
        point_lower=lowers,
        point_upper=uppers,
        details={"best_penalty": axis[best], "decode_strategy": decode_strategy},
    )
