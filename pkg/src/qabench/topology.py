"""Chimera hardware graphs, triangular clique embeddings, and minor embedding."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

QUBITS_PER_CELL = 8


class EmbeddingError(ValueError):
    """Raised when an embedding is infeasible or fails validation."""

    def __init__(self, message: str, report: "ValidationReport | None" = None):
        super().__init__(message)
        self.report = report


def qubit_id(grid_size: int, row: int, col: int, local: int) -> int:
    """Linear id of the qubit at (row, col, local); locals 0-3 are the vertical
    partition of the cell, 4-7 the horizontal one."""
    if not (0 <= row < grid_size and 0 <= col < grid_size and 0 <= local < 8):
        raise ValueError(f"qubit coordinate out of range: {(row, col, local)}")
    return (row * grid_size + col) * QUBITS_PER_CELL + local


def qubit_coords(grid_size: int, q: int) -> tuple[int, int, int]:
    """Inverse of qubit_id: (row, col, local) for a linear qubit id."""
    cell, local = divmod(q, QUBITS_PER_CELL)
    row, col = divmod(cell, grid_size)
    if not 0 <= row < grid_size:
        raise ValueError(f"qubit id {q} out of range for grid size {grid_size}")
    return row, col, local


def _all_couplers(grid_size: int) -> list[tuple[int, int]]:
    s = grid_size
    pairs: list[tuple[int, int]] = []
    for row in range(s):
        for col in range(s):
            base = (row * s + col) * QUBITS_PER_CELL
            for a in range(4):
                for b in range(4, 8):
                    pairs.append((base + a, base + b))
            if row + 1 < s:
                below = ((row + 1) * s + col) * QUBITS_PER_CELL
                for a in range(4):
                    pairs.append((base + a, below + a))
            if col + 1 < s:
                right = (row * s + col + 1) * QUBITS_PER_CELL
                for b in range(4, 8):
                    pairs.append((base + b, right + b))
    pairs.sort()
    return pairs


@dataclass(frozen=True)
class HardwareGraph:
    """A Chimera grid of K_{4,4} cells with optional dead qubits/couplers.

    A coupler is active iff both endpoints are active and it was not masked
    explicitly.  Qubit ids run over all 8*grid_size**2 sites, dead or not.
    Immutable: the adjacency caches built at construction stay valid.
    """

    grid_size: int
    inactive_qubits: frozenset[int] = field(default_factory=frozenset)
    inactive_couplers: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.grid_size < 1:
            raise ValueError("grid_size must be >= 1")
        n = self.n_sites
        for q in self.inactive_qubits:
            if not 0 <= q < n:
                raise ValueError(f"inactive qubit {q} out of range")
        object.__setattr__(self, "inactive_qubits", frozenset(self.inactive_qubits))
        object.__setattr__(
            self,
            "inactive_couplers",
            frozenset((min(i, j), max(i, j)) for i, j in self.inactive_couplers),
        )
        all_pairs = _all_couplers(self.grid_size)
        pair_set = set(all_pairs)
        for pair in self.inactive_couplers:
            if pair not in pair_set:
                raise ValueError(f"masked coupler {pair} is not a Chimera edge")
        object.__setattr__(self, "_all_couplers", all_pairs)
        object.__setattr__(self, "_coupler_set", pair_set)
        active = [
            (i, j)
            for (i, j) in all_pairs
            if i not in self.inactive_qubits
            and j not in self.inactive_qubits
            and (i, j) not in self.inactive_couplers
        ]
        object.__setattr__(self, "_active_couplers", active)
        adj: dict[int, list[int]] = {q: [] for q in self.active_qubits}
        for i, j in active:
            adj[i].append(j)
            adj[j].append(i)
        object.__setattr__(
            self, "_adjacency", {q: tuple(sorted(v)) for q, v in adj.items()}
        )

    @property
    def n_sites(self) -> int:
        """Total number of sites, active or not."""
        return QUBITS_PER_CELL * self.grid_size**2

    @property
    def active_qubits(self) -> tuple[int, ...]:
        return tuple(q for q in range(self.n_sites) if q not in self.inactive_qubits)

    @property
    def n_active_qubits(self) -> int:
        return self.n_sites - len(self.inactive_qubits)

    @property
    def all_couplers(self) -> tuple[tuple[int, int], ...]:
        return tuple(self._all_couplers)

    @property
    def active_couplers(self) -> tuple[tuple[int, int], ...]:
        return tuple(self._active_couplers)

    def is_active_qubit(self, q: int) -> bool:
        return 0 <= q < self.n_sites and q not in self.inactive_qubits

    def is_active_coupler(self, i: int, j: int) -> bool:
        pair = (min(i, j), max(i, j))
        return (
            self.is_active_qubit(pair[0])
            and self.is_active_qubit(pair[1])
            and pair not in self.inactive_couplers
            and pair in self._coupler_set
        )

    def neighbors(self, q: int) -> tuple[int, ...]:
        """Active neighbors of an active qubit."""
        return self._adjacency.get(q, ())

    def coords(self, q: int) -> tuple[int, int, int]:
        return qubit_coords(self.grid_size, q)

    def qubit(self, row: int, col: int, local: int) -> int:
        return qubit_id(self.grid_size, row, col, local)


def build_chimera(
    grid_size: int,
    inactive_qubits: Iterable[int] = (),
    inactive_couplers: Iterable[tuple[int, int]] = (),
) -> HardwareGraph:
    """Build a Chimera graph of grid_size x grid_size K_{4,4} cells."""
    return HardwareGraph(
        grid_size=grid_size,
        inactive_qubits=frozenset(inactive_qubits),
        inactive_couplers=frozenset(tuple(p) for p in inactive_couplers),
    )


@dataclass
class Embedding:
    """Chains of physical qubits, one per logical variable."""

    chains: dict[int, tuple[int, ...]]
    chain_strength: dict[int, float] | None = None

    def __post_init__(self):
        self.chains = {int(k): tuple(v) for k, v in self.chains.items()}
        if self.chain_strength is not None:
            strengths = {int(k): float(v) for k, v in self.chain_strength.items()}
            for k, v in strengths.items():
                if v < 0:
                    raise ValueError(f"chain strength for {k} must be nonnegative")
                if k not in self.chains:
                    raise ValueError(f"chain strength given for unknown chain {k}")
            self.chain_strength = strengths

    def max_chain_length(self) -> int:
        return max(len(c) for c in self.chains.values())


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def add(self, kind: str, detail: str) -> None:
        self.violations.append(Violation(kind, detail))


def validate_embedding(
    embedding: Embedding,
    logical_edges: Iterable[tuple[int, int]],
    graph: HardwareGraph,
) -> ValidationReport:
    """Check chain disjointness, chain connectivity on active hardware, and
    coverage of every logical edge by at least one active inter-chain coupler."""
    report = ValidationReport()
    owner: dict[int, int] = {}
    for lid, chain in sorted(embedding.chains.items()):
        if not chain:
            report.add("empty-chain", f"chain {lid} is empty")
            continue
        for q in chain:
            if not graph.is_active_qubit(q):
                report.add("inactive-qubit", f"chain {lid} uses inactive qubit {q}")
            if q in owner:
                report.add(
                    "overlap",
                    f"qubit {q} belongs to chains {owner[q]} and {lid}",
                )
            else:
                owner[q] = lid
        # connectivity via BFS over active couplers restricted to the chain
        members = set(chain)
        seen = {chain[0]}
        frontier = [chain[0]]
        while frontier:
            nxt: list[int] = []
            for q in frontier:
                for r in graph.neighbors(q):
                    if r in members and r not in seen:
                        seen.add(r)
                        nxt.append(r)
            frontier = nxt
        if seen != members:
            stranded = sorted(members - seen)
            report.add(
                "disconnected-chain",
                f"chain {lid} is not connected (unreachable: {stranded})",
            )
    for i, j in sorted(set((min(e), max(e)) for e in logical_edges)):
        if i not in embedding.chains or j not in embedding.chains:
            report.add("missing-chain", f"edge ({i}, {j}) references a missing chain")
            continue
        chain_j = set(embedding.chains[j])
        covered = any(
            r in chain_j
            for q in embedding.chains[i]
            for r in graph.neighbors(q)
        )
        if not covered:
            report.add(
                "uncovered-edge",
                f"no active coupler joins chains {i} and {j}",
            )
    return report


def clique_embedding(clique_size: int, graph: HardwareGraph) -> Embedding:
    """Embed a complete graph into a pristine Chimera grid.

    Variable v = 4g + k gets an L-shaped chain: the horizontal partition local
    4+k across cells (g, 0..g) plus the vertical partition local k down cells
    (g..s-1, g), bridged by the in-cell coupler at the corner cell (g, g).
    Every chain has exactly grid_size + 1 qubits.
    """
    s = graph.grid_size
    if clique_size < 1:
        raise ValueError("clique_size must be >= 1")
    if clique_size > 4 * s:
        raise EmbeddingError(
            f"clique of size {clique_size} does not fit: grid size {s} "
            f"supports at most {4 * s} chains"
        )
    if graph.inactive_qubits or graph.inactive_couplers:
        raise EmbeddingError(
            "clique embedding requires a fully active graph; mask-aware "
            "embeddings are out of scope"
        )
    chains: dict[int, tuple[int, ...]] = {}
    for v in range(clique_size):
        g, k = divmod(v, 4)
        horizontal = [graph.qubit(g, c, 4 + k) for c in range(g + 1)]
        vertical = [graph.qubit(r, g, k) for r in range(g, s)]
        chains[v] = tuple(horizontal + vertical)
    return Embedding(chains=chains)


def _resolve_strengths(
    embedding: Embedding,
    logical_J: Mapping[tuple[int, int], float],
    chain_strength: float | Mapping[int, float] | None,
) -> dict[int, float]:
    if chain_strength is None:
        if embedding.chain_strength is not None:
            strengths = dict(embedding.chain_strength)
            missing = set(embedding.chains) - set(strengths)
            if missing:
                raise ValueError(f"no chain strength for chains {sorted(missing)}")
            return strengths
        default = max((abs(v) for v in logical_J.values()), default=1.0)
        if default == 0.0:
            default = 1.0
        return {lid: default for lid in embedding.chains}
    if isinstance(chain_strength, Mapping):
        strengths = {int(k): float(v) for k, v in chain_strength.items()}
        missing = set(embedding.chains) - set(strengths)
        if missing:
            raise ValueError(f"no chain strength for chains {sorted(missing)}")
        return strengths
    return {lid: float(chain_strength) for lid in embedding.chains}


def minor_embed_instance(
    logical,
    embedding: Embedding,
    graph: HardwareGraph,
    chain_strength: float | Mapping[int, float] | None = None,
):
    """Map a logical instance onto hardware through an embedding.

    Chain-internal active couplers get a ferromagnetic coupling of magnitude
    chain_strength (default: max |J| of the logical problem).  Each logical
    field is split equally over its chain.  Each logical coupling is placed in
    full on the lowest-indexed available coupler between the two chains.
    """
    from .instances import IsingInstance

    report = validate_embedding(embedding, logical.J.keys(), graph)
    if not report.ok:
        lines = "; ".join(f"[{v.kind}] {v.detail}" for v in report.violations)
        raise EmbeddingError(f"embedding failed validation: {lines}", report)
    missing_vars = [i for i in range(logical.n) if i not in embedding.chains]
    if missing_vars:
        raise EmbeddingError(f"no chain for logical variables {missing_vars}")

    strengths = _resolve_strengths(embedding, logical.J, chain_strength)
    n_phys = graph.n_sites
    h_phys = np.zeros(n_phys)
    J_phys: dict[tuple[int, int], float] = {}

    for lid, chain in sorted(embedding.chains.items()):
        share = logical.h[lid] / len(chain)
        members = set(chain)
        for q in chain:
            h_phys[q] += share
            for r in graph.neighbors(q):
                if r in members and q < r:
                    J_phys[(q, r)] = -strengths[lid]

    for (i, j), val in sorted(logical.J.items()):
        chain_j = set(embedding.chains[j])
        options = sorted(
            (min(q, r), max(q, r))
            for q in embedding.chains[i]
            for r in graph.neighbors(q)
            if r in chain_j
        )
        iq, jq = options[0]
        J_phys[(iq, jq)] = J_phys.get((iq, jq), 0.0) + val

    metadata = {
        "generator": "minor_embed",
        "grid_size": graph.grid_size,
        "chains": {str(k): list(v) for k, v in sorted(embedding.chains.items())},
        "chain_strength": {str(k): strengths[k] for k in sorted(strengths)},
    }
    return IsingInstance(n=n_phys, h=h_phys, J=J_phys, metadata=metadata)
