import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qabench.instances import IsingInstance, energy
from qabench.topology import (
    Embedding,
    EmbeddingError,
    HardwareGraph,
    build_chimera,
    clique_embedding,
    minor_embed_instance,
    qubit_coords,
    qubit_id,
    validate_embedding,
)


def test_qubit_id_coords_roundtrip():
    s = 3
    for q in range(8 * s * s):
        row, col, local = qubit_coords(s, q)
        assert qubit_id(s, row, col, local) == q


def test_qubit_id_rejects_out_of_range():
    with pytest.raises(ValueError):
        qubit_id(2, 2, 0, 0)
    with pytest.raises(ValueError):
        qubit_id(2, 0, 0, 8)
    with pytest.raises(ValueError):
        qubit_coords(2, 64)


@given(st.integers(min_value=1, max_value=16))
def test_coupler_count_formula(s):
    # each cell contributes a complete bipartite block (16 couplers); vertical
    # qubits couple to the cell below, horizontal ones to the cell on the right
    g = build_chimera(s)
    expected = 16 * s * s + 8 * s * (s - 1)
    assert len(g.all_couplers) == expected
    assert g.n_sites == 8 * s * s


def test_couplers_are_sorted_unique_pairs(c2_graph):
    pairs = c2_graph.all_couplers
    assert all(i < j for i, j in pairs)
    assert len(set(pairs)) == len(pairs)


def test_intra_cell_structure(cell_graph):
    # single cell: every vertical local couples to every horizontal local
    expected = {(i, 4 + j) for i in range(4) for j in range(4)}
    assert set(cell_graph.all_couplers) == expected
    for i in range(4):
        assert set(cell_graph.neighbors(i)) == {4, 5, 6, 7}


def test_inter_cell_wiring():
    g = build_chimera(2)
    # vertical local 0 of cell (0,0) couples straight down to cell (1,0)
    top = g.qubit(0, 0, 0)
    below = g.qubit(1, 0, 0)
    assert g.is_active_coupler(top, below)
    # horizontal local 4 couples to the right-hand neighbor cell
    left = g.qubit(0, 0, 4)
    right = g.qubit(0, 1, 4)
    assert g.is_active_coupler(left, right)
    # no wrap-around
    assert not g.is_active_coupler(g.qubit(1, 0, 0), g.qubit(0, 0, 0) + 100)


def test_inactive_qubit_removes_incident_couplers():
    g = build_chimera(1, inactive_qubits=(0,))
    assert not g.is_active_qubit(0)
    assert g.n_active_qubits == 7
    assert all(0 not in pair for pair in g.active_couplers)
    assert g.neighbors(0) == ()


def test_inactive_coupler_keeps_qubits():
    g = build_chimera(1, inactive_couplers=((0, 4),))
    assert g.is_active_qubit(0) and g.is_active_qubit(4)
    assert not g.is_active_coupler(0, 4)
    assert g.is_active_coupler(0, 5)
    assert 4 not in g.neighbors(0)


def test_build_rejects_unknown_ids():
    with pytest.raises(ValueError):
        build_chimera(1, inactive_qubits=(8,))
    with pytest.raises(ValueError):
        build_chimera(1, inactive_couplers=((0, 1),))  # not a hardware edge


def test_embedding_max_chain_length():
    emb = Embedding(chains={0: (0, 1), 1: (4,)})
    assert emb.max_chain_length() == 2


class TestValidateEmbedding:
    def test_clean_embedding_passes(self, cell_graph):
        emb = Embedding(chains={0: (0,), 1: (4,)})
        report = validate_embedding(emb, [(0, 1)], cell_graph)
        assert report.ok
        assert bool(report)

    def test_empty_chain(self, cell_graph):
        emb = Embedding(chains={0: (), 1: (4,)})
        report = validate_embedding(emb, [], cell_graph)
        assert not report.ok
        assert any(v.kind == "empty-chain" for v in report.violations)

    def test_inactive_qubit(self):
        g = build_chimera(1, inactive_qubits=(0,))
        emb = Embedding(chains={0: (0,)})
        report = validate_embedding(emb, [], g)
        assert any(v.kind == "inactive-qubit" for v in report.violations)

    def test_overlapping_chains(self, cell_graph):
        emb = Embedding(chains={0: (0, 4), 1: (4,)})
        report = validate_embedding(emb, [], cell_graph)
        assert any(v.kind == "overlap" for v in report.violations)

    def test_disconnected_chain(self, cell_graph):
        # locals 0 and 1 are both vertical: no intra-cell coupler between them
        emb = Embedding(chains={0: (0, 1)})
        report = validate_embedding(emb, [], cell_graph)
        assert any(v.kind == "disconnected-chain" for v in report.violations)

    def test_missing_chain_and_uncovered_edge(self, cell_graph):
        emb = Embedding(chains={0: (0,), 1: (1,)})
        report = validate_embedding(emb, [(0, 2), (0, 1)], cell_graph)
        kinds = {v.kind for v in report.violations}
        assert "missing-chain" in kinds
        assert "uncovered-edge" in kinds  # 0-1 both map to vertical locals


@pytest.mark.parametrize("s", [1, 2, 3])
def test_clique_embedding_chain_lengths(s):
    g = build_chimera(s)
    emb = clique_embedding(4 * s, g)
    assert len(emb.chains) == 4 * s
    assert all(len(chain) == s + 1 for chain in emb.chains.values())
    edges = [(a, b) for a in range(4 * s) for b in range(a + 1, 4 * s)]
    assert validate_embedding(emb, edges, g).ok


def test_clique_embedding_rejects_too_large(c2_graph):
    with pytest.raises(EmbeddingError):
        clique_embedding(9, c2_graph)


def test_clique_embedding_requires_pristine_graph():
    g = build_chimera(2, inactive_qubits=(0,))
    with pytest.raises(EmbeddingError):
        clique_embedding(8, g)


def test_minor_embed_energy_identity(c2_graph):
    # a chain-satisfying physical state must score the logical energy minus
    # the ferromagnetic chain bonus
    n = 8
    rng = np.random.default_rng(3)
    J = {
        (i, j): float(rng.uniform(-1, 1))
        for i in range(n)
        for j in range(i + 1, n)
    }
    h = rng.uniform(-1, 1, n)
    logical = IsingInstance(n=n, h=h, J=J)
    emb = clique_embedding(n, c2_graph)
    strength = 1.7
    phys = minor_embed_instance(logical, emb, c2_graph, chain_strength=strength)

    logical_state = (1 - 2 * rng.integers(0, 2, n)).astype(np.int8)
    phys_state = np.ones(phys.n, dtype=np.int8)
    for v, chain in emb.chains.items():
        for q in chain:
            phys_state[q] = logical_state[v]
    bonus = strength * sum(len(c) - 1 for c in emb.chains.values())
    assert np.isclose(energy(phys, phys_state), energy(logical, logical_state) - bonus)


def test_minor_embed_default_strength_scales_with_couplings(c2_graph):
    logical = IsingInstance(n=2, h=np.zeros(2), J={(0, 1): -2.5})
    emb = Embedding(chains={0: (0, 4), 1: (1,)})
    phys = minor_embed_instance(logical, emb, c2_graph)
    # intra-chain coupler takes -max|J|
    assert phys.J[(0, 4)] == -2.5


def test_minor_embed_rejects_invalid_embedding(c2_graph):
    logical = IsingInstance(n=2, h=np.zeros(2), J={(0, 1): 1.0})
    emb = Embedding(chains={0: (0, 1), 1: (4,)})  # 0-1 chain disconnected
    with pytest.raises(EmbeddingError) as err:
        minor_embed_instance(logical, emb, c2_graph)
    assert err.value.report is not None
    assert not err.value.report.ok


def test_hardware_graph_is_frozen(cell_graph):
    with pytest.raises(AttributeError):
        cell_graph.grid_size = 2
