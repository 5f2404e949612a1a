"""Quantum-annealing benchmarking toolkit: Chimera topologies, Ising instance
generators, classical and quantum reference solvers, error-suppression
encodings, and time-to-solution analysis."""

__version__ = "0.1.0"

from .instances import (
    IsingInstance,
    Schedule,
    default_schedule,
    energy,
    gauge_transform,
    gen_frustrated_loops,
    gen_random_pm1,
    gen_range_k,
    gen_signature,
    gen_weak_strong,
    renormalize,
)
from .solvers import (
    ExactSolution,
    SampleSet,
    SolverConfig,
    solve_exact,
    solve_pt,
    solve_sa,
    solve_sqa,
    solve_svmc,
)
from .topology import (
    Embedding,
    HardwareGraph,
    build_chimera,
    clique_embedding,
    minor_embed_instance,
    validate_embedding,
)

__all__ = [
    "IsingInstance",
    "Schedule",
    "default_schedule",
    "energy",
    "gauge_transform",
    "gen_frustrated_loops",
    "gen_random_pm1",
    "gen_range_k",
    "gen_signature",
    "gen_weak_strong",
    "renormalize",
    "ExactSolution",
    "SampleSet",
    "SolverConfig",
    "solve_exact",
    "solve_pt",
    "solve_sa",
    "solve_sqa",
    "solve_svmc",
    "Embedding",
    "HardwareGraph",
    "build_chimera",
    "clique_embedding",
    "minor_embed_instance",
    "validate_embedding",
    "__version__",
]
