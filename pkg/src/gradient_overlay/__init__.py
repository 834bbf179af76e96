"""Gradient overlay toolkit: gossip convergence simulation, absorbing-chain
analysis, and an auction-matched P2P live-streaming testbed."""

__version__ = "0.1.0"

from .overlay import (
    ConvergenceReport,
    NodeTable,
    SimilarView,
    TopologyError,
    TopologyState,
    UtilityConfig,
    build_initial_topology,
    check_gradient_converged,
    x_metric,
)
from .schedules import (
    ConstantSchedule,
    PolynomialDecaySchedule,
    SamplingSchedule,
    ScheduleError,
    TabulatedSchedule,
)
from .gossip import (
    ChainEnsemble,
    GossipTrace,
    RngStreams,
    improve_view,
    run_convergence,
    sample_peer,
    simulate_view_chains,
    tick,
)
from .markov import (
    Distribution,
    EigenSystem,
    ScheduleClassification,
    TransitionMatrix,
    Verdict,
    classify_schedule,
    decompose_initial,
    eigen_system,
    evolve_exact,
    evolve_spectral,
    expected_hitting_time,
    hitting_time_bound,
    transition_matrix,
)

__all__ = [
    "__version__",
    "ChainEnsemble",
    "ConstantSchedule",
    "ConvergenceReport",
    "Distribution",
    "EigenSystem",
    "GossipTrace",
    "NodeTable",
    "PolynomialDecaySchedule",
    "RngStreams",
    "SamplingSchedule",
    "ScheduleClassification",
    "ScheduleError",
    "SimilarView",
    "TabulatedSchedule",
    "TopologyError",
    "TopologyState",
    "TransitionMatrix",
    "UtilityConfig",
    "Verdict",
    "build_initial_topology",
    "check_gradient_converged",
    "classify_schedule",
    "decompose_initial",
    "eigen_system",
    "evolve_exact",
    "evolve_spectral",
    "expected_hitting_time",
    "hitting_time_bound",
    "improve_view",
    "run_convergence",
    "sample_peer",
    "simulate_view_chains",
    "tick",
    "transition_matrix",
    "x_metric",
]
