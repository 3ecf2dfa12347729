"""Surplus-based average consensus on time-varying digraphs."""

from .errors import ConfigError, ConsensusError, DimensionError, WeightViolation
from .graph import (
    Digraph,
    TopologySchedule,
    closed_components,
    globally_reachable_nodes,
    in_neighbors,
    is_jointly_strongly_connected,
    is_strongly_connected,
    out_neighbors,
    strong_components,
    union_digraph,
)
from .protocol import (
    NetworkState,
    StepRecord,
    Trajectory,
    WeightPolicy,
    run,
    run_baseline,
    step,
    step_baseline,
    switching_decision,
    validate_weights,
)
from .matrix import UpdateMatrices, build_matrices, check_stochasticity, step_matrix
from .analysis import (
    conserved_average,
    convergence_time,
    kappa_bound,
    lyapunov,
    min_increase_check,
    trajectory_metrics,
)
from .schedule import (
    counterexample_reachable_only,
    counterexample_two_components,
    fig3_family,
    periodic_ring_4,
    random_schedule,
)

__version__ = "0.1.0"
