"""Exact simulation of sequential CHSH Bell tests whose pairs are all prepared
through one shared two-mode bosonic ancilla."""
from .core import (
    A,
    A_PRIME,
    B,
    B_PRIME,
    AncillaState,
    JointPairState,
    MeasurementBasis,
    TwoQubitDensity,
    correlator_exact,
    inject,
    make_bec_ancilla,
    make_custom_ancilla,
    measure_pair,
    next_pair_coherence,
    outcome_distribution,
    pair_density_matrix,
    reduced_pair_density,
)
from .ensemble import EnsembleResult, Histogram, SimulationConfig, histogram, run_ensemble, summary_stats
from .estimator import BellTestSimulator
from .oracle import build_full_state, exact_outcome_distribution, wootters_concurrence
from .protocol import (
    BasisSchedule,
    RunRecord,
    chsh_s,
    compute_correlators,
    make_schedule,
    run_experiment,
    run_experiment_fresh,
)

__version__ = "0.1.0"
