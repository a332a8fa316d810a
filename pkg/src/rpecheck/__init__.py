"""Robust phase estimation, its self-consistency checks and a noisy-qubit simulator."""
from .channel import NoiseConfig, exact_probabilities, sample_counts
from .checks import (
    ConsistencyChecker,
    ConsistencyReport,
    DeltaSchedule,
    angular_historical_check,
    consecutive_check,
    intersequence_check,
    local_check,
    plausible_check,
    probability_historical_check,
    report,
    uniform_schedule,
)
from .circle import Arc, dist, wrap
from .estimator import (
    CandidateSet,
    GenerationData,
    GenerationSequence,
    RobustPhaseEstimator,
    RpeRun,
    candidate_set,
    estimate_run,
    run_rpe,
)
from .harness import ExperimentConfig, angle_sweep, error_rate_sweep, interval_width_sweep, simulate_run

__version__ = "0.1.0"

__all__ = [
    "Arc",
    "CandidateSet",
    "ConsistencyChecker",
    "ConsistencyReport",
    "DeltaSchedule",
    "ExperimentConfig",
    "GenerationData",
    "GenerationSequence",
    "NoiseConfig",
    "RobustPhaseEstimator",
    "RpeRun",
    "angle_sweep",
    "angular_historical_check",
    "candidate_set",
    "consecutive_check",
    "dist",
    "error_rate_sweep",
    "estimate_run",
    "exact_probabilities",
    "intersequence_check",
    "interval_width_sweep",
    "local_check",
    "plausible_check",
    "probability_historical_check",
    "report",
    "run_rpe",
    "sample_counts",
    "simulate_run",
    "uniform_schedule",
    "wrap",
]
