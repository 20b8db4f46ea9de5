"""Learning-curve extrapolating bandit for AutoML tuner selection."""

from ._hamlet import (
    ConfigError,
    DomainError,
    FittedCurve,
    ParseError,
    TuningTrace,
    analyze,
    average_ranks,
    canonical_policy_name,
    fit_arctan,
    generate_traces,
    load_traces,
    mean_rank_ci,
    monotone_envelope,
    rank_results,
    run_experiment,
    simulate,
    sweep,
    ucb_bonus,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "FittedCurve",
    "ParseError",
    "TuningTrace",
    "analyze",
    "average_ranks",
    "canonical_policy_name",
    "fit_arctan",
    "generate_traces",
    "load_traces",
    "mean_rank_ci",
    "monotone_envelope",
    "rank_results",
    "run_experiment",
    "simulate",
    "sweep",
    "ucb_bonus",
]
