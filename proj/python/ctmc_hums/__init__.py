"""Continuous-time hidden Markov filtering for degradation detection."""

from ._core import (
    Error,
    detect,
    estimate_exponential_rate,
    estimate_parameters,
    fit_temperature_regression,
    run_command,
    run_filter,
    simulate_chain,
    simulate_observation,
    smooth,
    transition_matrix,
    validate_generator,
)

__all__ = [
    "Error",
    "detect",
    "estimate_exponential_rate",
    "estimate_parameters",
    "fit_temperature_regression",
    "run_command",
    "run_filter",
    "simulate_chain",
    "simulate_observation",
    "smooth",
    "transition_matrix",
    "validate_generator",
]
