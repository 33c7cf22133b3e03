"""Hermite-expansion MRT lattice Boltzmann model and linear-mode dispersion measurement."""

from ._hermrt import (
    GasSpec,
    ModeExperiment,
    RelaxationSpec,
    Simulation,
    SimulationError,
    VelocitySet,
    builtin_velocity_sets,
    fit_frequencies,
    run_mode_experiment,
    theoretical_dispersion,
    transport,
    validate,
    velocity_set,
)

__all__ = [
    "GasSpec",
    "ModeExperiment",
    "RelaxationSpec",
    "Simulation",
    "SimulationError",
    "VelocitySet",
    "builtin_velocity_sets",
    "fit_frequencies",
    "run_mode_experiment",
    "theoretical_dispersion",
    "transport",
    "validate",
    "velocity_set",
]
