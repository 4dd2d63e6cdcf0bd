"""Radial NLS laboratory on manifolds interpolating Euclidean and hyperbolic space."""

from warpnls._core import (
    FieldState,
    ManifoldProfile,
    RadialGrid,
    Trajectory,
    bootstrap_threshold,
    effective_potential,
    evolve,
    gaussian_data,
    is_admissible,
    log_strichartz_weight,
    morawetz_weights,
    phi_eval,
    positivity_certificate,
    run_experiment,
    solve_exponents_M,
    solve_exponents_hyperbolic,
    strichartz_weight,
)

__all__ = [
    "FieldState",
    "ManifoldProfile",
    "RadialGrid",
    "Trajectory",
    "bootstrap_threshold",
    "effective_potential",
    "evolve",
    "gaussian_data",
    "is_admissible",
    "log_strichartz_weight",
    "morawetz_weights",
    "phi_eval",
    "positivity_certificate",
    "run_experiment",
    "solve_exponents_M",
    "solve_exponents_hyperbolic",
    "strichartz_weight",
]
