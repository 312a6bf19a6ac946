"""Ruijsenaars-Schneider pole dynamics and determinant tau-functions of the 2D Toda hierarchy."""

from ._rstoda import (
    ModelParams,
    PhaseState,
    RstodaError,
    backlund,
    check_names,
    commutation_residual,
    conserved_spectrum,
    hamiltonian,
    integrate_flow,
    lax_bar_matrix,
    lax_equation_residual,
    lax_matrix,
    negative_velocities,
    poisson_bracket,
    random_state,
    residue_velocities,
    rs_accelerations,
    similarity_residual,
    tau_zeros_along,
    velocity_map,
    verify,
)

__all__ = [
    "ModelParams",
    "PhaseState",
    "RstodaError",
    "backlund",
    "check_names",
    "commutation_residual",
    "conserved_spectrum",
    "hamiltonian",
    "integrate_flow",
    "lax_bar_matrix",
    "lax_equation_residual",
    "lax_matrix",
    "negative_velocities",
    "poisson_bracket",
    "random_state",
    "residue_velocities",
    "rs_accelerations",
    "similarity_residual",
    "tau_zeros_along",
    "velocity_map",
    "verify",
]
