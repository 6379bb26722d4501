"""
Conservation laws on foliated 1+1 spacetimes.
"""

from .spacetime import (
    SPACETIMES,
    SPACETIME_FLUXES,
    FoliatedSpacetime,
    TimelikeFlux,
    build_spacetime,
    build_timelike_flux,
    characteristic_speed,
    check_timelike,
    horizon_speed_exponent,
    linear_minkowski,
    make_timelike_flux,
    minkowski_1_1,
    nonlinear_minkowski,
    radial_transport,
    schwarzschild_metric,
    schwarzschild_radial,
)

from .leaf_solver import (
    LeafConfig,
    LeafDiscretization,
    foliation_contraction_check,
    leaf_entropy_report,
    leaf_entropy_residual,
    lorentzian_step,
    normal_flux_distance,
    solve_leaves,
    timelike_report,
)

__all__ = [
    # Spacetimes
    "SPACETIMES",
    "FoliatedSpacetime",
    "build_spacetime",
    "minkowski_1_1",
    "schwarzschild_metric",
    "schwarzschild_radial",
    # Time-like fluxes
    "SPACETIME_FLUXES",
    "TimelikeFlux",
    "build_timelike_flux",
    "make_timelike_flux",
    "linear_minkowski",
    "nonlinear_minkowski",
    "radial_transport",
    "check_timelike",
    "characteristic_speed",
    "horizon_speed_exponent",
    # Leaf solver
    "LeafConfig",
    "LeafDiscretization",
    "lorentzian_step",
    "solve_leaves",
    "normal_flux_distance",
    "foliation_contraction_check",
    "timelike_report",
    "leaf_entropy_residual",
    "leaf_entropy_report",
]
