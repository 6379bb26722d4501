"""
Finite-volume and vanishing-diffusion solvers, trajectories and weak forms.
"""

from .models import FVConfig, ViscousConfig, RunMetadata

from .trajectory import (
    SolutionTrajectory,
    distance_series,
    ensure_comparable,
    read_metadata,
    read_trajectory,
    write_trajectory,
)

from .finite_volume import (
    FaceTransport,
    normal_flux,
    interface_flux_rusanov,
    interface_flux_engquist_osher,
    fv_step,
    solve_fv,
)

from .viscous import (
    DiffusionOperator,
    discrete_laplacian,
    mollify,
    stable_dt,
    viscous_step,
    solve_viscous,
    entropy_inequality_residual_viscous,
    vanishing_diffusion_study,
)

from .bumps import SpaceTimeBump, default_basket

from .weak_forms import (
    weak_entropy_residual,
    kruzkov_pair_residual,
    weak_form_tolerance,
)

__all__ = [
    # Configuration
    "FVConfig",
    "ViscousConfig",
    "RunMetadata",
    # Trajectories
    "SolutionTrajectory",
    "distance_series",
    "ensure_comparable",
    "read_metadata",
    "read_trajectory",
    "write_trajectory",
    # Finite volumes
    "FaceTransport",
    "normal_flux",
    "interface_flux_rusanov",
    "interface_flux_engquist_osher",
    "fv_step",
    "solve_fv",
    # Vanishing diffusion
    "DiffusionOperator",
    "discrete_laplacian",
    "mollify",
    "stable_dt",
    "viscous_step",
    "solve_viscous",
    "entropy_inequality_residual_viscous",
    "vanishing_diffusion_study",
    # Weak forms
    "SpaceTimeBump",
    "default_basket",
    "weak_entropy_residual",
    "kruzkov_pair_residual",
    "weak_form_tolerance",
]
