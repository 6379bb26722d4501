"""
Flux families, geometry-compatibility checks and convex entropy pairs.
"""

from .families import (
    FluxFamily,
    as_polynomial,
    make_compatible_flux,
    make_weighted_flux_1d,
    verify_compatibility,
    growth_constant,
)

from .entropy import (
    EntropyPair,
    entropy_flux,
    kruzkov_pair,
    kruzkov_flux,
    quadratic_pair,
    linear_pair,
    zero_pair,
    general_entropy_residual_terms,
)

from .inverse import monotone_inverse, branch_inverse

from .catalog import FLUX_FAMILIES, build_flux, weight_profile

__all__ = [
    # Flux families
    "FluxFamily",
    "as_polynomial",
    "make_compatible_flux",
    "make_weighted_flux_1d",
    "verify_compatibility",
    "growth_constant",
    # Entropy pairs
    "EntropyPair",
    "entropy_flux",
    "kruzkov_pair",
    "kruzkov_flux",
    "quadratic_pair",
    "linear_pair",
    "zero_pair",
    "general_entropy_residual_terms",
    # Inverses
    "monotone_inverse",
    "branch_inverse",
    # Catalog
    "FLUX_FAMILIES",
    "build_flux",
    "weight_profile",
]
