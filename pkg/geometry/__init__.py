"""
Coordinate-chart differential geometry and structured meshes over closed manifolds.
"""

from .charts import (
    FourierProfile,
    MetricChart,
    CHART_NAMES,
    build_chart,
    christoffel,
    metric_compatibility_residual,
    flat_circle,
    weighted_circle,
    flat_torus,
    wavy_torus,
    sphere_band,
    sample_points,
    grid_points,
)

from .operators import (
    divergence,
    divergence_christoffel,
    gradient,
    laplace_beltrami,
    partial_derivatives,
    metric_pairing,
    metric_norm,
)

from .mesh import (
    FaceSet,
    ManifoldMesh,
    ScalarField,
    TangentFieldSamples,
    build_mesh,
    integrate,
    total_variation,
    lp_norm,
)

__all__ = [
    # Charts
    "FourierProfile",
    "MetricChart",
    "CHART_NAMES",
    "build_chart",
    "christoffel",
    "metric_compatibility_residual",
    "flat_circle",
    "weighted_circle",
    "flat_torus",
    "wavy_torus",
    "sphere_band",
    "sample_points",
    "grid_points",
    # Operators
    "divergence",
    "divergence_christoffel",
    "gradient",
    "laplace_beltrami",
    "partial_derivatives",
    "metric_pairing",
    "metric_norm",
    # Meshes and fields
    "FaceSet",
    "ManifoldMesh",
    "ScalarField",
    "TangentFieldSamples",
    "build_mesh",
    "integrate",
    "total_variation",
    "lp_norm",
]
