"""
Exact pre-shock solutions of the weighted 1D problem by generalized characteristics.
"""

from .characteristics import (
    WeightedProblem,
    Characteristic,
    make_problem,
    standard_weights,
    trace_characteristic,
    trace_feet,
    smooth_solve,
    crossing_time,
    compare_with_fv,
    oracle_convergence,
)

__all__ = [
    "WeightedProblem",
    "Characteristic",
    "make_problem",
    "standard_weights",
    "trace_characteristic",
    "trace_feet",
    "smooth_solve",
    "crossing_time",
    "compare_with_fv",
    "oracle_convergence",
]
