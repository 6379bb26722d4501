"""
Property checks over solution trajectories.
"""

from .models import PropertyReport, ScenarioVerdict

from .checks import (
    CHECK_NAMES,
    check_lp_stability,
    check_max_principle,
    check_mass_conservation,
    check_contraction,
    check_kruzkov_inequality,
    check_tv_envelope,
    check_time_lipschitz,
    check_weak_entropy_solution,
    check_general_entropy_inequality,
    check_smooth_entropy_dichotomy,
    entropy_rate,
    fit_tv_constant,
    kruzkov_basket,
    paired_entropy_drifts,
    pre_shock_window,
    run_checks,
    scenario_verdict,
    solver_entropy_drift,
)

__all__ = [
    # Models
    "PropertyReport",
    "ScenarioVerdict",
    # Checks
    "CHECK_NAMES",
    "check_lp_stability",
    "check_max_principle",
    "check_mass_conservation",
    "check_contraction",
    "check_kruzkov_inequality",
    "check_tv_envelope",
    "check_time_lipschitz",
    "check_weak_entropy_solution",
    "check_general_entropy_inequality",
    "check_smooth_entropy_dichotomy",
    "entropy_rate",
    "fit_tv_constant",
    "kruzkov_basket",
    "paired_entropy_drifts",
    "pre_shock_window",
    "run_checks",
    "scenario_verdict",
    "solver_entropy_drift",
]
