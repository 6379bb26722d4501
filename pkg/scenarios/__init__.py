"""
Scenario files: models, parsing, initial profiles and the runner.
"""

from .models import (
    PROPERTY_NAMES,
    InitialSpec,
    ManifoldSpec,
    Scenario,
    SolverSpec,
    SpacetimeSpec,
    cross_section_issues,
)

from .parser import (
    load_scenario,
    parse_scenario,
    scenario_to_yaml,
    serialize_scenario,
    validate_scenario,
)

from .profiles import cell_values, profile_function

from .runner import (
    EXIT_ABORT,
    EXIT_FAIL,
    EXIT_PASS,
    RunOutcome,
    build_setup,
    compare_directories,
    mesh_rows,
    run_scenario,
    verify_directory,
)

__all__ = [
    # Models
    "PROPERTY_NAMES",
    "Scenario",
    "ManifoldSpec",
    "SpacetimeSpec",
    "InitialSpec",
    "SolverSpec",
    "cross_section_issues",
    # Parsing
    "parse_scenario",
    "load_scenario",
    "validate_scenario",
    "serialize_scenario",
    "scenario_to_yaml",
    # Profiles
    "profile_function",
    "cell_values",
    # Runner
    "EXIT_PASS",
    "EXIT_FAIL",
    "EXIT_ABORT",
    "RunOutcome",
    "build_setup",
    "run_scenario",
    "verify_directory",
    "compare_directories",
    "mesh_rows",
]
