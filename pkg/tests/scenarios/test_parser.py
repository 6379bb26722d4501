#!/usr/bin/env python3
"""
Scenario file parsing, validation and serialization tests.
"""

import os
import sys
from pathlib import Path

import pytest
import yaml

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from config import LIBRARY_DIR
from errors import ScenarioError
from scenarios import (
    Scenario,
    cross_section_issues,
    load_scenario,
    parse_scenario,
    scenario_to_yaml,
    serialize_scenario,
    validate_scenario,
)

GOLDEN_DIR = Path(__file__).parent / "golden"
LIBRARY = sorted(LIBRARY_DIR.glob("*.cfg"))

MINIMAL = """\
# circle Burgers
[scenario]
name = minimal

[manifold]
chart = flat_circle
resolution = 64

[flux]
family = burgers_circle

[initial]
profile = sine

[solver]
scheme = fv
t_end = 0.2
"""


def _issues(text):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(text)
    return [(issue.line, issue.message) for issue in info.value.issues]


def test_minimal_scenario_gets_defaults():
    scenario = parse_scenario(MINIMAL)
    assert scenario.name == "minimal"
    assert scenario.manifold.resolution == [64]
    assert scenario.solver.numerical_flux == "rusanov"
    assert scenario.properties.checks == []
    assert scenario.companion is None
    assert scenario.output_directory == "minimal"
    assert not scenario.lorentzian


def test_lists_and_descriptions():
    text = MINIMAL.replace("name = minimal", "name = minimal\ndescription = one, two") + (
        "snapshots = 0.05, 0.1\n\n[properties]\nchecks = mass_conservation, lp_stability\n"
    )
    scenario = parse_scenario(text)
    assert scenario.scenario.description == "one, two"
    assert scenario.solver.snapshots == [0.05, 0.1]
    assert scenario.properties.checks == ["mass_conservation", "lp_stability"]


def test_every_issue_is_reported_with_its_line():
    print("\n🧪 Issue collection")
    text = MINIMAL.replace("resolution = 64", "resoluton = 64").replace("[solver]", "[solvr]")
    issues = _issues(text)
    for line, message in issues:
        print(f"  line {line}: {message}")
    messages = " | ".join(message for _, message in issues)
    assert "unknown section [solvr] (did you mean 'solver'?)" in messages
    assert "unknown key 'resoluton' in [manifold] (did you mean 'resolution'?)" in messages
    assert (15, "unknown section [solvr] (did you mean 'solver'?)") in issues
    assert any(line == 7 and "resoluton" in message for line, message in issues)
    lines = [line for line, _ in issues if line is not None]
    assert lines == sorted(lines)


def test_malformed_lines():
    issues = _issues(MINIMAL + "\n[solver.extra]\nkey = 1\n[[solver]]\nplain text\n")
    assert any("nested or malformed" in m and line == 19 for line, m in issues)
    assert any("nested or malformed" in m and line == 21 for line, m in issues)
    assert any("expected 'key = value'" in m and line == 22 for line, m in issues)

    duplicated = MINIMAL.replace("chart = flat_circle", "chart = flat_circle\nchart = flat_torus")
    assert any("duplicate key 'chart'" in m for _, m in _issues(duplicated))
    assert any("outside any section" in m for _, m in _issues("name = loose\n" + MINIMAL))


def test_field_values_are_validated():
    issues = _issues(MINIMAL.replace("resolution = 64", "resolution = 8").replace("t_end = 0.2", "t_end = -1"))
    assert any(line == 7 and "at least 16" in m for line, m in issues)
    assert any(line == 17 and "t_end" in m for line, m in issues)
    assert any("unknown chart 'flat_circl' (did you mean 'flat_circle'?)" in m
               for _, m in _issues(MINIMAL.replace("chart = flat_circle", "chart = flat_circl")))


def test_cross_section_issues():
    wrong_chart = MINIMAL.replace("chart = flat_circle", "chart = flat_torus")
    assert any(line == 10 and "lives on flat_circle" in m for line, m in _issues(wrong_chart))

    unpaired = MINIMAL + "\n[properties]\nchecks = contraction\n"
    assert any("need a [companion] section" in m for _, m in _issues(unpaired))

    viscous = MINIMAL.replace("scheme = fv", "scheme = viscous")
    assert any("needs epsilon > 0" in m for _, m in _issues(viscous))

    late = MINIMAL.replace("t_end = 0.2", "t_end = 0.2\nsnapshots = 0.5")
    assert any("outside [0, 0.2]" in m for _, m in _issues(late))

    built = parse_scenario(MINIMAL).model_copy(deep=True)
    built.solver.scheme = "lorentzian"
    assert cross_section_issues(built)
    with pytest.raises(ScenarioError):
        validate_scenario(built)


@pytest.mark.parametrize("path", LIBRARY, ids=[p.stem for p in LIBRARY])
def test_library_scenarios_survive_serialization(path):
    scenario, _ = load_scenario(path)
    assert parse_scenario(serialize_scenario(scenario)) == scenario


@pytest.mark.parametrize("path", LIBRARY, ids=[p.stem for p in LIBRARY])
def test_library_scenarios_match_golden_yaml(path):
    """Every default a library scenario picks up is pinned by its golden file."""
    scenario, _ = load_scenario(path)
    dumped = scenario_to_yaml(scenario)
    assert yaml.safe_load(dumped) == scenario.model_dump(mode="json")
    golden = GOLDEN_DIR / f"{path.stem}.yaml"
    assert golden.exists(), f"missing golden file {golden.name}"
    assert yaml.safe_load(golden.read_text()) == yaml.safe_load(dumped)
    assert Scenario.model_validate(yaml.safe_load(golden.read_text())) == scenario


def test_every_golden_file_has_a_scenario():
    assert sorted(p.stem for p in GOLDEN_DIR.glob("*.yaml")) == [p.stem for p in LIBRARY]


if __name__ == "__main__":
    test_minimal_scenario_gets_defaults()
    test_lists_and_descriptions()
    test_every_issue_is_reported_with_its_line()
    test_malformed_lines()
    test_field_values_are_validated()
    test_cross_section_issues()
    for cfg in LIBRARY:
        test_library_scenarios_survive_serialization(cfg)
        test_library_scenarios_match_golden_yaml(cfg)
    test_every_golden_file_has_a_scenario()
    print(f"\n✅ All parser tests passed ({len(LIBRARY)} library scenarios)!")
