"""
Scenario file grammar, parsing and serialization.

    # comment lines start with '#'
    [section]
    key = value
    key = a, b, c

Comma-separated values form a list. Comments are whole lines only.

Section headers are single names; dotted or doubled headers ([a.b], [[a]]) are
nested tables and are rejected. Every problem in a file is reported at once,
each with its line number.
"""
import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import yaml
from pydantic import ValidationError

from errors import ScenarioError, ScenarioIssue
from scenarios.models import SECTION_MODELS, Scenario, cross_section_issues, suggest

logger = logging.getLogger(__name__)

SECTION_ORDER = ("scenario", "manifold", "spacetime", "flux", "initial", "companion", "solver", "properties", "output")
HEADER = re.compile(r"^\[(?P<name>[^\[\]]*)\]$")
KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

RawValue = Union[str, List[str]]
LineIndex = Dict[Tuple[str, Optional[str]], int]


def _split_value(text: str) -> RawValue:
    if "," in text:
        return [item.strip() for item in text.split(",")]
    return text


def read_sections(text: str) -> Tuple[Dict[str, Dict[str, RawValue]], LineIndex, List[ScenarioIssue]]:
    """
    Split scenario text into raw sections.

    Returns:
        (sections, line index keyed by (section, key) with key None for headers, issues)
    """
    sections: Dict[str, Dict[str, RawValue]] = {}
    lines: LineIndex = {}
    issues: List[ScenarioIssue] = []
    current: Optional[str] = None
    skipping = False
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            match = HEADER.match(line)
            name = match.group("name").strip() if match else None
            if name is None or "." in name or not name:
                issues.append(ScenarioIssue(number, f"nested or malformed section header '{line}'"))
                current, skipping = None, True
                continue
            if name not in SECTION_MODELS:
                issues.append(ScenarioIssue(number, f"unknown section [{name}]{suggest(name, SECTION_ORDER)}"))
                current, skipping = None, True
                continue
            if name in sections:
                issues.append(ScenarioIssue(number, f"duplicate section [{name}]"))
                current, skipping = None, True
                continue
            sections[name] = {}
            lines[(name, None)] = number
            current, skipping = name, False
            continue
        if "=" not in line:
            issues.append(ScenarioIssue(number, f"expected 'key = value', got '{line}'"))
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if not KEY.match(key):
            issues.append(ScenarioIssue(number, f"invalid key '{key}'"))
            continue
        if current is None:
            if not skipping:
                issues.append(ScenarioIssue(number, f"key '{key}' appears outside any section"))
            continue
        if key in sections[current]:
            issues.append(ScenarioIssue(number, f"duplicate key '{key}' in [{current}]"))
            continue
        sections[current][key] = _split_value(value)
        lines[(current, key)] = number
    return sections, lines, issues


def _issue_line(lines: LineIndex, section: str, key: Optional[str]) -> Optional[int]:
    if key is not None and (section, key) in lines:
        return lines[(section, key)]
    return lines.get((section, None))


def _validation_issues(error: ValidationError, lines: LineIndex) -> List[ScenarioIssue]:
    issues = []
    for item in error.errors():
        loc = [str(part) for part in item["loc"]]
        section = loc[0] if loc else ""
        key = loc[1] if len(loc) > 1 else None
        message = item["msg"]
        if item["type"] == "extra_forbidden" and key is not None:
            model = SECTION_MODELS.get(section)
            fields = tuple(model.model_fields) if model is not None else ()
            message = f"unknown key '{key}' in [{section}]{suggest(key, fields)}"
        elif item["type"] == "missing":
            message = f"[{section}] is missing" if key is None else f"missing key '{key}' in [{section}]"
        else:
            where = f"[{section}] {key}" if key is not None else f"[{section}]"
            message = f"{where}: {message}"
        issues.append(ScenarioIssue(_issue_line(lines, section, key), message))
    return issues


def parse_scenario(text: str) -> Scenario:
    """
    Parse and validate scenario text.

    Raises:
        ScenarioError: carrying every issue found, each with a line number where one applies
    """
    sections, lines, issues = read_sections(text)
    try:
        scenario = Scenario.model_validate(sections)
    except ValidationError as e:
        issues.extend(_validation_issues(e, lines))
        raise ScenarioError(sorted(issues, key=lambda i: (i.line is None, i.line or 0)))
    for section, key, message in cross_section_issues(scenario):
        issues.append(ScenarioIssue(_issue_line(lines, section, key), message))
    if issues:
        raise ScenarioError(sorted(issues, key=lambda i: (i.line is None, i.line or 0)))
    logger.debug(f"Parsed scenario '{scenario.name}' ({len(sections)} sections)")
    return scenario


def load_scenario(path: Union[str, Path]) -> Tuple[Scenario, str]:
    """Read and parse a scenario file; returns the scenario and its text."""
    text = Path(path).read_text()
    return parse_scenario(text), text


def validate_scenario(scenario: Scenario) -> Scenario:
    """Cross-section checks for scenarios built in code rather than parsed."""
    issues = [ScenarioIssue(None, message) for _, _, message in cross_section_issues(scenario)]
    if issues:
        raise ScenarioError(issues)
    return scenario


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ", ".join(_format_value(v) for v in value)
    return str(value)


def serialize_scenario(scenario: Scenario) -> str:
    """Scenario text that parses back to an equal Scenario."""
    blocks = []
    for name in SECTION_ORDER:
        section = getattr(scenario, name)
        if section is None:
            continue
        rows = [f"[{name}]"]
        for key, value in section.model_dump(exclude_none=True).items():
            if key == "description" and not value:
                continue
            rows.append(f"{key} = {_format_value(value)}")
        blocks.append("\n".join(rows))
    return "\n\n".join(blocks) + "\n"


def scenario_to_yaml(scenario: Scenario) -> str:
    """Golden-file dump of a scenario with every default filled in."""
    return yaml.dump(scenario.model_dump(mode="json"), width=100, sort_keys=False)

