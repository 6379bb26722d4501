"""Display utilities for property reports, distance series and lab errors."""
from typing import Iterable, Sequence

import numpy as np
from colorama import Fore, Style, init

from errors import LabError, ScenarioError
from stability.models import PropertyReport, ScenarioVerdict

init()


class Colors:
    """Terminal colors used across the CLI."""
    RED = Fore.RED
    GREEN = Fore.GREEN
    YELLOW = Fore.YELLOW
    BLUE = Fore.BLUE
    CYAN = Fore.CYAN
    MAGENTA = Fore.MAGENTA
    NC = Style.RESET_ALL


STATUS_COLORS = {"PASS": Colors.GREEN, "FAIL": Colors.RED, "N/A": Colors.YELLOW}


def print_colored(text: str, color: str = Colors.NC) -> None:
    """Print text with specified color."""
    print(f"{color}{text}{Colors.NC}")


def print_section_header(title: str) -> None:
    """Print a formatted section header."""
    print()
    print_colored(f"{'=' * 60}", Colors.CYAN)
    print_colored(f"{title.center(60)}", Colors.CYAN)
    print_colored(f"{'=' * 60}", Colors.CYAN)
    print()


def print_subsection(title: str) -> None:
    """Print a formatted subsection header."""
    print()
    print_colored(f"--- {title} ---", Colors.YELLOW)
    print()


def format_report(report: PropertyReport) -> str:
    text = f"{report.status():4s}  {report.name:24s} margin {report.margin:+.3e}  tol {report.tolerance:.1e}"
    if report.location:
        text += f"  @ {report.location}"
    if not report.applicable:
        text += f"  ({report.details.get('reason', 'not applicable')})"
    return text


def print_report_table(verdict: ScenarioVerdict) -> None:
    """One colored line per property, then the overall verdict."""
    print_subsection(f"Properties of {verdict.scenario}")
    if not verdict.reports:
        print("  (no properties requested)")
    for report in verdict.reports:
        print_colored(f"  {format_report(report)}", STATUS_COLORS[report.status()])
    print()
    if verdict.passed:
        print_colored("All applicable properties passed", Colors.GREEN)
    else:
        failed = ", ".join(r.name for r in verdict.failures())
        print_colored(f"Failed: {failed}", Colors.RED)


def print_norm_series(rows: np.ndarray, columns: Sequence[str] = ("t", "distance")) -> None:
    """CSV of a time series, plot-ready, on stdout."""
    print(",".join(columns))
    for row in np.atleast_2d(rows):
        print(",".join(f"{value:.17g}" for value in row))


def print_rows(rows: Iterable[Sequence[float]], header: str) -> None:
    print(header)
    for row in rows:
        print(",".join(str(int(v)) if i == 0 else f"{v:.17g}" for i, v in enumerate(row)))


def format_lab_error(error: LabError) -> str:
    """Readable multi-line text for any lab error; scenario issues one per line."""
    if isinstance(error, ScenarioError):
        lines = [f"Scenario has {len(error.issues)} issue(s):"]
        lines += [f"  - {issue}" for issue in error.issues]
        return "\n".join(lines)
    return f"{type(error).__name__}: {error}"


def print_error(error: Exception) -> None:
    text = format_lab_error(error) if isinstance(error, LabError) else f"Error: {error}"
    print_colored(text, Colors.RED)
