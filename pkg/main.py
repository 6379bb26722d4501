#!/usr/bin/env python3
"""
Manifold conservation lab - scenario runner.

Usage:
    python main.py run scenarios/library/burgers_torus.cfg
    python main.py verify runs/burgers_torus
    python main.py compare runs/a_run/a runs/b_run/a --p 1
    python main.py oracle scenarios/library/oracle_weighted.cfg
    python main.py mesh-dump scenarios/library/sphere_band_zonal.cfg
"""

import argparse
import logging
import sys
from pathlib import Path

from config import LIBRARY_DIR, configure_logging, get_settings
from errors import LabError, ScenarioError
from scenarios import (
    EXIT_ABORT,
    EXIT_FAIL,
    EXIT_PASS,
    compare_directories,
    load_scenario,
    mesh_rows,
    run_scenario,
    verify_directory,
)
from utils.display import (
    Colors,
    print_colored,
    print_error,
    print_norm_series,
    print_report_table,
    print_rows,
    print_section_header,
)

logger = logging.getLogger(__name__)


def _resolve_cfg(path: str) -> Path:
    """Accept a path or the bare name of a shipped scenario."""
    candidate = Path(path)
    if candidate.exists():
        return candidate
    shipped = LIBRARY_DIR / (path if path.endswith(".cfg") else f"{path}.cfg")
    if shipped.exists():
        return shipped
    raise FileNotFoundError(f"No scenario file '{path}' (also looked in {LIBRARY_DIR})")


def cmd_run(args, settings) -> int:
    scenario, text = load_scenario(_resolve_cfg(args.scenario))
    print_section_header(f"Run: {scenario.name}")
    outcome = run_scenario(scenario, settings, text)
    if outcome.exit_code == EXIT_ABORT:
        print_colored(f"Solver aborted; see {outcome.directory / 'diagnostic.txt'}", Colors.RED)
        return EXIT_ABORT
    print_report_table(outcome.verdict)
    print_colored(f"\nArtifacts: {outcome.directory}", Colors.BLUE)
    return outcome.exit_code


def cmd_verify(args, settings) -> int:
    verdict = verify_directory(args.directory, settings.threads)
    print_section_header(f"Verify: {args.directory}")
    print_report_table(verdict)
    return EXIT_PASS if verdict.passed else EXIT_FAIL


def cmd_compare(args, settings) -> int:
    rows = compare_directories(args.a, args.b, args.p)
    print_norm_series(rows, ("t", f"L{args.p:g}_distance"))
    return EXIT_PASS


def cmd_oracle(args, settings) -> int:
    scenario, text = load_scenario(_resolve_cfg(args.scenario))
    if scenario.solver.scheme != "oracle":
        raise ValueError(
            f"Scenario '{scenario.name}' uses scheme '{scenario.solver.scheme}'; the oracle needs scheme = oracle"
        )
    outcome = run_scenario(scenario, settings, text)
    if outcome.exit_code == EXIT_ABORT:
        print_colored(f"Oracle run aborted; see {outcome.directory / 'diagnostic.txt'}", Colors.RED)
        return EXIT_ABORT
    rows = outcome.tables["oracle"]
    print_norm_series(rows, ("x", "u_exact", "u_fv", "abs_diff"))
    print_colored(f"max |diff| = {rows[:, 3].max():.3e}", Colors.BLUE)
    print_report_table(outcome.verdict)
    return outcome.exit_code


def cmd_mesh_dump(args, settings) -> int:
    scenario, _ = load_scenario(_resolve_cfg(args.scenario))
    rows = mesh_rows(scenario)
    dim = len(rows[0]) - 2 if rows else 1
    header = ",".join(["cell"] + [f"x{i}" for i in range(dim)] + ["volume"])
    print_rows(rows, header)
    return EXIT_PASS


COMMANDS = {
    "run": cmd_run,
    "verify": cmd_verify,
    "compare": cmd_compare,
    "oracle": cmd_oracle,
    "mesh-dump": cmd_mesh_dump,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Manifold conservation lab - scalar conservation laws on curved geometries",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Exit status:
  0  every applicable property passed
  1  a property failed, or the input was invalid
  2  the solver aborted (diagnostic.txt written in the run directory)

Environment:
  MANIFOLD_LAB_OUTPUT_ROOT, MANIFOLD_LAB_THREADS, MANIFOLD_LAB_LOG_LEVEL
        """
    )
    parser.add_argument("--threads", type=int, default=None, help="Cap on worker threads inside one run")
    parser.add_argument("--output-root", type=Path, default=None, help="Root directory for run artifacts")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run a scenario and verify its properties")
    run.add_argument("scenario", help="Scenario file or shipped scenario name")

    verify = sub.add_parser("verify", help="Recheck the properties of a stored run")
    verify.add_argument("directory", help="Run directory or trajectory directory")

    compare = sub.add_parser("compare", help="Distance time series between two stored trajectories")
    compare.add_argument("a", help="First trajectory (or run) directory")
    compare.add_argument("b", help="Second trajectory (or run) directory")
    compare.add_argument("--p", type=float, default=1.0, help="Norm exponent (default 1)")

    oracle = sub.add_parser("oracle", help="Characteristics oracle against the FV solution")
    oracle.add_argument("scenario", help="Scenario file with scheme = oracle")

    mesh_dump = sub.add_parser("mesh-dump", help="Print cell centers and volumes as CSV")
    mesh_dump.add_argument("scenario", help="Scenario file")
    return parser


def main(argv=None) -> int:
    """Main entry point."""
    args = build_parser().parse_args(argv)
    try:
        settings = get_settings(threads=args.threads, output_root=args.output_root, log_level=args.log_level)
    except ValueError as e:
        print_error(e)
        return EXIT_FAIL
    configure_logging(settings)
    try:
        return COMMANDS[args.command](args, settings)
    except ScenarioError as e:
        print_error(e)
        return EXIT_FAIL
    except LabError as e:
        print_error(e)
        return EXIT_ABORT
    except (ValueError, FileNotFoundError) as e:
        print_error(e)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
