#!/usr/bin/env python3
"""
End-to-end scenario runs: artifacts, verification of stored runs and the CLI.
"""

import os
import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

import main
from config import LIBRARY_DIR, get_settings
from scenarios import (
    EXIT_ABORT,
    EXIT_PASS,
    compare_directories,
    load_scenario,
    mesh_rows,
    parse_scenario,
    run_scenario,
    verify_directory,
)

LIBRARY = sorted(LIBRARY_DIR.glob("*.cfg"))

PAIR = """\
[scenario]
name = small_pair
seed = 1

[manifold]
chart = flat_circle
resolution = 64

[flux]
family = burgers_circle

[initial]
profile = sine
offset = 0.5

[companion]
profile = pulse
amplitude = 0.8
center = 0.3

[solver]
scheme = fv
t_end = 0.2
snapshots = 0.05, 0.1, 0.15

[properties]
checks = mass_conservation, contraction, max_principle, lp_stability
"""

FOLDED = """\
[scenario]
name = folded_leaf

[spacetime]
name = minkowski_1_1
resolution = 32

[flux]
family = nonlinear_minkowski
time_cubic = -1.0

[initial]
profile = sine

[solver]
scheme = lorentzian
t_end = 0.1

[properties]
checks = timelike
"""


def test_run_writes_artifacts(tmp_path):
    settings = get_settings(output_root=tmp_path, threads=2)
    outcome = run_scenario(parse_scenario(PAIR), settings, PAIR)
    print(f"\n🧪 Run {outcome.scenario}: exit {outcome.exit_code}")
    for report in outcome.verdict.reports:
        print(f"  {report.status()} {report.name}")
    assert outcome.exit_code == EXIT_PASS
    assert [r.name for r in outcome.verdict.reports] == [
        "mass_conservation", "contraction", "max_principle", "lp_stability",
    ]
    directory = tmp_path / "small_pair"
    assert outcome.directory == directory
    for name in ("a/scenario.cfg", "b/scenario.cfg", "reports.csv", "report.txt"):
        assert (directory / name).exists(), name
    assert (directory / "a" / "scenario.cfg").read_text() == PAIR
    assert (directory / "report.txt").read_text().splitlines()[1] == "verdict: PASS"


def test_rerun_is_byte_identical(tmp_path):
    scenario = parse_scenario(PAIR)
    run_scenario(scenario, get_settings(output_root=tmp_path / "one"), PAIR)
    run_scenario(scenario, get_settings(output_root=tmp_path / "two", threads=2), PAIR)
    for name in ("reports.csv", "a/norms.csv"):
        first = (tmp_path / "one" / "small_pair" / name).read_bytes()
        assert first == (tmp_path / "two" / "small_pair" / name).read_bytes()


def test_stored_run_verifies_and_compares(tmp_path):
    run_scenario(parse_scenario(PAIR), get_settings(output_root=tmp_path), PAIR)
    directory = tmp_path / "small_pair"
    verdict = verify_directory(directory)
    assert verdict.passed
    assert [r.status() for r in verdict.reports] == ["PASS"] * 4

    rows = compare_directories(directory / "a", directory / "b")
    assert rows.shape == (5, 2)
    assert np.all(np.diff(rows[:, 1]) <= 1e-12)


def test_solver_abort_writes_diagnostic(tmp_path):
    outcome = run_scenario(parse_scenario(FOLDED), get_settings(output_root=tmp_path), FOLDED)
    assert outcome.exit_code == EXIT_ABORT
    diagnostic = (tmp_path / "folded_leaf" / "diagnostic.txt").read_text()
    print(f"\n🧪 Diagnostic:\n{diagnostic}")
    assert "error: HyperbolicityLossError" in diagnostic


def test_dry_run_keeps_everything_in_memory(tmp_path):
    outcome = run_scenario(parse_scenario(PAIR), get_settings(output_root=tmp_path), write=False)
    assert outcome.directory is None
    assert set(outcome.trajectories) == {"a", "b"}
    assert not any(tmp_path.iterdir())


def test_mesh_rows_of_scenario():
    rows = mesh_rows(parse_scenario(PAIR))
    assert len(rows) == 64
    assert rows[0][0] == 0
    assert abs(sum(row[-1] for row in rows) - 1.0) < 1e-12


def test_cli_exit_codes(tmp_path):
    print("\n🧪 CLI exit codes")
    cfg = tmp_path / "small_pair.cfg"
    cfg.write_text(PAIR)
    root = ["--output-root", str(tmp_path / "runs"), "--log-level", "WARNING"]
    assert main.main(root + ["run", str(cfg)]) == 0
    assert main.main(root + ["verify", str(tmp_path / "runs" / "small_pair")]) == 0
    assert main.main(root + ["compare", str(tmp_path / "runs" / "small_pair" / "a"),
                             str(tmp_path / "runs" / "small_pair" / "b")]) == 0
    assert main.main(root + ["mesh-dump", "sphere_band_zonal"]) == 0

    broken = tmp_path / "broken.cfg"
    broken.write_text(PAIR.replace("[solver]", "[solvr]"))
    assert main.main(root + ["run", str(broken)]) == 1
    assert main.main(root + ["run", str(tmp_path / "missing.cfg")]) == 1
    assert main.main(root + ["oracle", str(cfg)]) == 1

    folded = tmp_path / "folded.cfg"
    folded.write_text(FOLDED)
    assert main.main(root + ["run", str(folded)]) == 2
    print("  ✅ 0 pass, 1 invalid input, 2 solver abort")


@pytest.mark.parametrize("path", LIBRARY, ids=[p.stem for p in LIBRARY])
def test_library_scenario_passes_and_reruns_identically(path, tmp_path):
    """Every shipped scenario passes, and two runs (1 and 2 threads) write the same bytes."""
    scenario, text = load_scenario(path)
    outcomes = [
        run_scenario(scenario, get_settings(output_root=tmp_path / label, threads=threads), text)
        for label, threads in (("one", 1), ("two", 2))
    ]
    print(f"\n🧪 {scenario.name}: exit codes {[o.exit_code for o in outcomes]}")
    for report in outcomes[0].verdict.reports:
        print(f"  {report.status()} {report.name} (margin {report.margin:+.3e})")
    assert [o.exit_code for o in outcomes] == [EXIT_PASS, EXIT_PASS]

    first, second = (o.directory for o in outcomes)
    files = sorted(p.relative_to(first) for p in first.rglob("*") if p.is_file())
    assert files == sorted(p.relative_to(second) for p in second.rglob("*") if p.is_file())
    assert Path("reports.csv") in files
    for name in files:
        assert (first / name).read_bytes() == (second / name).read_bytes(), str(name)


if __name__ == "__main__":
    import tempfile

    for test in (test_run_writes_artifacts, test_rerun_is_byte_identical, test_stored_run_verifies_and_compares,
                 test_solver_abort_writes_diagnostic, test_dry_run_keeps_everything_in_memory, test_cli_exit_codes):
        with tempfile.TemporaryDirectory() as tmp:
            test(Path(tmp))
    for cfg in LIBRARY:
        with tempfile.TemporaryDirectory() as tmp:
            test_library_scenario_passes_and_reruns_identically(cfg, Path(tmp))
    test_mesh_rows_of_scenario()
    print("\n✅ All runner tests passed!")
