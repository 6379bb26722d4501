#!/usr/bin/env python3
"""
Trajectory storage, comparison and schedule tests.
"""

import os
import sys

import numpy as np
import pytest
from pydantic import ValidationError

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from errors import TrajectoryMismatchError
from fluxes import build_flux
from geometry import build_chart, build_mesh
from solvers import (
    FVConfig,
    SolutionTrajectory,
    distance_series,
    ensure_comparable,
    read_metadata,
    read_trajectory,
    solve_fv,
    write_trajectory,
)

CHART = build_chart("flat_circle")
FLUX = build_flux("burgers_circle", CHART)


def _trajectory(n=64, t_end=0.2, amplitude=1.0):
    mesh = build_mesh(CHART, n)
    u0 = amplitude * np.sin(2.0 * np.pi * mesh.centers[:, 0])
    return solve_fv(mesh, FLUX, u0, FVConfig(t_end=t_end, snapshot_times=[0.05, 0.1], speed_range=(-1.0, 1.0)))


def test_write_then_read_is_exact(tmp_path):
    trajectory = _trajectory()
    directory = write_trajectory(trajectory, tmp_path / "a", scenario_text="[scenario]\nname = demo\n")
    print(f"\n🧪 Stored files: {sorted(p.name for p in directory.iterdir())[:4]} ...")
    assert (directory / "scenario.cfg").exists()
    assert (directory / "norms.csv").exists()
    assert read_metadata(directory) == trajectory.metadata

    loaded = read_trajectory(directory, trajectory.mesh, FLUX)
    assert np.array_equal(loaded.times, trajectory.times)
    for stored, original in zip(loaded.snapshots, trajectory.snapshots):
        assert np.array_equal(stored, original)


def test_norm_series_columns():
    trajectory = _trajectory()
    rows = trajectory.norm_series()
    assert rows.shape == (4, 5)
    assert np.array_equal(rows[:, 0], trajectory.times)
    # L1 <= L2 <= Linf on a unit-volume circle
    assert np.all(rows[:, 1] <= rows[:, 2] + 1e-12)
    assert np.all(rows[:, 2] <= rows[:, 3] + 1e-12)


def test_distance_series_and_mismatches():
    a = _trajectory()
    b = _trajectory(amplitude=0.5)
    rows = distance_series(a, b, p=1.0)
    assert rows.shape == (4, 2)
    assert rows[0, 1] > 0.0

    with pytest.raises(TrajectoryMismatchError):
        distance_series(a, _trajectory(n=32))
    with pytest.raises(TrajectoryMismatchError):
        distance_series(a, _trajectory(t_end=0.3))


def test_ensure_comparable_needs_matching_runs():
    a = _trajectory()
    mesh = a.mesh
    u0 = a.initial
    other = solve_fv(mesh, FLUX, u0, FVConfig(t_end=0.2, snapshot_times=[0.05, 0.1], numerical_flux="engquist_osher",
                                              speed_range=(-1.0, 1.0)))
    with pytest.raises(TrajectoryMismatchError):
        ensure_comparable(a, other)
    ensure_comparable(a, _trajectory(amplitude=0.5))


def test_trajectory_invariants():
    a = _trajectory()
    with pytest.raises(ValueError):
        SolutionTrajectory(mesh=a.mesh, times=[0.0, 0.0], snapshots=a.snapshots[:2], metadata=a.metadata)
    with pytest.raises(ValueError):
        SolutionTrajectory(mesh=a.mesh, times=[0.0, 0.1], snapshots=(a.initial[:10], a.final[:10]),
                           metadata=a.metadata)
    assert not a.final.flags.writeable


def test_schedule_validation():
    config = FVConfig(t_end=1.0, snapshot_times=[0.5, 0.25, 0.5])
    assert config.schedule() == [0.0, 0.25, 0.5, 1.0]
    with pytest.raises(ValidationError):
        FVConfig(t_end=1.0, snapshot_times=[1.5])
    with pytest.raises(ValidationError):
        FVConfig(t_end=1.0, snapshot_times=[-0.1])
    with pytest.raises(ValidationError):
        FVConfig(t_end=1.0, cfl=1.2)
    with pytest.raises(ValidationError):
        FVConfig(t_end=1.0, speed_range=(1.0, -1.0))


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as tmp:
        test_write_then_read_is_exact(Path(tmp))
    test_norm_series_columns()
    test_distance_series_and_mismatches()
    test_ensure_comparable_needs_matching_runs()
    test_trajectory_invariants()
    test_schedule_validation()
    print("\n✅ All trajectory tests passed!")
