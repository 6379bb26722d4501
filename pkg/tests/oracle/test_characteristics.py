#!/usr/bin/env python3
"""
Characteristics oracle tests: conserved quantity, crossing time and exact solutions.
"""

import os
import sys

import numpy as np
import pytest
from numpy.polynomial import Polynomial

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from errors import ShockCrossingError
from fluxes import make_weighted_flux_1d
from geometry import FourierProfile, build_mesh
from oracle import (
    WeightedProblem,
    compare_with_fv,
    crossing_time,
    make_problem,
    oracle_convergence,
    smooth_solve,
    standard_weights,
    trace_characteristic,
    trace_feet,
)
from solvers import FVConfig, solve_fv

HALF_SQUARE = Polynomial([0.0, 0.0, 0.5])
FLAT = FourierProfile(mean=1.0, sin=())
WEIGHT = FourierProfile(mean=2.0, sin=(1.0,))


def positive_wave(x):
    return 1.0 + 0.2 * np.sin(2.0 * np.pi * np.asarray(x, dtype=float))


def test_weighted_flux_is_conserved_along_characteristics():
    print("\n🧪 Drift of k(X) f(v) along characteristics")
    for k in standard_weights():
        problem = make_problem(k, HALF_SQUARE, positive_wave)
        drift = max(trace_characteristic(problem, y, 0.3).drift(problem) for y in (0.1, 0.4, 0.75))
        print(f"  k mean {k.mean}: drift {drift:.2e}")
        assert drift < 1e-8


def test_flat_weight_gives_straight_lines():
    problem = make_problem(FLAT, HALF_SQUARE, positive_wave)
    feet = np.linspace(0.05, 0.95, 7)
    assert np.allclose(trace_feet(problem, feet, 0.4), feet + 0.4 * positive_wave(feet), atol=1e-12)
    curve = trace_characteristic(problem, 0.3, 0.4)
    assert curve.times[-1] == pytest.approx(0.4)
    assert np.allclose(curve.states, positive_wave(0.3), atol=1e-12)


def test_burgers_crossing_time():
    """For u0 = 1 + a sin(2 pi x) with k = 1 the first crossing is at 1 / (2 pi a)."""
    problem = make_problem(FLAT, HALF_SQUARE, positive_wave)
    t_star = crossing_time(problem)
    print(f"\n🧪 Crossing time {t_star:.6f} (expected {1.0 / (0.4 * np.pi):.6f})")
    assert t_star == pytest.approx(1.0 / (0.4 * np.pi), rel=1e-3)

    still = make_problem(FLAT, HALF_SQUARE, lambda x: np.ones_like(np.asarray(x, dtype=float)))
    assert crossing_time(still, t_max=1.0) == float("inf")


def test_smooth_solve_satisfies_implicit_burgers_relation():
    problem = make_problem(FLAT, HALF_SQUARE, positive_wave)
    x = np.linspace(0.0, 1.0, 50, endpoint=False)
    t = 0.5
    u = smooth_solve(problem, t, x)
    assert np.abs(u - positive_wave(x - u * t)).max() < 1e-7
    assert np.array_equal(smooth_solve(problem, 0.0, x), positive_wave(x))


def test_smooth_solve_refuses_after_crossing():
    problem = make_problem(FLAT, HALF_SQUARE, lambda x: np.sin(2.0 * np.pi * np.asarray(x, dtype=float)))
    with pytest.raises(ShockCrossingError) as info:
        smooth_solve(problem, 0.5, np.linspace(0.0, 1.0, 16, endpoint=False))
    assert info.value.crossing_time == pytest.approx(1.0 / (2.0 * np.pi), rel=1e-2)


def test_problem_validation():
    with pytest.raises(ValueError):
        WeightedProblem(k=FourierProfile(mean=0.5, sin=(1.0,)), f=HALF_SQUARE, u0=positive_wave)
    with pytest.raises(ValueError):
        WeightedProblem(k=WEIGHT, f=Polynomial([0.0, 0.0, 0.0, 1.0]), u0=positive_wave)
    with pytest.raises(ValueError):
        WeightedProblem(k=WEIGHT, f=Polynomial([0.0, 1.0]), u0=positive_wave)
    assert all(k.minimum() > 0.0 for k in standard_weights())


def test_finite_volume_converges_to_oracle():
    problem = make_problem(WEIGHT, HALF_SQUARE, positive_wave)
    t = min(0.2, 0.5 * crossing_time(problem))
    rows = oracle_convergence(problem, [64, 128, 256], t)
    print("\n🧪 Oracle convergence")
    for row in rows:
        print(f"  N={int(row['resolution'])}: error {row['error']:.3e}, order {row['order']:.3f}")
    errors = [row["error"] for row in rows]
    assert errors[0] > errors[1] > errors[2]
    assert np.isnan(rows[0]["order"])
    assert min(row["order"] for row in rows[1:]) > 0.6


def test_compare_rows_against_fv_run():
    problem = make_problem(WEIGHT, HALF_SQUARE, positive_wave)
    t = min(0.2, 0.5 * crossing_time(problem))
    flux = make_weighted_flux_1d(WEIGHT, HALF_SQUARE.coef)
    mesh = build_mesh(flux.chart, 128)
    trajectory = solve_fv(mesh, flux, problem.u0(mesh.centers[:, 0]), FVConfig(t_end=t))
    rows = compare_with_fv(problem, trajectory, threads=2)
    print(f"\n🧪 Oracle vs FV at t={t:.3f}: max |diff| {rows[:, 3].max():.3e}")
    assert rows.shape == (128, 4)
    assert np.array_equal(rows[:, 0], mesh.centers[:, 0])
    assert np.allclose(rows[:, 3], np.abs(rows[:, 1] - rows[:, 2]))
    assert rows[:, 3].mean() < 0.05


if __name__ == "__main__":
    test_weighted_flux_is_conserved_along_characteristics()
    test_flat_weight_gives_straight_lines()
    test_burgers_crossing_time()
    test_smooth_solve_satisfies_implicit_burgers_relation()
    test_smooth_solve_refuses_after_crossing()
    test_problem_validation()
    test_finite_volume_converges_to_oracle()
    test_compare_rows_against_fv_run()
    print("\n✅ All oracle tests passed!")
