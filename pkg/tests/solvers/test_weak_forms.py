#!/usr/bin/env python3
"""
Test functions and weak-form residuals.
"""

import os
import sys

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from fluxes import build_flux, kruzkov_pair, linear_pair, quadratic_pair
from geometry import build_chart, build_mesh, partial_derivatives, sample_points
from solvers import (
    FVConfig,
    SpaceTimeBump,
    default_basket,
    kruzkov_pair_residual,
    solve_fv,
    weak_entropy_residual,
    weak_form_tolerance,
)
from solvers.weak_forms import trapezoid_weights, weak_form_scale

CHART = build_chart("flat_circle")
MESH = build_mesh(CHART, 128)
FLUX = build_flux("burgers_circle", CHART)
SNAPSHOTS = [0.02 * k for k in range(1, 20)]


def _burgers_run():
    u0 = 0.5 + np.sin(2.0 * np.pi * MESH.centers[:, 0])
    return solve_fv(MESH, FLUX, u0, FVConfig(t_end=0.4, snapshot_times=SNAPSHOTS))


def test_trapezoid_weights_integrate_constants():
    times = np.array([0.0, 0.1, 0.15, 0.4])
    weights = trapezoid_weights(times)
    assert weights.sum() == pytest.approx(0.4)
    assert np.dot(weights, times) == pytest.approx(0.08)


def test_bumps_are_nonnegative_and_vanish_at_cutoff():
    print("\n🧪 Test-function basket")
    for chart_name in ("flat_circle", "flat_torus", "sphere_band"):
        chart = build_chart(chart_name)
        basket = default_basket(chart, t_end=0.5)
        assert len(basket) == 6
        pts = sample_points(chart, 50, seed=8)
        for theta in basket:
            assert np.all(theta.space_factor(chart, pts) >= 0.0)
            assert theta.time_factor(0.5) == 0.0
            assert theta.time_factor(0.0) == 1.0
        print(f"  ✅ {chart_name}: {len(basket)} bumps")


def test_bump_partials_match_finite_differences():
    for chart_name in ("flat_torus", "sphere_band"):
        chart = build_chart(chart_name)
        theta = SpaceTimeBump(t_cut=1.0, center=tuple(np.asarray(chart.lower) + 0.3 * chart.extent), sharpness=4.0)
        pts = sample_points(chart, 40, seed=9)
        analytic = theta.space_partials(chart, pts)
        numeric = partial_derivatives(chart, lambda p: theta.space_factor(chart, p), pts)
        assert np.allclose(analytic, numeric, atol=1e-6)


def test_bump_validation():
    with pytest.raises(ValueError):
        SpaceTimeBump(t_cut=0.0, center=(0.5,))
    with pytest.raises(ValueError):
        SpaceTimeBump(t_cut=1.0, center=(0.5,), sharpness=0.5)


def test_entropy_residuals_of_fv_run():
    """The FV run is an entropy solution: residuals stay above -C (dx + dt)."""
    trajectory = _burgers_run()
    print("\n🧪 Weak entropy residuals")
    for pair in (quadratic_pair(), kruzkov_pair(0.5), kruzkov_pair(-0.2)):
        size = float(np.max(np.abs(pair.entropy(trajectory.initial))))
        for theta in default_basket(CHART, trajectory.t_end):
            value = weak_entropy_residual(trajectory, pair, theta)
            assert value >= -weak_form_tolerance(trajectory, theta, size)
        print(f"  ✅ {pair.name}")


def test_mass_pair_residual_nearly_vanishes():
    """U = u turns the inequality into the conservation law itself."""
    trajectory = _burgers_run()
    for theta in default_basket(CHART, trajectory.t_end):
        value = weak_entropy_residual(trajectory, linear_pair(), theta)
        assert abs(value) <= weak_form_tolerance(trajectory, theta, 1.5)


def test_kruzkov_residual_of_identical_runs_is_zero():
    trajectory = _burgers_run()
    theta = default_basket(CHART, trajectory.t_end)[0]
    assert kruzkov_pair_residual(trajectory, trajectory, theta) == 0.0
    assert weak_form_scale(trajectory, theta, 0.0) > 0.0


def test_residual_needs_flux():
    trajectory = _burgers_run()
    bare = type(trajectory)(mesh=trajectory.mesh, times=trajectory.times, snapshots=trajectory.snapshots,
                            metadata=trajectory.metadata)
    with pytest.raises(ValueError):
        weak_entropy_residual(bare, quadratic_pair(), default_basket(CHART, 0.4)[0])


if __name__ == "__main__":
    test_trapezoid_weights_integrate_constants()
    test_bumps_are_nonnegative_and_vanish_at_cutoff()
    test_bump_partials_match_finite_differences()
    test_bump_validation()
    test_entropy_residuals_of_fv_run()
    test_mass_pair_residual_nearly_vanishes()
    test_kruzkov_residual_of_identical_runs_is_zero()
    test_residual_needs_flux()
    print("\n✅ All weak-form tests passed!")
