#!/usr/bin/env python3
"""
Leaf-to-leaf solver tests on Minkowski and Schwarzschild leaves.
"""

import os
import sys

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from errors import CFLViolationError, HyperbolicityLossError
from fluxes import quadratic_pair
from lorentzian import (
    LeafConfig,
    LeafDiscretization,
    foliation_contraction_check,
    leaf_entropy_report,
    leaf_entropy_residual,
    lorentzian_step,
    make_timelike_flux,
    minkowski_1_1,
    nonlinear_minkowski,
    normal_flux_distance,
    radial_transport,
    schwarzschild_radial,
    solve_leaves,
    timelike_report,
)
from solvers import default_basket
from stability import kruzkov_basket

MINKOWSKI = minkowski_1_1()
FLUX = nonlinear_minkowski()
N = 128
X = (np.arange(N) + 0.5) / N
U0 = 0.5 + 0.5 * np.sin(2.0 * np.pi * X)
V0 = 0.3 + 0.3 * np.cos(2.0 * np.pi * X)
SHARED = (0.0, 1.0)


def _leaf_run(u0, variant="conservative", epsilon=1e-3, t_end=0.5):
    config = LeafConfig(t_end=t_end, snapshot_times=[0.1 * k for k in range(1, int(round(t_end / 0.1)))],
                        epsilon=epsilon, variant=variant, speed_range=SHARED)
    return solve_leaves(MINKOWSKI, FLUX, u0, config)


def _density(trajectory, u):
    return normal_flux_distance(MINKOWSKI, FLUX, trajectory.mesh, u, np.zeros_like(u))


def test_conserved_density():
    """sum sqrt|g| f^0(u) dx is the same on every leaf."""
    trajectory = _leaf_run(U0)
    totals = [_density(trajectory, u) for u in trajectory.snapshots]
    print(f"\n🧪 Leaf density totals: {totals[0]:.12f} ... {totals[-1]:.12f}")
    assert max(abs(t - totals[0]) for t in totals) < 1e-10
    assert trajectory.metadata.scheme == "lorentzian"
    assert trajectory.metadata.form == "conservative"


def test_leaves_contract_in_normal_flux():
    a, b = _leaf_run(U0), _leaf_run(V0)
    report = foliation_contraction_check(a, b, MINKOWSKI, FLUX)
    distances = report.details["distances"]
    print(f"\n🧪 Normal-flux distances: {[f'{d:.5f}' for d in distances]}")
    assert report.passed
    assert distances[-1] < distances[0]


def test_local_variant_agrees_for_smooth_data():
    """Before characteristics cross both variants approximate the same solution."""
    conservative = _leaf_run(U0, t_end=0.2).final
    local = _leaf_run(U0, variant="local", t_end=0.2).final
    assert np.abs(conservative - local).mean() < 2e-2


def test_local_variant_needs_compatible_flux():
    spacetime = schwarzschild_radial()
    config = LeafConfig(t_end=0.1, variant="local")
    with pytest.raises(ValueError):
        solve_leaves(spacetime, radial_transport(), np.ones(32), config)


def test_hyperbolicity_loss_is_detected():
    folded = make_timelike_flux("folded", (0.0, 1.0, 0.0, -1.0), (0.0, 0.5))
    with pytest.raises(HyperbolicityLossError):
        LeafDiscretization.build(MINKOWSKI, folded, 32, (-1.0, 1.0))


def test_oversized_leaf_step():
    disc = LeafDiscretization.build(MINKOWSKI, FLUX, N, SHARED)
    dt = disc.stable_dt(1e-3, 0.4, 1e-2)
    with pytest.raises(CFLViolationError):
        lorentzian_step(disc, U0, 10.0 * dt / 0.4, 1e-3)
    assert lorentzian_step(disc, U0, dt, 1e-3).shape == U0.shape


def test_schwarzschild_inflow():
    """Radial transport from a prescribed state at r_min into an empty exterior."""
    spacetime = schwarzschild_radial(mass=1.0, r_min=2.5, r_max=12.0)
    flux = radial_transport(1.0, 0.5)
    config = LeafConfig(t_end=4.0, epsilon=0.0, inflow_state=1.0)
    trajectory = solve_leaves(spacetime, flux, np.zeros(64), config)
    print(f"\n🧪 Schwarzschild inflow: u at r_min {trajectory.final[0]:.4f}")
    assert trajectory.final[0] > 0.5
    assert not trajectory.metadata.compatible
    assert timelike_report(flux, spacetime, trajectory.metadata.speed_range).passed
    assert not leaf_entropy_report(trajectory, spacetime, flux, kruzkov_basket(trajectory)).applicable
    with pytest.raises(ValueError):
        leaf_entropy_residual(trajectory, spacetime, flux, quadratic_pair(),
                              default_basket(trajectory.mesh.chart, 4.0)[0])


def test_leaf_entropy_inequality():
    trajectory = _leaf_run(U0)
    report = leaf_entropy_report(trajectory, MINKOWSKI, FLUX, kruzkov_basket(trajectory))
    print(f"\n🧪 Leaf entropy: worst {report.margin:+.3e}, tolerance {report.tolerance:.3e}")
    assert report.applicable
    assert report.passed


if __name__ == "__main__":
    test_conserved_density()
    test_leaves_contract_in_normal_flux()
    test_local_variant_agrees_for_smooth_data()
    test_local_variant_needs_compatible_flux()
    test_hyperbolicity_loss_is_detected()
    test_oversized_leaf_step()
    test_schwarzschild_inflow()
    test_leaf_entropy_inequality()
    print("\n✅ All leaf solver tests passed!")
