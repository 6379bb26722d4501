#!/usr/bin/env python3
"""
Flux family tests: compatibility, the named catalog and speed bounds.
"""

import os
import sys

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from errors import CompatibilityError
from fluxes import (
    FLUX_FAMILIES,
    build_flux,
    growth_constant,
    make_compatible_flux,
    make_weighted_flux_1d,
    verify_compatibility,
)
from geometry import FourierProfile, build_chart, build_mesh

CATALOG_CHARTS = {
    "burgers_circle": "flat_circle",
    "linear_transport_circle": "flat_circle",
    "compatible_burgers_torus": "flat_torus",
    "linear_transport_torus": "flat_torus",
    "shear_cubic_torus": "flat_torus",
    "wavy_burgers_torus": "wavy_torus",
    "zonal_transport_band": "sphere_band",
    "zonal_burgers_band": "sphere_band",
    "compatible_weighted_1d": "weighted_circle",
    "zero_flux": "flat_torus",
}


def test_catalog_families_are_compatible():
    """Every compatible family is divergence-free at frozen states."""
    print("\n🧪 Compatible catalog families")
    for family, chart_name in CATALOG_CHARTS.items():
        chart = build_chart(chart_name)
        flux = build_flux(family, chart)
        mesh = build_mesh(chart, 16)
        worst = verify_compatibility(flux, mesh, [-1.0, 0.3, 2.0])
        print(f"  {family:26s} on {chart_name:16s} max |div f| = {worst:.2e}")
        assert flux.compatible
        assert worst < 1e-6


def test_catalog_covers_every_family():
    assert set(CATALOG_CHARTS) | {"weighted_burgers_1d"} == set(FLUX_FAMILIES)


def test_weighted_burgers_is_not_compatible():
    chart = build_chart("weighted_circle")
    flux = build_flux("weighted_burgers_1d", chart)
    worst = verify_compatibility(flux, build_mesh(chart, 64), [1.0])
    print(f"\n🧪 weighted_burgers_1d: max |div f(1)| = {worst:.3f}")
    assert not flux.compatible
    assert worst > 0.1


def test_constant_weight_makes_weighted_flux_compatible():
    flux = make_weighted_flux_1d(FourierProfile(mean=1.5, sin=()))
    assert flux.compatible
    assert flux.translation_invariant


def test_divergent_field_is_rejected():
    chart = build_chart("flat_torus")

    def field(p):
        return np.stack([np.sin(p[:, 0]), np.zeros(p.shape[0])], axis=1)

    with pytest.raises(CompatibilityError) as info:
        make_compatible_flux(chart, field, (0.0, 1.0), name="divergent")
    print(f"\n🧪 Rejected: {info.value}")
    assert info.value.residual > 0.5
    assert len(info.value.worst_point) == 2


def test_family_chart_mismatch():
    with pytest.raises(ValueError):
        build_flux("burgers_circle", build_chart("flat_torus"))
    with pytest.raises(ValueError):
        build_flux("no_such_flux", build_chart("flat_circle"))


def test_speed_bound_and_profile_variation():
    cubic = build_flux("shear_cubic_torus", build_chart("flat_torus"))
    assert float(cubic.speed_bound(-2.0, 1.0)) == pytest.approx(4.0)
    assert float(cubic.speed_bound(-0.5, 0.5)) == pytest.approx(0.25)

    burgers = build_flux("burgers_circle", build_chart("flat_circle"))
    assert burgers.sonic_points == pytest.approx((0.0,))
    # split at the sonic point: h(-1) -> h(0) -> h(2)
    assert float(burgers.profile_variation(-1.0, 2.0)) == pytest.approx(2.5)


def test_evaluate_shapes():
    flux = build_flux("compatible_burgers_torus", build_chart("flat_torus"))
    pts = np.array([[0.1, 0.2], [1.0, 3.0], [4.0, 5.0]])
    values = flux.evaluate(pts, np.array([1.0, 2.0, -1.0]))
    assert values.shape == (3, 2)
    assert values[1] == pytest.approx([2.0, 1.0])
    assert flux.du_evaluate(pts, 2.0)[0] == pytest.approx([2.0, 1.0])


def test_growth_constant_of_burgers():
    flux = build_flux("burgers_circle", build_chart("flat_circle"))
    # |u^2 / 2| / (1 + |u|) peaks at the ends of [-1, 1]
    assert growth_constant(flux, (-1.0, 1.0)) == pytest.approx(0.25, rel=1e-12)


if __name__ == "__main__":
    test_catalog_families_are_compatible()
    test_catalog_covers_every_family()
    test_weighted_burgers_is_not_compatible()
    test_constant_weight_makes_weighted_flux_compatible()
    test_divergent_field_is_rejected()
    test_family_chart_mismatch()
    test_speed_bound_and_profile_variation()
    test_evaluate_shapes()
    test_growth_constant_of_burgers()
    print("\n✅ All flux family tests passed!")
