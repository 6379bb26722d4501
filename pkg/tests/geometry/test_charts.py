#!/usr/bin/env python3
"""
Chart tests: metric axioms, Christoffel consistency and the differential operators.
"""

import os
import sys

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from errors import GeometryError
from geometry import (
    CHART_NAMES,
    FourierProfile,
    MetricChart,
    build_chart,
    christoffel,
    divergence,
    divergence_christoffel,
    gradient,
    grid_points,
    laplace_beltrami,
    metric_compatibility_residual,
    metric_pairing,
    sample_points,
    weighted_circle,
    wavy_torus,
    sphere_band,
)


def test_metrics_are_symmetric_positive_definite():
    """Every built-in chart has an SPD metric at random points."""
    print("\n🧪 Metric axioms on built-in charts")
    for name in CHART_NAMES:
        chart = build_chart(name)
        pts = sample_points(chart, 200, seed=1)
        g = chart.checked_metric(pts)
        assert np.allclose(g, np.swapaxes(g, -1, -2))
        assert np.linalg.eigvalsh(g).min() > 0.0
        print(f"  ✅ {name}: min eigenvalue {np.linalg.eigvalsh(g).min():.3f}")


def test_christoffel_symbols_are_metric_compatible():
    """nabla g vanishes up to finite-difference error."""
    print("\n🧪 Metric compatibility of the Christoffel symbols")
    for name in CHART_NAMES:
        chart = build_chart(name)
        residual = metric_compatibility_residual(chart, sample_points(chart, 100, seed=2))
        print(f"  {name}: max |nabla g| = {residual.max():.2e}")
        assert residual.max() < 1e-6


def test_divergence_forms_agree_on_wavy_torus():
    """The sqrt|g| form and the Christoffel form give the same divergence."""
    chart = wavy_torus(0.5)
    pts = sample_points(chart, 150, seed=3)

    def field(p):
        return np.stack([np.sin(p[:, 1]), np.cos(p[:, 0]) * np.sin(p[:, 1])], axis=1)

    a = divergence(chart, field, pts)
    b = divergence_christoffel(chart, field, pts)
    print(f"\n🧪 Divergence forms: max difference {np.abs(a - b).max():.2e}")
    assert np.abs(a - b).max() < 1e-6


def test_sphere_band_christoffel_closed_form():
    chart = sphere_band(np.pi / 3.0)
    pts = sample_points(chart, 50, seed=6)
    theta = pts[:, 0]
    gamma = christoffel(chart, pts)
    assert np.allclose(gamma[:, 0, 1, 1], np.sin(theta) * np.cos(theta))
    assert np.allclose(gamma[:, 1, 0, 1], -np.tan(theta))
    assert np.allclose(gamma[:, 1, 1, 0], -np.tan(theta))
    assert np.allclose(gamma[:, 0, 0, 0], 0.0)


def test_gradient_raises_index_with_inverse_metric():
    chart = sphere_band(np.pi / 3.0)
    pts = sample_points(chart, 50, seed=7)

    def h(p):
        return np.sin(p[:, 0]) + np.sin(p[:, 1])

    grad = gradient(chart, h, pts)
    assert np.allclose(grad[:, 0], np.cos(pts[:, 0]), atol=1e-6)
    assert np.allclose(grad[:, 1], np.cos(pts[:, 1]) / np.cos(pts[:, 0]) ** 2, atol=1e-6)


def test_laplacian_eigenfunction_on_flat_torus():
    chart = build_chart("flat_torus")
    pts = sample_points(chart, 100, seed=4)

    def h(p):
        return np.sin(p[:, 0]) * np.cos(p[:, 1])

    lap = laplace_beltrami(chart, h, pts)
    assert np.allclose(lap, -2.0 * h(pts), atol=1e-6)


def test_laplacian_of_height_on_sphere_band():
    """sin(latitude) is a degree-one harmonic: its Laplacian is -2 times itself."""
    chart = sphere_band(np.pi / 3.0)
    pts = sample_points(chart, 100, seed=5)

    def h(p):
        return np.sin(p[:, 0])

    lap = laplace_beltrami(chart, h, pts)
    print(f"\n🧪 Sphere band Laplacian error {np.abs(lap + 2.0 * h(pts)).max():.2e}")
    assert np.allclose(lap, -2.0 * h(pts), atol=1e-5)


def test_weighted_circle_volume_density_is_k():
    k = FourierProfile(mean=2.0, sin=(1.0,))
    chart = weighted_circle(k)
    x = np.linspace(0.0, 1.0, 33)
    assert np.allclose(chart.sqrt_det(x), k(x))


def test_invalid_metrics_raise_geometry_error():
    print("\n🧪 Invalid metrics")
    with pytest.raises(GeometryError):
        weighted_circle(FourierProfile(mean=0.5, sin=(1.0,)))
    with pytest.raises(GeometryError):
        wavy_torus(1.5)
    with pytest.raises(GeometryError):
        sphere_band(2.0)

    negative = MetricChart(
        name="negative", dim=1, metric_fn=lambda p: -np.ones((p.shape[0], 1, 1)),
        lower=(0.0,), upper=(1.0,), periodic=(True,),
    )
    with pytest.raises(GeometryError) as info:
        negative.checked_metric(np.array([0.25]))
    assert info.value.location == (0.25,)
    print(f"  ✅ {info.value}")


def test_unknown_chart_name():
    with pytest.raises(ValueError):
        build_chart("klein_bottle")


def _torus_field(p):
    return np.stack([np.sin(p[:, 1]) + 0.3, np.cos(p[:, 0]) * np.sin(p[:, 1])], axis=1)


def _torus_scalar(p):
    return np.sin(p[:, 0]) * np.cos(2.0 * p[:, 1]) + np.cos(p[:, 1])


def test_gradient_and_divergence_are_dual_on_tori():
    """Integral of g(X, grad h) equals minus the integral of h div X on a closed torus."""
    print("\n🧪 Gradient/divergence duality")
    for chart in (build_chart("flat_torus"), wavy_torus(0.5)):
        pts = grid_points(chart, 64)
        weights = chart.sqrt_det(pts) * float(np.prod(chart.extent / 64))
        pairing = metric_pairing(chart, pts, _torus_field(pts), gradient(chart, _torus_scalar, pts))
        lhs = float(np.dot(weights, pairing))
        rhs = -float(np.dot(weights, _torus_scalar(pts) * divergence(chart, _torus_field, pts)))
        print(f"  {chart.name}: {lhs:+.10f} vs {rhs:+.10f}")
        assert abs(lhs - rhs) <= 1e-6 * max(1.0, abs(lhs))


def test_divergence_forms_converge_at_second_order():
    chart = wavy_torus(0.5)
    pts = sample_points(chart, 150, seed=8)

    def field(p):
        return np.stack([np.sin(p[:, 1]), np.cos(p[:, 0]) * np.sin(p[:, 1])], axis=1)

    steps = (4e-3, 2e-3, 1e-3)
    gaps = [
        np.abs(divergence(chart, field, pts, s) - divergence_christoffel(chart, field, pts, s)).max()
        for s in steps
    ]
    orders = [np.log2(gaps[n] / gaps[n + 1]) for n in range(len(gaps) - 1)]
    print(f"\n🧪 Divergence form gaps {[f'{g:.2e}' for g in gaps]}, orders {[f'{o:.2f}' for o in orders]}")
    assert min(orders) >= 1.9


if __name__ == "__main__":
    test_metrics_are_symmetric_positive_definite()
    test_christoffel_symbols_are_metric_compatible()
    test_divergence_forms_agree_on_wavy_torus()
    test_gradient_and_divergence_are_dual_on_tori()
    test_divergence_forms_converge_at_second_order()
    test_sphere_band_christoffel_closed_form()
    test_gradient_raises_index_with_inverse_metric()
    test_laplacian_eigenfunction_on_flat_torus()
    test_laplacian_of_height_on_sphere_band()
    test_weighted_circle_volume_density_is_k()
    test_invalid_metrics_raise_geometry_error()
    test_unknown_chart_name()
    print("\n✅ All chart tests passed!")
