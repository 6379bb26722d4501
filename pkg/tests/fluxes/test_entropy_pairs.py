#!/usr/bin/env python3
"""
Entropy pair and inverse tests.
"""

import os
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import Polynomial

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from fluxes import (
    EntropyPair,
    branch_inverse,
    build_flux,
    entropy_flux,
    general_entropy_residual_terms,
    kruzkov_flux,
    kruzkov_pair,
    linear_pair,
    monotone_inverse,
    quadratic_pair,
    zero_pair,
)
from geometry import build_chart, sample_points

CIRCLE_BURGERS = build_flux("burgers_circle", build_chart("flat_circle"))
TORUS_BURGERS = build_flux("compatible_burgers_torus", build_chart("flat_torus"))
TIME_PROFILE = Polynomial([0.0, 1.0, 0.0, 0.1])


def test_kruzkov_flux_matches_closed_form():
    """Quadrature split at the kink reproduces sgn(u - k)(f(u) - f(k))."""
    print("\n🧪 Kruzkov entropy flux")
    pts = sample_points(TORUS_BURGERS.chart, 40, seed=0)
    u = np.linspace(-2.0, 2.0, 40)
    for kappa in (-0.7, 0.0, 0.3, 1.5):
        quad = entropy_flux(TORUS_BURGERS, kruzkov_pair(kappa), pts, u, base=kappa)
        exact = kruzkov_flux(TORUS_BURGERS, kappa, pts, u)
        print(f"  kappa={kappa:+.1f}: max difference {np.abs(quad - exact).max():.2e}")
        assert np.allclose(quad, exact, atol=1e-12)


def test_pair_flux_uses_its_base_point():
    pair = kruzkov_pair(0.4)
    x = np.array([0.1, 0.5])
    u = np.array([1.0, -1.0])
    assert np.allclose(pair.flux(CIRCLE_BURGERS, x, u), kruzkov_flux(CIRCLE_BURGERS, 0.4, x, u))


def test_quadratic_and_linear_pairs():
    x = np.linspace(0.05, 0.95, 7)
    u = np.linspace(-1.5, 1.5, 7)
    # F = int_0^u 2w * w dw = 2u^3/3 with V = 1
    assert np.allclose(quadratic_pair().flux(CIRCLE_BURGERS, x, u)[:, 0], 2.0 * u ** 3 / 3.0)
    assert np.allclose(linear_pair().flux(CIRCLE_BURGERS, x, u)[:, 0], 0.5 * u ** 2)
    assert np.allclose(zero_pair().flux(CIRCLE_BURGERS, x, u), 0.0)


def test_convexity_and_quadrature_order():
    samples = np.linspace(-3.0, 3.0, 101)
    assert quadratic_pair().is_convex(samples)
    assert kruzkov_pair(0.2).is_convex(samples)
    concave = EntropyPair(name="concave", U=lambda u: -u * u, dU=lambda u: -2.0 * u)
    assert not concave.is_convex(samples)
    with pytest.raises(ValueError):
        EntropyPair(name="coarse", U=lambda u: u * u, dU=lambda u: 2.0 * u, order=3)


def test_general_entropy_source_term():
    """The frozen-state divergence vanishes for compatible fluxes only."""
    print("\n🧪 (div F)(u) source term")
    pts = sample_points(TORUS_BURGERS.chart, 30, seed=1)
    _, div = general_entropy_residual_terms(TORUS_BURGERS, quadratic_pair(), pts, np.ones(30))
    assert np.abs(div).max() < 1e-8

    weighted = build_flux("weighted_burgers_1d", build_chart("weighted_circle"))
    _, div = general_entropy_residual_terms(weighted, quadratic_pair(), np.array([0.0]), np.array([1.0]))
    # (1/k) k' * 2u^3/3 at x = 0 with k = 2 + sin(2 pi x)
    print(f"  weighted circle: (div F)(1) at x=0 is {div[0]:.4f}")
    assert div[0] == pytest.approx(np.pi * 2.0 / 3.0, rel=1e-6)


@given(st.floats(min_value=-5.0, max_value=5.0))
@settings(max_examples=100, deadline=None)
def test_monotone_inverse_recovers_state(u):
    recovered = monotone_inverse(TIME_PROFILE, np.array([TIME_PROFILE(u)]), 0.0, 1.0)
    assert recovered[0] == pytest.approx(u, abs=1e-9)


def test_branch_inverse_both_sides():
    half_square = Polynomial([0.0, 0.0, 0.5])
    targets = np.array([0.5, 2.0, 0.0])
    assert branch_inverse(half_square, targets, 0.0, 1) == pytest.approx([1.0, 2.0, 0.0], abs=1e-12)
    assert branch_inverse(half_square, targets, 0.0, -1) == pytest.approx([-1.0, -2.0, 0.0], abs=1e-12)


if __name__ == "__main__":
    test_kruzkov_flux_matches_closed_form()
    test_pair_flux_uses_its_base_point()
    test_quadratic_and_linear_pairs()
    test_convexity_and_quadrature_order()
    test_general_entropy_source_term()
    test_branch_inverse_both_sides()
    print("\n✅ All entropy pair tests passed!")
