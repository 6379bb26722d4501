"""
Pointwise differential operators on a MetricChart.

Vector fields and scalar functions are passed as callables over point batches:
a tangent field maps (n, dim) points to (n, dim) contravariant components, a scalar
function maps (n, dim) points to (n,) values. Derivatives of these callables are
taken by central differences with a step relative to the axis period.
"""
from typing import Callable, Optional

import numpy as np

from geometry.charts import MetricChart, christoffel

TangentField = Callable[[np.ndarray], np.ndarray]
ScalarFunction = Callable[[np.ndarray], np.ndarray]

FIRST_DERIVATIVE_STEP = 1e-5
SECOND_DERIVATIVE_STEP = 1e-4


def _steps(chart: MetricChart, rel_step: Optional[float], default: float) -> np.ndarray:
    return (default if rel_step is None else rel_step) * chart.extent


def partial_derivatives(chart: MetricChart, h: ScalarFunction, x, rel_step: Optional[float] = None) -> np.ndarray:
    """d_j h at each point, shape (n, dim)."""
    pts = chart.points(x)
    steps = _steps(chart, rel_step, FIRST_DERIVATIVE_STEP)
    out = np.empty(pts.shape)
    for j in range(chart.dim):
        shift = np.zeros(chart.dim)
        shift[j] = steps[j]
        out[:, j] = (h(pts + shift) - h(pts - shift)) / (2.0 * steps[j])
    return out


def divergence(chart: MetricChart, field: TangentField, x, rel_step: Optional[float] = None) -> np.ndarray:
    """(sqrt|g|)^-1 d_j(sqrt|g| X^j), the coordinate form that only needs |g|."""
    pts = chart.points(x)
    steps = _steps(chart, rel_step, FIRST_DERIVATIVE_STEP)
    total = np.zeros(pts.shape[0])
    for j in range(chart.dim):
        shift = np.zeros(chart.dim)
        shift[j] = steps[j]
        plus, minus = pts + shift, pts - shift
        flux_plus = chart.sqrt_det(plus) * np.asarray(field(plus))[:, j]
        flux_minus = chart.sqrt_det(minus) * np.asarray(field(minus))[:, j]
        total += (flux_plus - flux_minus) / (2.0 * steps[j])
    return total / chart.sqrt_det(pts)


def divergence_christoffel(chart: MetricChart, field: TangentField, x, rel_step: Optional[float] = None) -> np.ndarray:
    """d_j X^j + Gamma^j_{kj} X^k."""
    pts = chart.points(x)
    steps = _steps(chart, rel_step, FIRST_DERIVATIVE_STEP)
    values = np.asarray(field(pts))
    total = np.zeros(pts.shape[0])
    for j in range(chart.dim):
        shift = np.zeros(chart.dim)
        shift[j] = steps[j]
        total += (np.asarray(field(pts + shift))[:, j] - np.asarray(field(pts - shift))[:, j]) / (2.0 * steps[j])
    gamma = christoffel(chart, pts)
    contracted = np.einsum("...jkj->...k", gamma)
    return total + np.einsum("...k,...k->...", contracted, values)


def gradient(chart: MetricChart, h: ScalarFunction, x, rel_step: Optional[float] = None) -> np.ndarray:
    """Contravariant components g^{ij} d_j h."""
    pts = chart.points(x)
    dh = partial_derivatives(chart, h, pts, rel_step)
    return np.einsum("...ij,...j->...i", chart.inverse_metric(pts), dh)


def hessian_coordinates(chart: MetricChart, h: ScalarFunction, x, rel_step: Optional[float] = None) -> np.ndarray:
    """Coordinate second derivatives d_i d_j h, shape (n, dim, dim)."""
    pts = chart.points(x)
    steps = _steps(chart, rel_step, SECOND_DERIVATIVE_STEP)
    center = h(pts)
    out = np.empty((pts.shape[0], chart.dim, chart.dim))
    for i in range(chart.dim):
        ei = np.zeros(chart.dim)
        ei[i] = steps[i]
        out[:, i, i] = (h(pts + ei) - 2.0 * center + h(pts - ei)) / steps[i] ** 2
        for j in range(i + 1, chart.dim):
            ej = np.zeros(chart.dim)
            ej[j] = steps[j]
            mixed = (
                h(pts + ei + ej) - h(pts + ei - ej) - h(pts - ei + ej) + h(pts - ei - ej)
            ) / (4.0 * steps[i] * steps[j])
            out[:, i, j] = mixed
            out[:, j, i] = mixed
    return out


def laplace_beltrami(chart: MetricChart, h: ScalarFunction, x, rel_step: Optional[float] = None) -> np.ndarray:
    """g^{ij}(d_i d_j h - Gamma^k_{ij} d_k h)."""
    pts = chart.points(x)
    ginv = chart.inverse_metric(pts)
    hess = hessian_coordinates(chart, h, pts, rel_step)
    dh = partial_derivatives(chart, h, pts)
    gamma = christoffel(chart, pts)
    second = hess - np.einsum("...kij,...k->...ij", gamma, dh)
    return np.einsum("...ij,...ij->...", ginv, second)


def metric_pairing(chart: MetricChart, x, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """g(a, b) for contravariant component arrays a, b of shape (n, dim)."""
    return np.einsum("...i,...ij,...j->...", a, chart.metric(x), b)


def metric_norm(chart: MetricChart, x, a: np.ndarray) -> np.ndarray:
    """|a|_g."""
    return np.sqrt(np.maximum(metric_pairing(chart, x, a, a), 0.0))
