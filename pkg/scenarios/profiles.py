"""
Named initial profiles on a chart box.
"""
from typing import Callable

import numpy as np

from geometry.charts import MetricChart
from geometry.mesh import ManifoldMesh
from scenarios.models import InitialSpec

ProfileFunction = Callable[[np.ndarray], np.ndarray]


def _relative(chart: MetricChart, pts: np.ndarray) -> np.ndarray:
    """Coordinates rescaled to [0, 1) per axis."""
    lower = np.asarray(chart.lower, dtype=float)
    return (pts - lower) / np.asarray(chart.extent, dtype=float)


def profile_function(spec: InitialSpec, chart: MetricChart) -> ProfileFunction:
    """
    The smooth (noise-free) profile as a function of chart points of shape (n, dim).

    Positions, centers and widths are relative to the chart box, so one section
    works on every chart.
    """
    dim = chart.dim

    if spec.profile == "constant":
        def constant(pts):
            return np.full(chart.points(pts).shape[0], spec.offset)
        return constant

    if spec.profile == "sine":
        k = np.zeros(dim)
        given = np.asarray(spec.wavenumber[:dim], dtype=float)
        k[:given.size] = given

        def sine(pts):
            s = _relative(chart, chart.points(pts))
            return spec.offset + spec.amplitude * np.sin(2.0 * np.pi * (s @ k))
        return sine

    if spec.profile == "pulse":
        center = np.full(dim, 0.5)
        if spec.center is not None:
            given = np.asarray(spec.center[:dim], dtype=float)
            center[:given.size] = given
        periodic = np.asarray(chart.periodic, dtype=bool)

        def pulse(pts):
            d = _relative(chart, chart.points(pts)) - center
            d = np.where(periodic, d - np.round(d), d)
            return spec.offset + spec.amplitude * np.exp(-np.sum(d ** 2, axis=1) / (2.0 * spec.width ** 2))
        return pulse

    def riemann(pts):
        s = _relative(chart, chart.points(pts))[:, spec.axis]
        return np.where(s < spec.position, spec.left, spec.right) + spec.offset
    return riemann


def cell_values(spec: InitialSpec, mesh: ManifoldMesh, seed: int = 0) -> np.ndarray:
    """Profile at the cell centers plus seeded uniform noise of amplitude spec.noise."""
    values = profile_function(spec, mesh.chart)(mesh.centers)
    if spec.noise > 0.0:
        rng = np.random.default_rng(seed)
        values = values + spec.noise * rng.uniform(-1.0, 1.0, size=values.shape)
    return values
