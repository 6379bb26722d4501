"""
Nonnegative space-time test functions theta(t, x) = a(t) * b(x).
"""
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from geometry.charts import MetricChart

BASKET_SHARPNESS = (1, 4, 16)
BASKET_CENTERS = 2
BASKET_SEED = 7


@dataclass(frozen=True)
class SpaceTimeBump:
    """
    Smooth nonnegative test function.

    Time factor: ((1 - (t / t_cut)^2)_+)^3, vanishing at t_cut with two derivatives.
    Space factor per axis: ((1 + cos(2 pi (x - c) / P)) / 2)^m on periodic axes;
    exp(-m (s(x) - s(c))^2) with s(x) = cos(pi (x - lo) / W) on bounded axes, whose
    normal derivative vanishes at both edges.
    """

    t_cut: float
    center: Tuple[float, ...]
    sharpness: float = 1.0

    def __post_init__(self):
        if not self.t_cut > 0.0:
            raise ValueError(f"t_cut must be positive, got {self.t_cut}")
        if self.sharpness < 1.0:
            raise ValueError(f"sharpness must be at least 1, got {self.sharpness}")

    def time_factor(self, t) -> np.ndarray:
        s = np.asarray(t, dtype=float) / self.t_cut
        return np.where(s < 1.0, np.clip(1.0 - s * s, 0.0, None) ** 3, 0.0)

    def time_derivative(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        s = t / self.t_cut
        inside = s < 1.0
        base = np.clip(1.0 - s * s, 0.0, None)
        return np.where(inside, 3.0 * base ** 2 * (-2.0 * t / self.t_cut ** 2), 0.0)

    def _axis_terms(self, chart: MetricChart, pts: np.ndarray, axis: int) -> Tuple[np.ndarray, np.ndarray]:
        """(factor, d factor / dx) along one axis."""
        x = pts[:, axis]
        c = self.center[axis]
        m = self.sharpness
        lo, width = chart.lower[axis], chart.extent[axis]
        if chart.periodic[axis]:
            phase = 2.0 * np.pi * (x - c) / width
            base = 0.5 * (1.0 + np.cos(phase))
            value = base ** m
            slope = m * base ** (m - 1.0) * (-0.5 * np.sin(phase)) * (2.0 * np.pi / width)
            return value, slope
        arg = np.pi * (x - lo) / width
        s = np.cos(arg)
        sc = np.cos(np.pi * (c - lo) / width)
        value = np.exp(-m * (s - sc) ** 2)
        slope = value * (-2.0 * m * (s - sc)) * (-np.sin(arg) * np.pi / width)
        return value, slope

    def space_factor(self, chart: MetricChart, x) -> np.ndarray:
        pts = chart.points(x)
        value = np.ones(pts.shape[0])
        for axis in range(chart.dim):
            value = value * self._axis_terms(chart, pts, axis)[0]
        return value

    def space_partials(self, chart: MetricChart, x) -> np.ndarray:
        """d_j b, shape (n, dim)."""
        pts = chart.points(x)
        terms = [self._axis_terms(chart, pts, axis) for axis in range(chart.dim)]
        out = np.empty(pts.shape)
        for j in range(chart.dim):
            product = terms[j][1].copy()
            for axis in range(chart.dim):
                if axis != j:
                    product = product * terms[axis][0]
            out[:, j] = product
        return out

    def value(self, chart: MetricChart, t, x) -> np.ndarray:
        return self.time_factor(t) * self.space_factor(chart, x)


def default_basket(
    chart: MetricChart,
    t_end: float,
    seed: int = BASKET_SEED,
    sharpness: Sequence[float] = BASKET_SHARPNESS,
    centers: int = BASKET_CENTERS,
) -> List[SpaceTimeBump]:
    """Deterministic basket: each sharpness with `centers` random centers, cut off at t_end."""
    rng = np.random.default_rng(seed)
    lower = np.asarray(chart.lower, dtype=float)
    basket = []
    for m in sharpness:
        for _ in range(centers):
            center = lower + rng.random(chart.dim) * chart.extent
            basket.append(SpaceTimeBump(t_cut=float(t_end), center=tuple(float(c) for c in center),
                                        sharpness=float(m)))
    return basket
