"""
Flux families f_x(u) on a chart.

Every built-in family is separable, f_x(u) = h(u) * V(x): a scalar polynomial profile h
times a tangent field V given by contravariant components. A family is geometry-compatible
when V is divergence-free, since then div f_x(u) = h(u) * div V = 0 for every frozen u.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial

from errors import CompatibilityError
from geometry.charts import FourierProfile, MetricChart, grid_points, weighted_circle
from geometry.mesh import ManifoldMesh, TangentFieldSamples
from geometry.operators import divergence, metric_norm

logger = logging.getLogger(__name__)

TangentField = Callable[[np.ndarray], np.ndarray]
ProfileLike = Union[Polynomial, Sequence[float]]

COMPATIBILITY_TOLERANCE = 1e-10


def as_polynomial(profile: ProfileLike) -> Polynomial:
    """Accept a Polynomial or its ascending coefficients."""
    if isinstance(profile, Polynomial):
        return profile
    return Polynomial(np.asarray(list(profile), dtype=float))


@dataclass(frozen=True, eq=False)
class FluxFamily:
    """Separable flux h(u) * V(x) with its u-derivative and compatibility metadata."""

    name: str
    chart: MetricChart
    profile: Polynomial
    field: TangentField
    compatible: bool
    parameters: Dict[str, object] = field(default_factory=dict)
    translation_invariant: bool = False

    @property
    def dim(self) -> int:
        return self.chart.dim

    @cached_property
    def profile_derivative(self) -> Polynomial:
        return self.profile.deriv()

    @cached_property
    def profile_second_derivative(self) -> Polynomial:
        return self.profile.deriv(2) if self.profile.degree() >= 2 else Polynomial([0.0])

    @cached_property
    def sonic_points(self) -> Tuple[float, ...]:
        """Real roots of h', where the characteristic speed changes sign."""
        return _real_roots(self.profile_derivative)

    def field_at(self, x) -> np.ndarray:
        pts = self.chart.points(x)
        return np.asarray(self.field(pts), dtype=float).reshape(pts.shape)

    def _broadcast(self, x, u) -> Tuple[np.ndarray, np.ndarray]:
        pts = self.chart.points(x)
        values = np.broadcast_to(np.asarray(u, dtype=float), (pts.shape[0],))
        return pts, values

    def evaluate(self, x, u) -> np.ndarray:
        """Contravariant components f^j_x(u), shape (n, dim)."""
        pts, values = self._broadcast(x, u)
        return self.profile(values)[:, None] * self.field_at(pts)

    def du_evaluate(self, x, u) -> np.ndarray:
        """d_u f^j_x(u), shape (n, dim)."""
        pts, values = self._broadcast(x, u)
        return self.profile_derivative(values)[:, None] * self.field_at(pts)

    def sample(self, mesh: ManifoldMesh, u: float) -> TangentFieldSamples:
        """f_x(u) at the cell centers of a mesh."""
        return TangentFieldSamples(mesh, mesh.centers, self.evaluate(mesh.centers, u))

    def speed_bound(self, lo, hi) -> np.ndarray:
        """Exact max of |h'| over [lo, hi] (endpoints and interior roots of h'')."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        best = np.maximum(np.abs(self.profile_derivative(lo)), np.abs(self.profile_derivative(hi)))
        for root in _real_roots(self.profile_second_derivative):
            inside = (lo <= root) & (root <= hi)
            best = np.where(inside, np.maximum(best, abs(self.profile_derivative(root))), best)
        return best

    def profile_variation(self, lo, hi) -> np.ndarray:
        """Total variation of h over [lo, hi], split at the sonic points."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        breaks = [lo] + [np.clip(s, lo, hi) for s in self.sonic_points] + [hi]
        total = np.zeros(np.broadcast(lo, hi).shape)
        for a, b in zip(breaks[:-1], breaks[1:]):
            total = total + np.abs(self.profile(b) - self.profile(a))
        return total


def _real_roots(poly: Polynomial, tol: float = 1e-12) -> Tuple[float, ...]:
    if poly.degree() < 1 or not np.any(poly.coef):
        return ()
    roots = poly.roots()
    real = roots[np.abs(roots.imag) <= tol * np.maximum(1.0, np.abs(roots.real))].real
    return tuple(sorted(float(r) for r in real))


def make_compatible_flux(
    chart: MetricChart,
    field: TangentField,
    profile: ProfileLike,
    name: str = "compatible",
    parameters: Optional[Dict[str, object]] = None,
    tolerance: float = COMPATIBILITY_TOLERANCE,
    samples_per_axis: int = 32,
    translation_invariant: bool = False,
) -> FluxFamily:
    """
    Build f_x(u) = h(u) V(x) after checking that V is divergence-free.

    Raises:
        CompatibilityError: if |div V| exceeds the tolerance somewhere on the sample grid
    """
    points = grid_points(chart, samples_per_axis)
    residual = np.abs(divergence(chart, field, points))
    worst = int(np.argmax(residual))
    if residual[worst] > tolerance:
        raise CompatibilityError(f"field for flux '{name}' is not divergence-free", points[worst], residual[worst])
    logger.debug(f"Flux '{name}' accepted as compatible (max |div V| = {residual[worst]:.2e})")
    return FluxFamily(
        name=name, chart=chart, profile=as_polynomial(profile), field=field,
        compatible=True, parameters=dict(parameters or {}),
        translation_invariant=translation_invariant,
    )


def make_weighted_flux_1d(
    k: Optional[FourierProfile] = None,
    f: ProfileLike = (0.0, 0.0, 0.5),
    name: str = "weighted_1d",
    parameters: Optional[Dict[str, object]] = None,
) -> FluxFamily:
    """
    The flux of d_t u + (1/k) d_x(k f(u)) = 0 on the circle with metric k^2 dx^2.

    The contravariant component is f(u) itself (V = 1), so sqrt|g| f^1 = k f(u).
    Compatible only for constant k.
    """
    k = k or FourierProfile()
    chart = weighted_circle(k)

    def unit_field(pts):
        return np.ones((pts.shape[0], 1))

    params = dict(parameters or {})
    params.update(k.as_parameters())
    return FluxFamily(
        name=name, chart=chart, profile=as_polynomial(f), field=unit_field,
        compatible=k.is_constant, parameters=params, translation_invariant=k.is_constant,
    )


def verify_compatibility(flux: FluxFamily, mesh: ManifoldMesh, u_samples: Iterable[float]) -> float:
    """Max over cell centers and frozen states of |div_x f_x(u)|."""
    worst = 0.0
    for u in u_samples:
        residual = divergence(mesh.chart, lambda pts, u=u: flux.evaluate(pts, u), mesh.centers)
        worst = max(worst, float(np.max(np.abs(residual))))
    return worst


def growth_constant(flux: FluxFamily, u_range: Tuple[float, float], samples_per_axis: int = 32,
                    u_count: int = 33) -> float:
    """Smallest C_0 with |f_x(u)|_g <= C_0 (1 + |u|) on a sample grid over the data range."""
    points = grid_points(flux.chart, samples_per_axis)
    worst = 0.0
    for u in np.linspace(u_range[0], u_range[1], u_count):
        size = metric_norm(flux.chart, points, flux.evaluate(points, u))
        worst = max(worst, float(np.max(size)) / (1.0 + abs(u)))
    return worst
