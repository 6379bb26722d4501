"""
1+1 foliated spacetimes and time-like fluxes.

Coordinates are (t, x) with x on a 1D leaf (a circle or an interval). Metrics are
returned as (n, 2, 2) arrays with signature (-, +).
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from errors import GeometryError, HorizonDomainError
from fluxes.families import FluxFamily, ProfileLike, as_polynomial
from geometry.charts import MetricChart

logger = logging.getLogger(__name__)

SpacetimeMetric = Callable[[np.ndarray, np.ndarray], np.ndarray]
LeafFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class FoliatedSpacetime:
    """A time-independent 1+1 metric whose t = const slices are the leaves."""

    name: str
    metric_fn: SpacetimeMetric
    lower: float
    upper: float
    periodic: bool
    parameters: Dict[str, object] = field(default_factory=dict)
    flat: bool = False

    def metric(self, t, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        t = np.broadcast_to(np.asarray(t, dtype=float), x.shape)
        return np.asarray(self.metric_fn(t, x), dtype=float)

    def checked_metric(self, t, x) -> np.ndarray:
        """Metric values, raising GeometryError where the foliation is not space-like."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        t = np.broadcast_to(np.asarray(t, dtype=float), x.shape)
        g = self.metric(t, x)
        det = np.linalg.det(g)
        bad = ~(g[:, 0, 0] < 0.0) | ~(g[:, 1, 1] > 0.0) | ~(det < 0.0)
        if np.any(bad):
            first = int(np.argmax(bad))
            raise GeometryError(f"spacetime '{self.name}' is not (-,+) with space-like leaves",
                                (float(t[first]), float(x[first])))
        return g

    def inverse_metric(self, t, x) -> np.ndarray:
        return np.linalg.inv(self.checked_metric(t, x))

    def sqrt_abs_det(self, t, x) -> np.ndarray:
        return np.sqrt(np.abs(np.linalg.det(self.checked_metric(t, x))))

    def leaf_metric(self, x) -> np.ndarray:
        """Induced leaf metric g_11."""
        return self.checked_metric(0.0, x)[:, 1, 1]

    def lapse(self, t, x) -> np.ndarray:
        """N = (-g^{00})^(-1/2)."""
        return 1.0 / np.sqrt(-self.inverse_metric(t, x)[:, 0, 0])

    def unit_normal(self, t, x) -> np.ndarray:
        """Future-oriented unit normal n^alpha = -N g^{alpha 0}, shape (n, 2)."""
        ginv = self.inverse_metric(t, x)
        return -self.lapse(t, x)[:, None] * ginv[:, :, 0]

    def leaf_chart(self) -> MetricChart:
        """Riemannian chart of one leaf, for meshes and volumes."""

        def metric(pts):
            return self.leaf_metric(pts[:, 0]).reshape(-1, 1, 1)

        return MetricChart(
            name=f"{self.name}_leaf", dim=1, metric_fn=metric, lower=(self.lower,), upper=(self.upper,),
            periodic=(self.periodic,), flat=self.flat, parameters=dict(self.parameters),
        )


def minkowski_1_1(length: float = 1.0) -> FoliatedSpacetime:
    """Flat 1+1 spacetime on the circle of the given length."""
    if not length > 0.0:
        raise ValueError(f"Leaf length must be positive, got {length}")

    def metric(t, x):
        g = np.zeros(x.shape + (2, 2))
        g[..., 0, 0] = -1.0
        g[..., 1, 1] = 1.0
        return g

    return FoliatedSpacetime(name="minkowski_1_1", metric_fn=metric, lower=0.0, upper=float(length),
                             periodic=True, parameters={"length": float(length)}, flat=True)


def _horizon_factor(mass: float, r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if mass < 0.0:
        raise ValueError(f"Mass must be nonnegative, got {mass}")
    inside = r <= 2.0 * mass
    if np.any(inside):
        raise HorizonDomainError(float(np.atleast_1d(r)[int(np.argmax(np.atleast_1d(inside)))]), mass)
    return 1.0 - 2.0 * mass / r


def schwarzschild_metric(mass: float, r, theta) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Diagonal Schwarzschild components (g_tt, g_rr, g_thth, g_phph) outside the horizon.

    Raises:
        HorizonDomainError: for r <= 2m
    """
    factor = _horizon_factor(mass, r)
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return -factor, 1.0 / factor, r ** 2, r ** 2 * np.sin(theta) ** 2


def schwarzschild_radial(mass: float = 1.0, r_min: float = 2.5, r_max: float = 12.0) -> FoliatedSpacetime:
    """The (t, r) section of the Schwarzschild exterior on [r_min, r_max]."""
    _horizon_factor(mass, r_min)
    if not r_max > r_min:
        raise ValueError(f"r_max must exceed r_min, got [{r_min}, {r_max}]")

    def metric(t, r):
        factor = _horizon_factor(mass, r)
        g = np.zeros(r.shape + (2, 2))
        g[..., 0, 0] = -factor
        g[..., 1, 1] = 1.0 / factor
        return g

    return FoliatedSpacetime(
        name="schwarzschild_radial", metric_fn=metric, lower=float(r_min), upper=float(r_max), periodic=False,
        parameters={"mass": float(mass), "r_min": float(r_min), "r_max": float(r_max)},
    )


@dataclass(frozen=True, eq=False)
class TimelikeFlux:
    """
    Flux components f^alpha(x, u) = p_alpha(u) * c_alpha(x) for alpha = 0, 1.

    p_0 must be increasing so that the time component can be inverted.
    """

    name: str
    time_profile: Polynomial
    space_profile: Polynomial
    time_weight: LeafFunction
    space_weight: LeafFunction
    parameters: Dict[str, object] = field(default_factory=dict)

    def _weights(self, x) -> Tuple[np.ndarray, np.ndarray]:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return (np.broadcast_to(self.time_weight(x), x.shape).astype(float),
                np.broadcast_to(self.space_weight(x), x.shape).astype(float))

    def evaluate(self, x, u) -> np.ndarray:
        """(f^0, f^1), shape (n, 2)."""
        c0, c1 = self._weights(x)
        u = np.broadcast_to(np.asarray(u, dtype=float), c0.shape)
        return np.stack([self.time_profile(u) * c0, self.space_profile(u) * c1], axis=1)

    def du(self, x, u) -> np.ndarray:
        c0, c1 = self._weights(x)
        u = np.broadcast_to(np.asarray(u, dtype=float), c0.shape)
        return np.stack([self.time_profile.deriv()(u) * c0, self.space_profile.deriv()(u) * c1], axis=1)

    def is_compatible(self, spacetime: FoliatedSpacetime, samples: int = 257, tolerance: float = 1e-8) -> bool:
        """d_1(sqrt|g| c_1) = 0 (time-independent metrics), so div f(u) vanishes for frozen u."""
        x = np.linspace(spacetime.lower, spacetime.upper, samples)
        density = spacetime.sqrt_abs_det(0.0, x) * self._weights(x)[1]
        scale = max(1.0, float(np.max(np.abs(density))))
        return bool(np.max(np.abs(density - density[0])) <= tolerance * scale)

    def as_families(self, chart: MetricChart) -> Tuple[FluxFamily, FluxFamily]:
        """The two components as scalar flux families on the leaf chart."""

        def weight(fn):
            return lambda pts: np.asarray(fn(pts[:, 0]), dtype=float).reshape(-1, 1) * np.ones((pts.shape[0], 1))

        time = FluxFamily(name=f"{self.name}_t", chart=chart, profile=self.time_profile,
                          field=weight(self.time_weight), compatible=False)
        space = FluxFamily(name=f"{self.name}_x", chart=chart, profile=self.space_profile,
                           field=weight(self.space_weight), compatible=False)
        return time, space


def make_timelike_flux(
    name: str,
    time_profile: ProfileLike,
    space_profile: ProfileLike,
    time_weight: Optional[LeafFunction] = None,
    space_weight: Optional[LeafFunction] = None,
    parameters: Optional[Dict[str, object]] = None,
) -> TimelikeFlux:
    def one(x):
        return np.ones(np.shape(x))

    return TimelikeFlux(
        name=name, time_profile=as_polynomial(time_profile), space_profile=as_polynomial(space_profile),
        time_weight=time_weight or one, space_weight=space_weight or one, parameters=dict(parameters or {}),
    )


def linear_minkowski(speed: float = 0.5) -> TimelikeFlux:
    """f = (u, a u): transport at speed a."""
    return make_timelike_flux("linear_minkowski", (0.0, 1.0), (0.0, speed), parameters={"speed": speed})


def nonlinear_minkowski(time_cubic: float = 0.1, space_quadratic: float = 0.4) -> TimelikeFlux:
    """f = (u + u^3 / 10, 0.4 u^2) by default."""
    return make_timelike_flux(
        "nonlinear_minkowski", (0.0, 1.0, 0.0, time_cubic), (0.0, 0.0, space_quadratic),
        parameters={"time_cubic": time_cubic, "space_quadratic": space_quadratic},
    )


def radial_transport(mass: float = 1.0, beta: float = 0.5) -> TimelikeFlux:
    """f = (u, beta (1 - 2m/r) u): outgoing transport slower than light for beta < 1."""
    if not 0.0 <= beta < 1.0:
        raise ValueError(f"beta must lie in [0, 1) for a time-like flux, got {beta}")
    return make_timelike_flux(
        "radial_transport", (0.0, 1.0), (0.0, 1.0),
        space_weight=lambda r: beta * _horizon_factor(mass, r),
        parameters={"mass": mass, "beta": beta},
    )


def check_timelike(flux: TimelikeFlux, spacetime: FoliatedSpacetime, x_samples, u_samples) -> Dict[str, float]:
    """
    Worst values of g(d_u f, d_u f) (must be < 0) and of d_u f^0 (must be > 0)
    over the grid of leaf points and states.
    """
    x = np.asarray(x_samples, dtype=float).ravel()
    worst_norm, worst_time = -np.inf, np.inf
    g = spacetime.checked_metric(0.0, x)
    for u in np.asarray(u_samples, dtype=float).ravel():
        d = flux.du(x, u)
        norm = np.einsum("ni,nij,nj->n", d, g, d)
        worst_norm = max(worst_norm, float(norm.max()))
        worst_time = min(worst_time, float(d[:, 0].min()))
    return {"margin": worst_norm, "time_derivative_min": worst_time,
            "passed": bool(worst_norm < 0.0 and worst_time > 0.0)}


def characteristic_speed(spacetime: FoliatedSpacetime, flux: TimelikeFlux, x, u) -> np.ndarray:
    """Coordinate speed dx/dt = d_u f^1 / d_u f^0."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    spacetime.checked_metric(0.0, x)
    d = flux.du(x, u)
    return d[:, 1] / d[:, 0]


def horizon_speed_exponent(
    mass: float,
    flux: TimelikeFlux,
    u: float = 1.0,
    offsets: Sequence[float] = tuple(np.logspace(-6, -2, 9)),
) -> float:
    """
    Log-log slope of the characteristic speed against 1 - 2m/r as r approaches 2m.

    The radial transport model has slope 1: the speed vanishes like 1 - 2m/r.
    """
    delta = np.asarray(offsets, dtype=float)
    r = 2.0 * mass / (1.0 - delta)
    spacetime = schwarzschild_radial(mass, float(r.min()), float(r.max()) + 1.0)
    speed = np.abs(characteristic_speed(spacetime, flux, r, u))
    slope = np.polyfit(np.log(delta), np.log(speed), 1)[0]
    return float(slope)


SPACETIMES = ("minkowski_1_1", "schwarzschild_radial")
SPACETIME_FLUXES = ("linear_minkowski", "nonlinear_minkowski", "radial_transport")


def build_spacetime(name: str, parameters: Optional[Dict[str, object]] = None) -> FoliatedSpacetime:
    params = dict(parameters or {})
    if name == "minkowski_1_1":
        return minkowski_1_1(float(params.get("length", 1.0)))
    if name == "schwarzschild_radial":
        return schwarzschild_radial(float(params.get("mass", 1.0)), float(params.get("r_min", 2.5)),
                                    float(params.get("r_max", 12.0)))
    raise ValueError(f"Unknown spacetime '{name}'")


def build_timelike_flux(name: str, spacetime: FoliatedSpacetime,
                        parameters: Optional[Dict[str, object]] = None) -> TimelikeFlux:
    params = dict(parameters or {})
    if name == "linear_minkowski":
        return linear_minkowski(float(params.get("speed", 0.5)))
    if name == "nonlinear_minkowski":
        return nonlinear_minkowski(float(params.get("time_cubic", 0.1)), float(params.get("space_quadratic", 0.4)))
    if name == "radial_transport":
        mass = float(spacetime.parameters.get("mass", params.get("mass", 1.0)))
        return radial_transport(mass, float(params.get("beta", 0.5)))
    raise ValueError(f"Unknown time-like flux '{name}'")
