"""
Coordinate charts with a Riemannian metric.

A chart evaluates g_ij at batches of points. Points are arrays of shape (n, dim);
metric values have shape (n, dim, dim) and metric derivatives (n, dim, dim, dim)
with the derivative index first: dg[:, k, i, j] = d_k g_ij.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from errors import GeometryError

logger = logging.getLogger(__name__)

MetricFunction = Callable[[np.ndarray], np.ndarray]

# Central-difference step for metric derivatives, relative to the axis period.
METRIC_FD_STEP = 1e-5


@dataclass(frozen=True)
class FourierProfile:
    """Periodic function on [0, 1): mean + sum of cos/sin harmonics of 2*pi*n*x."""

    mean: float = 2.0
    cos: Tuple[float, ...] = ()
    sin: Tuple[float, ...] = (1.0,)

    def _harmonics(self, x: np.ndarray):
        x = np.asarray(x, dtype=float)
        n_terms = max(len(self.cos), len(self.sin))
        modes = np.arange(1, n_terms + 1)
        phase = 2.0 * np.pi * np.multiply.outer(x, modes)
        a = np.zeros(n_terms)
        b = np.zeros(n_terms)
        a[: len(self.cos)] = self.cos
        b[: len(self.sin)] = self.sin
        return phase, modes, a, b

    def __call__(self, x) -> np.ndarray:
        phase, _, a, b = self._harmonics(x)
        return self.mean + np.cos(phase) @ a + np.sin(phase) @ b

    def derivative(self, x) -> np.ndarray:
        phase, modes, a, b = self._harmonics(x)
        w = 2.0 * np.pi * modes
        return np.cos(phase) @ (w * b) - np.sin(phase) @ (w * a)

    def second_derivative(self, x) -> np.ndarray:
        phase, modes, a, b = self._harmonics(x)
        w2 = (2.0 * np.pi * modes) ** 2
        return -(np.cos(phase) @ (w2 * a)) - np.sin(phase) @ (w2 * b)

    @property
    def is_constant(self) -> bool:
        return not any(self.cos) and not any(self.sin)

    def minimum(self, samples: int = 4096) -> float:
        return float(np.min(self(np.arange(samples) / samples)))

    def as_parameters(self) -> Dict[str, object]:
        return {"k_mean": self.mean, "k_cos": list(self.cos), "k_sin": list(self.sin)}


@dataclass(frozen=True)
class MetricChart:
    """
    A chart over a box of coordinates carrying a metric tensor.

    Axes are either periodic (circle directions) or closed intervals with
    zero-normal-flux closure (the latitude direction of the sphere band).
    """

    name: str
    dim: int
    metric_fn: MetricFunction
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    periodic: Tuple[bool, ...]
    metric_derivative_fn: Optional[MetricFunction] = None
    flat: bool = False
    parameters: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"Only 1D and 2D charts are supported, got dim={self.dim}")
        for seq in (self.lower, self.upper, self.periodic):
            if len(seq) != self.dim:
                raise ValueError("lower/upper/periodic must have one entry per axis")

    @property
    def extent(self) -> np.ndarray:
        return np.asarray(self.upper, dtype=float) - np.asarray(self.lower, dtype=float)

    @property
    def fd_step(self) -> np.ndarray:
        """Central-difference step per axis (fixed fraction of the period)."""
        return METRIC_FD_STEP * self.extent

    @property
    def fully_periodic(self) -> bool:
        return all(self.periodic)

    def points(self, x) -> np.ndarray:
        """Normalize coordinates to an (n, dim) float array."""
        pts = np.asarray(x, dtype=float)
        if pts.ndim == 0:
            pts = pts.reshape(1, 1)
        elif pts.ndim == 1:
            pts = pts.reshape(-1, 1) if self.dim == 1 else pts.reshape(1, -1)
        if pts.shape[-1] != self.dim:
            raise ValueError(f"Expected points with {self.dim} coordinates, got shape {pts.shape}")
        return pts

    def metric(self, x) -> np.ndarray:
        return np.asarray(self.metric_fn(self.points(x)), dtype=float)

    def checked_metric(self, x) -> np.ndarray:
        """Metric values, raising GeometryError where g is not positive-definite."""
        pts = self.points(x)
        g = self.metric(pts)
        eigenvalues = np.linalg.eigvalsh(g)
        bad = ~np.isfinite(eigenvalues).all(axis=-1) | (eigenvalues.min(axis=-1) <= 0.0)
        if np.any(bad):
            first = int(np.argmax(bad))
            raise GeometryError(f"metric of chart '{self.name}' is not positive-definite", pts[first])
        return g

    def inverse_metric(self, x) -> np.ndarray:
        return np.linalg.inv(self.checked_metric(x))

    def sqrt_det(self, x) -> np.ndarray:
        return np.sqrt(np.linalg.det(self.checked_metric(x)))

    def metric_derivatives(self, x, rel_step: Optional[float] = None) -> np.ndarray:
        """d_k g_ij, analytic when the chart provides it, else central differences."""
        pts = self.points(x)
        if self.metric_derivative_fn is not None and rel_step is None:
            return np.asarray(self.metric_derivative_fn(pts), dtype=float)
        steps = self.fd_step if rel_step is None else rel_step * self.extent
        dg = np.empty((pts.shape[0], self.dim, self.dim, self.dim))
        for k in range(self.dim):
            shift = np.zeros(self.dim)
            shift[k] = steps[k]
            dg[:, k] = (self.metric(pts + shift) - self.metric(pts - shift)) / (2.0 * steps[k])
        return dg


def christoffel(chart: MetricChart, x) -> np.ndarray:
    """
    Christoffel symbols of the second kind.

    Returns an array gamma[n, i, k, j] = Gamma^i_{kj}
    = 1/2 g^{il} (d_k g_lj + d_j g_kl - d_l g_kj), symmetric in (k, j).
    """
    pts = chart.points(x)
    ginv = chart.inverse_metric(pts)
    dg = chart.metric_derivatives(pts)
    # all three terms re-indexed as [l, k, j]
    d_k_glj = np.einsum("...klj->...lkj", dg)
    d_j_gkl = np.einsum("...jkl->...lkj", dg)
    d_l_gkj = dg
    gamma = 0.5 * np.einsum("...il,...lkj->...ikj", ginv, d_k_glj + d_j_gkl - d_l_gkj)
    return 0.5 * (gamma + np.swapaxes(gamma, -1, -2))


def metric_compatibility_residual(chart: MetricChart, x, rel_step: float = 1e-5) -> np.ndarray:
    """
    Max over (k, i, j) of |nabla_k g_ij| per point.

    The partial derivatives of g are re-derived with an independent finite-difference
    step so the residual measures the consistency of the Christoffel symbols.
    """
    pts = chart.points(x)
    g = chart.metric(pts)
    gamma = christoffel(chart, pts)
    dg = chart.metric_derivatives(pts, rel_step=rel_step)
    # nabla_k g_ij = d_k g_ij - Gamma^l_{ki} g_lj - Gamma^l_{kj} g_il
    term_i = np.einsum("...lki,...lj->...kij", gamma, g)
    term_j = np.einsum("...lkj,...il->...kij", gamma, g)
    residual = dg - term_i - term_j
    return np.abs(residual).reshape(pts.shape[0], -1).max(axis=1)


# ---------------------------------------------------------------------------
# Built-in charts
# ---------------------------------------------------------------------------

def flat_circle() -> MetricChart:
    """Unit-length circle [0, 1) with the Euclidean metric."""

    def metric(pts):
        return np.ones((pts.shape[0], 1, 1))

    def derivative(pts):
        return np.zeros((pts.shape[0], 1, 1, 1))

    return MetricChart(
        name="flat_circle", dim=1, metric_fn=metric, metric_derivative_fn=derivative,
        lower=(0.0,), upper=(1.0,), periodic=(True,), flat=True,
    )


def weighted_circle(k: Optional[FourierProfile] = None) -> MetricChart:
    """Circle [0, 1) with metric k(x)^2 dx^2, so that sqrt|g| = k."""
    k = k or FourierProfile()
    if k.minimum() <= 0.0:
        raise GeometryError("weight k must be positive on the circle")

    def metric(pts):
        return (k(pts[:, 0]) ** 2).reshape(-1, 1, 1)

    def derivative(pts):
        x = pts[:, 0]
        return (2.0 * k(x) * k.derivative(x)).reshape(-1, 1, 1, 1)

    return MetricChart(
        name="weighted_circle", dim=1, metric_fn=metric, metric_derivative_fn=derivative,
        lower=(0.0,), upper=(1.0,), periodic=(True,), flat=k.is_constant,
        parameters=k.as_parameters(),
    )


def flat_torus() -> MetricChart:
    """The 2-torus [0, 2pi)^2 with the Euclidean metric."""

    def metric(pts):
        return np.broadcast_to(np.eye(2), (pts.shape[0], 2, 2)).copy()

    def derivative(pts):
        return np.zeros((pts.shape[0], 2, 2, 2))

    two_pi = 2.0 * np.pi
    return MetricChart(
        name="flat_torus", dim=2, metric_fn=metric, metric_derivative_fn=derivative,
        lower=(0.0, 0.0), upper=(two_pi, two_pi), periodic=(True, True), flat=True,
    )


def conformal_factor(pts: np.ndarray, amplitude: float) -> np.ndarray:
    """c(x) = 1 + amplitude * sin(x1) * sin(x2) for the wavy torus."""
    return 1.0 + amplitude * np.sin(pts[:, 0]) * np.sin(pts[:, 1])


def wavy_torus(amplitude: float = 0.5) -> MetricChart:
    """2-torus with the conformal metric c(x)^2 * I."""
    if not 0.0 <= amplitude < 1.0:
        raise GeometryError(f"wavy torus amplitude must lie in [0, 1), got {amplitude}")

    def metric(pts):
        c = conformal_factor(pts, amplitude)
        return (c ** 2)[:, None, None] * np.eye(2)

    def derivative(pts):
        c = conformal_factor(pts, amplitude)
        dc = np.stack([
            amplitude * np.cos(pts[:, 0]) * np.sin(pts[:, 1]),
            amplitude * np.sin(pts[:, 0]) * np.cos(pts[:, 1]),
        ], axis=1)
        return (2.0 * c[:, None] * dc)[:, :, None, None] * np.eye(2)

    two_pi = 2.0 * np.pi
    return MetricChart(
        name="wavy_torus", dim=2, metric_fn=metric, metric_derivative_fn=derivative,
        lower=(0.0, 0.0), upper=(two_pi, two_pi), periodic=(True, True),
        flat=amplitude == 0.0, parameters={"amplitude": amplitude},
    )


def sphere_band(latitude: float = np.pi / 3.0) -> MetricChart:
    """
    Latitude-longitude band of the unit sphere, theta in [-latitude, latitude].

    Coordinates are (theta, phi) with metric d theta^2 + cos^2(theta) d phi^2;
    phi is periodic, theta is closed by zero-normal-flux walls.
    """
    if not 0.0 < latitude < np.pi / 2.0:
        raise GeometryError(f"band half-width must lie in (0, pi/2), got {latitude}")

    def metric(pts):
        g = np.zeros((pts.shape[0], 2, 2))
        g[:, 0, 0] = 1.0
        g[:, 1, 1] = np.cos(pts[:, 0]) ** 2
        return g

    def derivative(pts):
        dg = np.zeros((pts.shape[0], 2, 2, 2))
        dg[:, 0, 1, 1] = -2.0 * np.sin(pts[:, 0]) * np.cos(pts[:, 0])
        return dg

    return MetricChart(
        name="sphere_band", dim=2, metric_fn=metric, metric_derivative_fn=derivative,
        lower=(-latitude, 0.0), upper=(latitude, 2.0 * np.pi), periodic=(False, True),
        parameters={"latitude": latitude},
    )


CHART_NAMES = ("flat_circle", "weighted_circle", "flat_torus", "wavy_torus", "sphere_band")


def build_chart(name: str, parameters: Optional[Dict[str, object]] = None) -> MetricChart:
    """Construct a built-in chart from its name and scenario parameters."""
    params = dict(parameters or {})
    if name == "flat_circle":
        return flat_circle()
    if name == "weighted_circle":
        profile = FourierProfile(
            mean=float(params.get("k_mean", 2.0)),
            cos=tuple(float(v) for v in params.get("k_cos", ())),
            sin=tuple(float(v) for v in params.get("k_sin", (1.0,))),
        )
        return weighted_circle(profile)
    if name == "flat_torus":
        return flat_torus()
    if name == "wavy_torus":
        return wavy_torus(float(params.get("amplitude", 0.5)))
    if name == "sphere_band":
        return sphere_band(float(params.get("latitude", np.pi / 3.0)))
    raise ValueError(f"Unknown chart '{name}'; expected one of {', '.join(CHART_NAMES)}")


def sample_points(chart: MetricChart, count: int, seed: int = 0) -> np.ndarray:
    """Uniform random points inside the chart box (fixed seed)."""
    rng = np.random.default_rng(seed)
    lower = np.asarray(chart.lower)
    return lower + rng.random((count, chart.dim)) * chart.extent


def grid_points(chart: MetricChart, per_axis: int) -> np.ndarray:
    """Cell-centred tensor grid with per_axis points along every axis."""
    axes: Sequence[np.ndarray] = [
        lo + (np.arange(per_axis) + 0.5) * (hi - lo) / per_axis
        for lo, hi in zip(chart.lower, chart.upper)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)
