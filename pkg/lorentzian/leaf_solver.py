"""
Leaf-to-leaf solver for div(f(u)) = 0 on a foliated 1+1 spacetime with leaf diffusion.

conservative variant:
    d_t(A p0(u)) + d_x(B p1(u)) = eps d_x(a d_x u),
    A = sqrt|g| c0, B = sqrt|g| c1, a = sqrt|g| g^{11}_leaf,
    updated in the density w = A p0(u) with a Rusanov flux, u recovered by bisection.
local variant (compatible fluxes):
    d_u f^0 d_t u + d_u f^1 d_x u = eps g^{11}_leaf (d_xx u - Gamma d_x u),
    divided through by d_u f^0 and upwinded.
"""
import logging
from dataclasses import dataclass
from typing import Literal, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from pydantic import Field

from errors import CFLViolationError, HyperbolicityLossError
from fluxes.entropy import EntropyPair, entropy_flux
from fluxes.inverse import monotone_inverse
from geometry.mesh import ManifoldMesh, build_mesh
from lorentzian.spacetime import FoliatedSpacetime, TimelikeFlux, check_timelike
from solvers.bumps import SpaceTimeBump, default_basket
from solvers.models import RunMetadata, ScheduleConfig
from solvers.stepping import default_speed_range, march
from solvers.trajectory import SolutionTrajectory, ensure_comparable
from solvers.weak_forms import WEAK_FORM_CONSTANT, trapezoid_weights
from stability.models import PropertyReport

logger = logging.getLogger(__name__)

SAFETY_FACTOR = 1.1
CONTRACTION_TOLERANCE = 1e-8
STRICT_OFFSET = 1e-12


class LeafConfig(ScheduleConfig):
    """Settings for a leaf-to-leaf run."""

    epsilon: float = Field(1e-3, ge=0.0, description="Leaf diffusion coefficient")
    cfl: float = Field(0.4, gt=0.0, le=0.9, description="Courant number")
    dt_max: float = Field(1e-2, gt=0.0, description="Time step cap")
    variant: Literal["conservative", "local"] = Field(
        "conservative",
        description="Conservative density update or the local nonconservative form",
    )
    inflow_state: Optional[float] = Field(
        None,
        description="State prescribed at the lower end of a bounded leaf (free inflow when unset)",
    )


def _extremes(poly: Polynomial, lo: float, hi: float) -> Tuple[float, float]:
    """(min, max) of a polynomial over [lo, hi]."""
    candidates = [lo, hi]
    if poly.degree() >= 1 and np.any(poly.coef):
        for root in np.atleast_1d(poly.deriv().roots()):
            if abs(root.imag) < 1e-12 and lo <= root.real <= hi:
                candidates.append(float(root.real))
    values = poly(np.array(candidates))
    return float(values.min()), float(values.max())


@dataclass(frozen=True, eq=False)
class LeafDiscretization:
    """Cell and face coefficients of one leaf mesh for one flux."""

    spacetime: FoliatedSpacetime
    flux: TimelikeFlux
    mesh: ManifoldMesh
    x: np.ndarray
    dx: float
    density_weight: np.ndarray
    face_x: np.ndarray
    face_density_weight: np.ndarray
    face_transport: np.ndarray
    face_diffusion: np.ndarray
    wave_speed: np.ndarray
    speed_range: Tuple[float, float]
    compatible: bool

    @classmethod
    def build(cls, spacetime: FoliatedSpacetime, flux: TimelikeFlux, resolution: int,
              speed_range: Tuple[float, float]) -> "LeafDiscretization":
        mesh = build_mesh(spacetime.leaf_chart(), resolution)
        x = mesh.centers[:, 0]
        dx = float(mesh.spacing[0])
        if spacetime.periodic:
            face_x = x + 0.5 * dx
        else:
            face_x = spacetime.lower + dx * np.arange(resolution + 1)

        def weights(points):
            c0, c1 = flux._weights(points)
            root = spacetime.sqrt_abs_det(0.0, points)
            return root * c0, root * c1, root / spacetime.leaf_metric(points)

        density, _, _ = weights(x)
        face_density, face_transport, face_diffusion = weights(face_x)
        lo, hi = speed_range
        dp0_min, _ = _extremes(flux.time_profile.deriv(), lo, hi)
        dp1_lo, dp1_hi = _extremes(flux.space_profile.deriv(), lo, hi)
        hyperbolic = min(float(density.min()), float(face_density.min())) * dp0_min
        if not hyperbolic > 0.0:
            raise HyperbolicityLossError(
                f"d_u f^0 is not positive over the state range [{lo:.6g}, {hi:.6g}]"
            )
        wave_speed = SAFETY_FACTOR * np.abs(face_transport) * max(abs(dp1_lo), abs(dp1_hi)) / (face_density * dp0_min)
        return cls(
            spacetime=spacetime, flux=flux, mesh=mesh, x=x, dx=dx, density_weight=density, face_x=face_x,
            face_density_weight=face_density, face_transport=face_transport, face_diffusion=face_diffusion,
            wave_speed=wave_speed, speed_range=(float(lo), float(hi)), compatible=flux.is_compatible(spacetime),
        )

    @property
    def lipschitz_speed(self) -> float:
        return float(self.wave_speed.max()) if self.wave_speed.size else 0.0

    def stable_dt(self, epsilon: float, cfl: float, dt_max: float) -> float:
        limits = [dt_max]
        if self.lipschitz_speed > 0.0:
            limits.append(cfl * self.dx / self.lipschitz_speed)
        if epsilon > 0.0:
            lo, hi = self.speed_range
            dp0_min, _ = _extremes(self.flux.time_profile.deriv(), lo, hi)
            stiffness = float(self.face_diffusion.max()) / (float(self.density_weight.min()) * dp0_min)
            limits.append(cfl * self.dx ** 2 / (2.0 * epsilon * stiffness))
        return min(limits)

    def _face_states(self, u: np.ndarray, inflow: Optional[float]) -> Tuple[np.ndarray, np.ndarray]:
        if self.spacetime.periodic:
            return u, np.roll(u, -1)
        left_ghost = u[0] if inflow is None else inflow
        extended = np.concatenate([[left_ghost], u, [u[-1]]])
        return extended[:-1], extended[1:]

    def _difference(self, face_values: np.ndarray) -> np.ndarray:
        """q_{i+1/2} - q_{i-1/2} per cell."""
        if self.spacetime.periodic:
            return face_values - np.roll(face_values, 1)
        return face_values[1:] - face_values[:-1]

    def conservative_update(self, u: np.ndarray, dt: float, epsilon: float, inflow: Optional[float]) -> np.ndarray:
        p0, p1 = self.flux.time_profile, self.flux.space_profile
        u_left, u_right = self._face_states(u, inflow)
        numerical = 0.5 * self.face_transport * (p1(u_left) + p1(u_right)) - 0.5 * self.wave_speed * (
            self.face_density_weight * (p0(u_right) - p0(u_left))
        )
        if epsilon > 0.0:
            numerical = numerical - epsilon * self.face_diffusion * (u_right - u_left) / self.dx
        w = self.density_weight * p0(u) - dt / self.dx * self._difference(numerical)
        return monotone_inverse(p0, w / self.density_weight, u - 1.0, u + 1.0)

    def local_update(self, u: np.ndarray, dt: float, epsilon: float, inflow: Optional[float]) -> np.ndarray:
        c0, c1 = self.flux._weights(self.x)
        time_slope = self.flux.time_profile.deriv()(u) * c0
        if np.any(time_slope <= 0.0):
            first = int(np.argmin(time_slope))
            raise HyperbolicityLossError("d_u f^0 <= 0", (float(self.x[first]),))
        u_left, u_right = self._face_states(u, inflow)
        jumps = u_right - u_left
        if self.spacetime.periodic:
            back, forward = np.roll(jumps, 1), jumps
        else:
            back, forward = jumps[:-1], jumps[1:]
        speed = self.flux.space_profile.deriv()(u) * c1
        transport = np.where(speed > 0.0, speed * back, speed * forward) / self.dx
        rate = -transport
        if epsilon > 0.0:
            g11 = self.spacetime.leaf_metric(self.x)
            h = 1e-5 * (self.spacetime.upper - self.spacetime.lower)
            dg = (self.spacetime.leaf_metric(self.x + h) - self.spacetime.leaf_metric(self.x - h)) / (2.0 * h)
            gamma = 0.5 * dg / g11
            second = (forward - back) / self.dx ** 2
            first_derivative = 0.5 * (forward + back) / self.dx
            rate = rate + epsilon / g11 * (second - gamma * first_derivative)
        return u + dt * rate / time_slope

    def check_range(self, u: np.ndarray, step: Optional[int] = None) -> None:
        lo, hi = self.speed_range
        slack = 1e-12 * max(1.0, abs(lo), abs(hi))
        if u.min() < lo - slack or u.max() > hi + slack:
            raise CFLViolationError(
                f"leaf state [{u.min():.6g}, {u.max():.6g}] left the range [{lo:.6g}, {hi:.6g}]", step=step
            )


def lorentzian_step(
    discretization: LeafDiscretization,
    u: np.ndarray,
    dt: float,
    epsilon: float,
    variant: str = "conservative",
    inflow: Optional[float] = None,
) -> np.ndarray:
    """
    Advance one leaf by dt.

    Raises:
        CFLViolationError: if dt exceeds the stable step
        HyperbolicityLossError: if d_u f^0 <= 0 is met
    """
    limit = discretization.stable_dt(epsilon, 1.0, np.inf)
    if dt > limit * (1.0 + 1e-12):
        raise CFLViolationError(f"dt={dt:.6g} exceeds the leaf limit {limit:.6g}")
    u = np.asarray(u, dtype=float)
    if variant == "local":
        return discretization.local_update(u, dt, epsilon, inflow)
    return discretization.conservative_update(u, dt, epsilon, inflow)


def solve_leaves(
    spacetime: FoliatedSpacetime,
    flux: TimelikeFlux,
    u0: np.ndarray,
    config: LeafConfig,
) -> SolutionTrajectory:
    """March the leaves H_t from t = 0 to config.t_end."""
    values = np.array(u0, dtype=float)
    resolution = values.shape[0]
    data = values if config.inflow_state is None else np.append(values, config.inflow_state)
    compatible = flux.is_compatible(spacetime)
    speed_range = config.speed_range or default_speed_range(data, compatible, config.speed_margin)
    disc = LeafDiscretization.build(spacetime, flux, resolution, speed_range)
    if config.variant == "local" and not disc.compatible:
        raise ValueError(f"The local variant needs a compatible time-like flux; '{flux.name}' is not")
    dt = disc.stable_dt(config.epsilon, config.cfl, config.dt_max)
    logger.info(
        f"Leaf run: {flux.name} on {spacetime.name} N={resolution}, variant={config.variant}, "
        f"eps={config.epsilon:.3g}, dt={dt:.4g}"
    )

    def advance(u, h, step):
        new = lorentzian_step(disc, u, h, config.epsilon, config.variant, config.inflow_state)
        disc.check_range(new, step=step + 1)
        return new

    times, snapshots, steps = march(values, config.schedule(), dt, advance)
    metadata = RunMetadata(
        scheme="lorentzian", form=config.variant, epsilon=config.epsilon, cfl=config.cfl, dt=dt, steps=steps,
        flux_name=flux.name, compatible=disc.compatible, speed_range=speed_range,
        lipschitz_speed=disc.lipschitz_speed, chart=disc.mesh.chart.name, resolution=[resolution],
    )
    return SolutionTrajectory(mesh=disc.mesh, times=np.array(times), snapshots=tuple(snapshots), metadata=metadata)


def normal_flux_distance(spacetime: FoliatedSpacetime, flux: TimelikeFlux, mesh: ManifoldMesh,
                         u: np.ndarray, v: np.ndarray) -> float:
    """int over the leaf of |f^t(u) - f^t(v)| dV = sum sqrt|g| |f^0(u) - f^0(v)| dx."""
    x = mesh.centers[:, 0]
    root = spacetime.sqrt_abs_det(0.0, x)
    difference = flux.evaluate(x, u)[:, 0] - flux.evaluate(x, v)[:, 0]
    return float(np.sum(root * np.abs(difference)) * mesh.spacing[0])


def foliation_contraction_check(
    a: SolutionTrajectory,
    b: SolutionTrajectory,
    spacetime: FoliatedSpacetime,
    flux: TimelikeFlux,
) -> PropertyReport:
    """The normal-flux distance between two runs is nonincreasing from leaf to leaf."""
    ensure_comparable(a, b)
    distances = np.array([
        normal_flux_distance(spacetime, flux, a.mesh, u, v) for u, v in zip(a.snapshots, b.snapshots)
    ])
    scale = max(float(distances[0]), 1e-300)
    worst, where = 0.0, None
    for n in range(1, len(distances)):
        margin = (distances[n - 1] - distances[n]) / scale
        if margin < worst:
            worst, where = margin, f"t={a.times[n - 1]:.6g} -> {a.times[n]:.6g}"
    return PropertyReport.judged("foliation_contraction", worst, CONTRACTION_TOLERANCE, where,
                                 distances=distances.tolist())


def timelike_report(flux: TimelikeFlux, spacetime: FoliatedSpacetime, u_range: Tuple[float, float],
                    samples: int = 65) -> PropertyReport:
    """g(d_u f, d_u f) < 0 and d_u f^0 > 0 on a grid of leaf points and states."""
    x = np.linspace(spacetime.lower, spacetime.upper, samples, endpoint=not spacetime.periodic)
    result = check_timelike(flux, spacetime, x, np.linspace(u_range[0], u_range[1], samples))
    # both inequalities are strict
    margin = min(-result["margin"], result["time_derivative_min"]) - STRICT_OFFSET
    return PropertyReport.judged("timelike", margin, 0.0, None, norm_max=result["margin"],
                                 time_derivative_min=result["time_derivative_min"])


def leaf_entropy_residual(
    trajectory: SolutionTrajectory,
    spacetime: FoliatedSpacetime,
    flux: TimelikeFlux,
    pair: EntropyPair,
    theta: SpaceTimeBump,
) -> float:
    """
    Weak form of d_t(sqrt|g| F^0(u)) + d_x(sqrt|g| F^1(u)) <= eps d_x(a d_x U(u))
    on a closed leaf; nonnegative for entropy solutions up to discretization error.
    """
    if not spacetime.periodic:
        raise ValueError("Leaf entropy residuals need closed (periodic) leaves")
    if not flux.is_compatible(spacetime):
        raise ValueError(f"Leaf entropy residuals need a compatible flux; '{flux.name}' is not")
    mesh = trajectory.mesh
    chart = mesh.chart
    x = mesh.centers[:, 0]
    dx = float(mesh.spacing[0])
    root = spacetime.sqrt_abs_det(0.0, x)
    time_family, space_family = flux.as_families(chart)
    b = theta.space_factor(chart, mesh.centers)
    db = theta.space_partials(chart, mesh.centers)[:, 0]
    epsilon = trajectory.epsilon
    if epsilon > 0.0:
        h = 1e-5 * (spacetime.upper - spacetime.lower)

        def weighted_slope(points):
            diffusion = spacetime.sqrt_abs_det(0.0, points) / spacetime.leaf_metric(points)
            return diffusion * theta.space_partials(chart, points.reshape(-1, 1))[:, 0]

        curvature = (weighted_slope(x + h) - weighted_slope(x - h)) / (2.0 * h)
    else:
        curvature = np.zeros_like(x)
    a = theta.time_factor(trajectory.times)
    da = theta.time_derivative(trajectory.times)
    weights = trapezoid_weights(trajectory.times)

    def density(u):
        return root * entropy_flux(time_family, pair, mesh.centers, u)[:, 0]

    total = float(np.sum(density(trajectory.initial) * b) * a[0] * dx)
    for n, u in enumerate(trajectory.snapshots):
        if weights[n] == 0.0:
            continue
        transport = root * entropy_flux(space_family, pair, mesh.centers, u)[:, 0]
        integrand = density(u) * b * da[n] + a[n] * transport * db
        if epsilon > 0.0:
            integrand = integrand + epsilon * a[n] * pair.entropy(u) * curvature
        total += weights[n] * float(np.sum(integrand) * dx)
    return total


def leaf_entropy_report(
    trajectory: SolutionTrajectory,
    spacetime: FoliatedSpacetime,
    flux: TimelikeFlux,
    pairs: Sequence[EntropyPair],
    constant: float = WEAK_FORM_CONSTANT,
) -> PropertyReport:
    """Leaf entropy weak form over a pair list and the default test-function basket."""
    name = "leaf_entropy"
    if not spacetime.periodic or not flux.is_compatible(spacetime):
        return PropertyReport.not_applicable(name, "needs closed leaves and a compatible flux")
    mesh = trajectory.mesh
    worst, where = np.inf, None
    for pair in pairs:
        size = max(1.0, float(np.max(np.abs(pair.entropy(trajectory.initial)))))
        for i, theta in enumerate(default_basket(mesh.chart, trajectory.t_end)):
            scale = float(np.sum(theta.space_factor(mesh.chart, mesh.centers)) * mesh.spacing[0]) * size
            value = leaf_entropy_residual(trajectory, spacetime, flux, pair, theta) / scale
            if value < worst:
                worst, where = value, f"{pair.name}, theta[{i}]"
    tolerance = constant * (mesh.h + trajectory.snapshot_spacing)
    return PropertyReport.judged(name, worst, tolerance, where, negative_part=max(0.0, -worst))
