"""
Explicit vanishing-diffusion solver for d_t u + div f(u) = eps * Lap_g u.

Two discretizations are available:

* conservative: face-based central flux plus divergence-form diffusion, valid for
  every flux family and exactly mass-conservative on closed meshes;
* advective: the nonconservative parabolic form
  d_t u = -(d_u f^j)(u) d_j u + eps g^{ij}(d_i d_j u - Gamma^k_ij d_k u),
  which only describes the equation when the flux is geometry-compatible.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from errors import CFLViolationError, NonMonotoneSchemeError, SolverInstabilityError
from fluxes.entropy import EntropyPair
from fluxes.families import FluxFamily
from geometry.charts import christoffel
from geometry.mesh import ManifoldMesh, ScalarField, lp_norm
from solvers.finite_volume import FaceTransport, solve_fv
from solvers.models import FVConfig, RunMetadata, ViscousConfig
from solvers.stepping import default_speed_range, march
from solvers.trajectory import SolutionTrajectory
from solvers.weak_forms import weak_entropy_residual

logger = logging.getLogger(__name__)

PECLET_LIMIT = 2.0
VANISHING_FACTORS = (4.0, 2.0, 1.0, 0.5)

InitialData = Union[ScalarField, np.ndarray]


def _values(u: InitialData) -> np.ndarray:
    return np.array(u.values if isinstance(u, ScalarField) else u, dtype=float)


# ---------------------------------------------------------------------------
# Grid helpers
# ---------------------------------------------------------------------------

def _shift(grid: np.ndarray, axis: int, offset: int, periodic: bool) -> np.ndarray:
    """grid[i + offset] along axis; non-periodic axes repeat their edge values."""
    if periodic:
        return np.roll(grid, -offset, axis=axis)
    pad = [(0, 0)] * grid.ndim
    pad[axis] = (1, 1)
    padded = np.pad(grid, pad, mode="edge")
    index = [slice(None)] * grid.ndim
    index[axis] = slice(1 + offset, 1 + offset + grid.shape[axis])
    return padded[tuple(index)]


def _central_differences(mesh: ManifoldMesh, u: np.ndarray) -> np.ndarray:
    """d_b u at cell centers by central differences, shape (n, dim)."""
    grid = mesh.grid(u)
    out = np.empty((mesh.n_cells, mesh.dim))
    for b in range(mesh.dim):
        periodic = mesh.chart.periodic[b]
        diff = _shift(grid, b, 1, periodic) - _shift(grid, b, -1, periodic)
        out[:, b] = (diff / (2.0 * mesh.spacing[b])).ravel()
    return out


# ---------------------------------------------------------------------------
# Divergence-form diffusion
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DiffusionOperator:
    """
    Face weights of the discrete Laplace-Beltrami operator.

    The outward gradient flux through a face is area * g(grad u, nu)
    = area * nu^i d_i u; the normal-axis part uses the two-point difference,
    the tangential part (nonzero only for non-diagonal metrics) the average of
    the cell central differences.
    """

    mesh: ManifoldMesh
    coefficient: np.ndarray
    cross: np.ndarray
    has_cross: bool

    @classmethod
    def build(cls, mesh: ManifoldMesh) -> "DiffusionOperator":
        faces = mesh.faces
        rows = np.arange(len(faces))
        weighted_normal = faces.area[:, None] * faces.normal
        coefficient = weighted_normal[rows, faces.axis] / mesh.spacing[faces.axis]
        cross = weighted_normal.copy()
        cross[rows, faces.axis] = 0.0
        has_cross = bool(np.any(np.abs(cross) > 1e-14))
        return cls(mesh=mesh, coefficient=coefficient, cross=cross, has_cross=has_cross)

    def gradient_flux(self, u: np.ndarray) -> np.ndarray:
        faces = self.mesh.faces
        flux = self.coefficient * (u[faces.right] - u[faces.left])
        if self.has_cross:
            d = _central_differences(self.mesh, u)
            flux = flux + np.einsum("nb,nb->n", self.cross, 0.5 * (d[faces.left] + d[faces.right]))
        return flux

    def apply(self, u: np.ndarray) -> np.ndarray:
        return self.mesh.face_sum(self.gradient_flux(u)) / self.mesh.volumes


def discrete_laplacian(mesh: ManifoldMesh, values: InitialData) -> np.ndarray:
    """Divergence-form discrete Laplace-Beltrami operator applied to cell values."""
    return DiffusionOperator.build(mesh).apply(_values(values))


# ---------------------------------------------------------------------------
# Mollification
# ---------------------------------------------------------------------------

def _gaussian_kernel(width: float) -> np.ndarray:
    radius = max(1, int(np.ceil(3.0 * width)))
    offsets = np.arange(-radius, radius + 1)
    kernel = np.exp(-0.5 * (offsets / width) ** 2)
    return kernel / kernel.sum()


def mollify(mesh: ManifoldMesh, values: InitialData, width: float = 2.0) -> np.ndarray:
    """
    Separable discrete Gaussian smoothing with standard deviation `width` cells.

    Periodic axes wrap around; bounded axes reflect at the edges.
    """
    grid = mesh.grid(_values(values)).copy()
    kernel = _gaussian_kernel(width)
    radius = len(kernel) // 2
    for axis in range(mesh.dim):
        if radius >= grid.shape[axis]:
            raise ValueError(f"Mollifier width {width} too large for {grid.shape[axis]} cells")
        pad = [(0, 0)] * grid.ndim
        pad[axis] = (radius, radius)
        padded = np.pad(grid, pad, mode="wrap" if mesh.chart.periodic[axis] else "reflect")
        smoothed = np.zeros_like(grid)
        for j, weight in enumerate(kernel):
            index = [slice(None)] * grid.ndim
            index[axis] = slice(j, j + grid.shape[axis])
            smoothed += weight * padded[tuple(index)]
        grid = smoothed
    return grid.ravel()


# ---------------------------------------------------------------------------
# Time step
# ---------------------------------------------------------------------------

def stable_dt(
    mesh: ManifoldMesh,
    flux: FluxFamily,
    u: InitialData,
    epsilon: float,
    cfl: float = 0.4,
    dt_max: float = 1e-2,
    speed_range: Optional[Tuple[float, float]] = None,
) -> float:
    """
    cfl * min(advective limit, dx_min^2 / (2 dim eps Lambda_max)), capped by dt_max.

    The advective limit is 1 / max_i(H * sum_j |V^j| / dx_j), with H the largest
    |h'| over the state range; Lambda_max is the largest eigenvalue of g^{ij}.
    """
    values = _values(u)
    lo, hi = speed_range or (float(values.min()), float(values.max()))
    limits = [dt_max]
    bound = float(flux.speed_bound(lo, hi))
    rate = bound * float(np.max(np.sum(np.abs(flux.field_at(mesh.centers)) / mesh.spacing, axis=1)))
    if rate > 0.0:
        limits.append(cfl / rate)
    if epsilon > 0.0:
        largest = float(np.max(np.linalg.eigvalsh(mesh.inverse_metric)))
        dx_min = float(mesh.spacing.min())
        limits.append(cfl * dx_min ** 2 / (2.0 * mesh.dim * epsilon * largest))
    return min(limits)


# ---------------------------------------------------------------------------
# Steps
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ViscousOperator:
    """
    Precomputed geometry for one (mesh, flux, eps) triple.

    In the conservative form every face carries the diffusion max(eps D_f, lambda_f / 2):
    where the cell Peclet number exceeds 2 the central flux gets the missing Rusanov
    viscosity, so the update stays monotone for every eps > 0. Faces below the limit
    are untouched.
    """

    mesh: ManifoldMesh
    flux: FluxFamily
    epsilon: float
    transport: FaceTransport
    diffusion: DiffusionOperator
    upwind: np.ndarray
    form: str = "conservative"

    @classmethod
    def build(cls, mesh: ManifoldMesh, flux: FluxFamily, epsilon: float,
              speed_range: Tuple[float, float], form: str = "conservative") -> "ViscousOperator":
        """
        Raises:
            NonMonotoneSchemeError: for the advective form above the Peclet limit
        """
        if form == "advective" and not flux.compatible:
            raise ValueError(f"The advective form needs a geometry-compatible flux; '{flux.name}' is not")
        if form not in ("conservative", "advective"):
            raise ValueError(f"Unknown viscous form '{form}'")
        transport = FaceTransport.build(mesh, flux, speed_range, safety=1.0)
        diffusion = DiffusionOperator.build(mesh)
        upwind = np.maximum(0.0, 0.5 * transport.wave_speed - epsilon * np.abs(diffusion.coefficient))
        upwind = np.where(upwind > 1e-12 * transport.wave_speed, upwind, 0.0)
        operator = cls(mesh=mesh, flux=flux, epsilon=float(epsilon), transport=transport,
                       diffusion=diffusion, upwind=upwind, form=form)
        if form == "advective":
            peclet = operator.peclet()
            if peclet > PECLET_LIMIT:
                raise NonMonotoneSchemeError(peclet, PECLET_LIMIT)
        return operator

    def peclet(self) -> float:
        """Largest face Peclet number |a_f| H / (eps D_f)."""
        diffusive = self.epsilon * np.abs(self.diffusion.coefficient)
        if len(diffusive) == 0:
            return 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(diffusive > 0.0, self.transport.wave_speed / diffusive, np.inf)
        ratio = np.where(self.transport.wave_speed == 0.0, 0.0, ratio)
        return float(np.max(ratio))

    @property
    def upwind_faces(self) -> int:
        if self.form == "advective":
            return 0
        return int(np.count_nonzero(self.upwind))

    def monotone_dt(self, cfl: float) -> float:
        """cfl / max_i sum_faces max(eps D_f, lambda_f / 2) / vol_i; +inf without faces."""
        faces = self.mesh.faces
        if len(faces) == 0:
            return np.inf
        weight = self.epsilon * np.abs(self.diffusion.coefficient) + self.upwind
        total = np.bincount(faces.left, weights=weight, minlength=self.mesh.n_cells)
        total += np.bincount(faces.right, weights=weight, minlength=self.mesh.n_cells)
        rate = float(np.max(total / self.mesh.volumes))
        return cfl / rate if rate > 0.0 else np.inf

    def _conservative_rate(self, u: np.ndarray) -> np.ndarray:
        faces = self.mesh.faces
        h = self.flux.profile
        advective = 0.5 * self.transport.coefficient * (h(u[faces.left]) + h(u[faces.right]))
        total = advective - self.epsilon * self.diffusion.gradient_flux(u)
        if self.upwind_faces:
            total = total - self.upwind * (u[faces.right] - u[faces.left])
        return -self.mesh.face_sum(total) / self.mesh.volumes

    def _advective_rate(self, u: np.ndarray) -> np.ndarray:
        mesh = self.mesh
        grid = mesh.grid(u)
        d1 = _central_differences(mesh, u)
        velocity = self.flux.field_at(mesh.centers)
        rate = -self.flux.profile_derivative(u) * np.einsum("nj,nj->n", velocity, d1)
        ginv = mesh.inverse_metric
        hessian = np.zeros((mesh.n_cells, mesh.dim, mesh.dim))
        for a in range(mesh.dim):
            pa = mesh.chart.periodic[a]
            second = _shift(grid, a, 1, pa) - 2.0 * grid + _shift(grid, a, -1, pa)
            hessian[:, a, a] = (second / mesh.spacing[a] ** 2).ravel()
            for b in range(a + 1, mesh.dim):
                pb = mesh.chart.periodic[b]
                plus, minus = _shift(grid, a, 1, pa), _shift(grid, a, -1, pa)
                mixed = (_shift(plus, b, 1, pb) - _shift(plus, b, -1, pb)
                         - _shift(minus, b, 1, pb) + _shift(minus, b, -1, pb))
                value = (mixed / (4.0 * mesh.spacing[a] * mesh.spacing[b])).ravel()
                hessian[:, a, b] = value
                hessian[:, b, a] = value
        contracted = np.einsum("nij,nkij->nk", ginv, self._christoffel)
        laplacian = np.einsum("nij,nij->n", ginv, hessian) - np.einsum("nk,nk->n", contracted, d1)
        return rate + self.epsilon * laplacian

    @cached_property
    def _christoffel(self) -> np.ndarray:
        return christoffel(self.mesh.chart, self.mesh.centers)

    def rate(self, u: np.ndarray) -> np.ndarray:
        if self.form == "advective":
            return self._advective_rate(u)
        return self._conservative_rate(u)

    def update(self, u: np.ndarray, dt: float) -> np.ndarray:
        return u + dt * self.rate(u)


def viscous_step(
    mesh: ManifoldMesh,
    flux: FluxFamily,
    u: InitialData,
    dt: float,
    epsilon: float,
    form: str = "conservative",
    cfl: float = 0.9,
) -> ScalarField:
    """
    One forward-Euler step of the regularized equation.

    Raises:
        CFLViolationError: if dt exceeds stable_dt (or the monotone bound of upwinded faces)
        NonMonotoneSchemeError: for the advective form above the Peclet limit
        SolverInstabilityError: if the update produced non-finite values
    """
    values = _values(u)
    lo, hi = float(values.min()), float(values.max())
    operator = ViscousOperator.build(mesh, flux, epsilon, (lo, hi), form)
    limit = stable_dt(mesh, flux, values, epsilon, cfl=cfl, dt_max=np.inf)
    if operator.upwind_faces:
        limit = min(limit, operator.monotone_dt(cfl))
    if dt > limit * (1.0 + 1e-12):
        raise CFLViolationError(f"dt={dt:.6g} exceeds the stable step {limit:.6g}")
    new = operator.update(values, dt)
    if not np.all(np.isfinite(new)):
        raise SolverInstabilityError("non-finite values in solution", step=1, time=dt)
    return ScalarField(mesh, new)


def solve_viscous(
    mesh: ManifoldMesh,
    flux: FluxFamily,
    u0: InitialData,
    config: ViscousConfig,
) -> SolutionTrajectory:
    """
    Run the regularized problem to config.t_end with one fixed step.

    Raises:
        NonMonotoneSchemeError: for the advective form above the Peclet limit
    """
    values = _values(u0)
    if values.shape != (mesh.n_cells,) or not np.all(np.isfinite(values)):
        raise ValueError("Initial data must hold one finite value per cell")
    if config.mollify:
        values = mollify(mesh, values, config.mollify_width)
    speed_range = config.speed_range or default_speed_range(values, flux.compatible, config.speed_margin)
    operator = ViscousOperator.build(mesh, flux, config.epsilon, speed_range, config.form)
    dt = stable_dt(mesh, flux, values, config.epsilon, config.cfl, config.dt_max, speed_range)
    upwind_faces = operator.upwind_faces
    if upwind_faces:
        dt = min(dt, operator.monotone_dt(config.cfl))
        logger.warning(
            f"Cell Peclet number {operator.peclet():.3g} exceeds {PECLET_LIMIT}; "
            f"Rusanov viscosity added on {upwind_faces} of {len(mesh.faces)} faces"
        )
    logger.info(
        f"Viscous run: {flux.name} on {mesh.chart.name} {mesh.shape}, eps={config.epsilon:.4g}, "
        f"form={config.form}, dt={dt:.4g}, t_end={config.t_end}"
    )

    times, snapshots, steps = march(values, config.schedule(), dt, lambda u, h, step: operator.update(u, h))
    faces = mesh.faces
    lipschitz = float(np.max(operator.transport.wave_speed / faces.area)) if len(faces) else 0.0
    metadata = RunMetadata(
        scheme="viscous", form=config.form, epsilon=config.epsilon, cfl=config.cfl, dt=dt, steps=steps,
        flux_name=flux.name, compatible=flux.compatible, speed_range=speed_range, lipschitz_speed=lipschitz,
        chart=mesh.chart.name, resolution=list(mesh.shape), monotone=not operator.diffusion.has_cross,
        upwind_faces=upwind_faces,
    )
    return SolutionTrajectory(mesh=mesh, times=np.array(times), snapshots=tuple(snapshots),
                              metadata=metadata, flux=flux)


def entropy_inequality_residual_viscous(trajectory: SolutionTrajectory, pair: EntropyPair, theta) -> float:
    """Weak-form entropy value of a viscous trajectory, including the eps * U * Lap theta term."""
    return weak_entropy_residual(trajectory, pair, theta)


def vanishing_diffusion_study(
    mesh: ManifoldMesh,
    flux: FluxFamily,
    u0: InitialData,
    t: float = 0.3,
    factors: Sequence[float] = VANISHING_FACTORS,
    cfl: float = 0.4,
    dt_max: float = 1e-2,
    threads: int = 1,
) -> List[Dict[str, float]]:
    """
    L1 distance at time t between the FV solution and viscous solutions with eps = factor * dx.

    Returns one row per factor, in the order given.
    """
    values = _values(u0)
    speed_range = default_speed_range(values, flux.compatible, 1.0)
    reference = solve_fv(mesh, flux, values, FVConfig(t_end=t, speed_range=speed_range))
    dx = mesh.h

    def run(factor: float) -> Dict[str, float]:
        epsilon = factor * dx
        config = ViscousConfig(epsilon=epsilon, cfl=cfl, t_end=t, dt_max=dt_max, speed_range=speed_range)
        viscous = solve_viscous(mesh, flux, values, config)
        distance = lp_norm(viscous.final - reference.final, 1, mesh)
        logger.info(f"eps={epsilon:.4g}: ||u_eps - u_fv||_1 = {distance:.4e}")
        return {"factor": float(factor), "epsilon": epsilon, "distance": distance}

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        return list(pool.map(run, factors))
