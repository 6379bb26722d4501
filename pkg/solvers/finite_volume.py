"""
Monotone finite-volume scheme on a ManifoldMesh.

Each face carries the transfer coefficient a_f = area * V_nu, so that the
physical normal flux through the face is a_f * h(u). Two-point fluxes are
evaluated with a wave-speed bound fixed for the whole run.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np

from errors import CFLViolationError
from fluxes.families import FluxFamily
from geometry.mesh import ManifoldMesh, ScalarField
from solvers.models import FVConfig, RunMetadata
from solvers.stepping import default_speed_range, march
from solvers.trajectory import SolutionTrajectory

logger = logging.getLogger(__name__)

SAFETY_FACTOR = 1.1
RANGE_SLACK = 1e-12

InitialData = Union[ScalarField, np.ndarray]


def normal_flux(flux: FluxFamily, mesh: ManifoldMesh, u, faces: Optional[np.ndarray] = None) -> np.ndarray:
    """
    f_nu(u) = g(f_x(u), nu) at face centers.

    With nu^i = g^{ia} / sqrt(g^{aa}) the pairing reduces to f^a / sqrt(g^{aa}).
    """
    faces = np.arange(len(mesh.faces)) if faces is None else np.asarray(faces)
    centers = mesh.faces.center[faces]
    values = flux.evaluate(centers, np.broadcast_to(np.asarray(u, dtype=float), (len(faces),)))
    return np.einsum("nj,nj->n", values, mesh.faces.normal_covector[faces])


def interface_flux_rusanov(f_nu: Callable[[np.ndarray], np.ndarray], u_left, u_right, wave_speed) -> np.ndarray:
    """
    Local Lax-Friedrichs flux 1/2 (f(uL) + f(uR)) - 1/2 lambda (uR - uL).

    wave_speed must bound |d_u f_nu| between the two states.
    """
    u_left = np.asarray(u_left, dtype=float)
    u_right = np.asarray(u_right, dtype=float)
    return 0.5 * (f_nu(u_left) + f_nu(u_right)) - 0.5 * np.asarray(wave_speed) * (u_right - u_left)


def interface_flux_engquist_osher(
    f_nu: Callable[[np.ndarray], np.ndarray],
    u_left,
    u_right,
    variation: Callable[[np.ndarray, np.ndarray], np.ndarray],
) -> np.ndarray:
    """
    Engquist-Osher flux 1/2 (f(uL) + f(uR)) - 1/2 sgn(uR - uL) TV(f_nu; [min, max]).

    variation(lo, hi) returns the total variation of f_nu over [lo, hi].
    """
    u_left = np.asarray(u_left, dtype=float)
    u_right = np.asarray(u_right, dtype=float)
    lo, hi = np.minimum(u_left, u_right), np.maximum(u_left, u_right)
    return 0.5 * (f_nu(u_left) + f_nu(u_right)) - 0.5 * np.sign(u_right - u_left) * variation(lo, hi)


@dataclass(frozen=True, eq=False)
class FaceTransport:
    """Per-face transfer coefficients and wave speeds of one flux over a fixed state range."""

    mesh: ManifoldMesh
    flux: FluxFamily
    coefficient: np.ndarray
    wave_speed: np.ndarray
    speed_range: Tuple[float, float]

    @classmethod
    def build(cls, mesh: ManifoldMesh, flux: FluxFamily, speed_range: Tuple[float, float],
              safety: float = SAFETY_FACTOR) -> "FaceTransport":
        faces = mesh.faces
        v_nu = np.einsum("nj,nj->n", flux.field_at(faces.center), faces.normal_covector)
        coefficient = faces.area * v_nu
        bound = float(flux.speed_bound(speed_range[0], speed_range[1]))
        wave_speed = safety * np.abs(coefficient) * bound
        return cls(mesh=mesh, flux=flux, coefficient=coefficient, wave_speed=wave_speed,
                   speed_range=(float(speed_range[0]), float(speed_range[1])))

    def cell_rate(self) -> np.ndarray:
        """Sum of face wave speeds per cell divided by the cell volume."""
        faces = self.mesh.faces
        total = np.bincount(faces.left, weights=self.wave_speed, minlength=self.mesh.n_cells)
        total += np.bincount(faces.right, weights=self.wave_speed, minlength=self.mesh.n_cells)
        return total / self.mesh.volumes

    def stable_dt(self, cfl: float) -> float:
        """cfl / max_i (sum_faces lambda_f / vol_i); +inf when nothing moves."""
        rate = float(self.cell_rate().max()) if len(self.mesh.faces) else 0.0
        return cfl / rate if rate > 0.0 else np.inf

    @property
    def lipschitz_speed(self) -> float:
        """Largest wave speed per unit face area."""
        if len(self.mesh.faces) == 0:
            return 0.0
        return float(np.max(self.wave_speed / self.mesh.faces.area))

    def face_flux(self, u: np.ndarray, numerical_flux: str = "rusanov") -> np.ndarray:
        """Total transfer through each face from its left to its right cell."""
        faces = self.mesh.faces
        u_left, u_right = u[faces.left], u[faces.right]
        a = self.coefficient
        h = self.flux.profile

        def transfer(states):
            return a * h(states)

        if numerical_flux == "rusanov":
            return interface_flux_rusanov(transfer, u_left, u_right, self.wave_speed)
        if numerical_flux == "engquist_osher":
            def variation(lo, hi):
                return np.abs(a) * self.flux.profile_variation(lo, hi)

            return interface_flux_engquist_osher(transfer, u_left, u_right, variation)
        raise ValueError(f"Unknown numerical flux '{numerical_flux}'")

    def update(self, u: np.ndarray, dt: float, numerical_flux: str = "rusanov") -> np.ndarray:
        return u - dt / self.mesh.volumes * self.mesh.face_sum(self.face_flux(u, numerical_flux))

    def check_range(self, u: np.ndarray, step: Optional[int] = None) -> None:
        lo, hi = self.speed_range
        slack = RANGE_SLACK * max(1.0, abs(lo), abs(hi))
        if u.min() < lo - slack or u.max() > hi + slack:
            raise CFLViolationError(
                f"state [{u.min():.6g}, {u.max():.6g}] left the wave-speed range [{lo:.6g}, {hi:.6g}]",
                step=step,
            )


def _values(u: InitialData) -> np.ndarray:
    return np.array(u.values if isinstance(u, ScalarField) else u, dtype=float)


def fv_step(
    mesh: ManifoldMesh,
    flux: FluxFamily,
    u: InitialData,
    dt: float,
    numerical_flux: str = "rusanov",
    transport: Optional[FaceTransport] = None,
) -> ScalarField:
    """
    One forward-Euler finite-volume step.

    Raises:
        CFLViolationError: if dt exceeds the monotonicity bound of the face wave speeds
    """
    values = _values(u)
    if transport is None:
        transport = FaceTransport.build(mesh, flux, (float(values.min()), float(values.max())))
    transport.check_range(values)
    limit = transport.stable_dt(1.0)
    if dt > limit * (1.0 + 1e-12):
        raise CFLViolationError(f"dt={dt:.6g} exceeds the monotone limit {limit:.6g}")
    return ScalarField(mesh, transport.update(values, dt, numerical_flux))


def solve_fv(mesh: ManifoldMesh, flux: FluxFamily, u0: InitialData, config: FVConfig) -> SolutionTrajectory:
    """
    Run the monotone scheme to config.t_end, storing the configured snapshots.

    The wave-speed range comes from config.speed_range when given (paired runs
    share it); otherwise from the data range, widened for non-compatible fluxes.
    """
    values = _values(u0)
    if values.shape != (mesh.n_cells,) or not np.all(np.isfinite(values)):
        raise ValueError("Initial data must hold one finite value per cell")
    speed_range = config.speed_range or default_speed_range(values, flux.compatible, config.speed_margin)
    transport = FaceTransport.build(mesh, flux, speed_range)
    transport.check_range(values, step=0)
    dt = transport.stable_dt(config.cfl)
    if not np.isfinite(dt):
        dt = config.t_end
    logger.info(
        f"FV run: {flux.name} on {mesh.chart.name} {mesh.shape}, {config.numerical_flux}, "
        f"dt={dt:.4g}, t_end={config.t_end}"
    )

    def advance(u, h, step):
        new = transport.update(u, h, config.numerical_flux)
        transport.check_range(new, step=step + 1)
        return new

    times, snapshots, steps = march(values, config.schedule(), dt, advance)
    metadata = RunMetadata(
        scheme="fv", numerical_flux=config.numerical_flux, cfl=config.cfl, dt=dt, steps=steps,
        flux_name=flux.name, compatible=flux.compatible, speed_range=speed_range,
        lipschitz_speed=transport.lipschitz_speed, chart=mesh.chart.name, resolution=list(mesh.shape),
    )
    return SolutionTrajectory(mesh=mesh, times=np.array(times), snapshots=tuple(snapshots),
                              metadata=metadata, flux=flux)
