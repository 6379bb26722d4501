"""
Discrete weak forms of the entropy inequalities.

Integrals are midpoint sums in space (cell volumes) and trapezoid sums in time
over the stored snapshots. For a trajectory u with entropy pair (U, F) and a
test function theta >= 0 the value

    int U(u0) theta(0) dV
    + int int [U(u) d_t theta + g(F(u), grad theta) + (div F)(u) theta + eps U(u) Lap theta] dV dt

is nonnegative for entropy solutions, up to discretization error. The (div F)(u)
term is only present for non-compatible fluxes; the eps term only for viscous runs.
"""
import logging
from typing import Optional

import numpy as np

from fluxes.entropy import EntropyPair, general_entropy_residual_terms
from geometry.operators import divergence
from solvers.bumps import SpaceTimeBump
from solvers.trajectory import SolutionTrajectory, ensure_comparable

logger = logging.getLogger(__name__)

# C in the -C (dx + dt) bound of every weak entropy check
WEAK_FORM_CONSTANT = 4.0


def trapezoid_weights(times: np.ndarray) -> np.ndarray:
    """Weights w_n with sum_n w_n g(t_n) ~ integral of g over [t_0, t_N]."""
    times = np.asarray(times, dtype=float)
    weights = np.zeros(times.shape)
    if len(times) > 1:
        gaps = np.diff(times)
        weights[:-1] += 0.5 * gaps
        weights[1:] += 0.5 * gaps
    return weights


def _space_terms(trajectory: SolutionTrajectory, theta: SpaceTimeBump):
    mesh = trajectory.mesh
    chart = mesh.chart
    centers = mesh.centers
    b = theta.space_factor(chart, centers)
    db = theta.space_partials(chart, centers)
    if trajectory.epsilon > 0.0:
        def grad(pts):
            return np.einsum("nij,nj->ni", chart.inverse_metric(pts), theta.space_partials(chart, pts))

        lap_b = divergence(chart, grad, centers)
    else:
        lap_b = np.zeros(mesh.n_cells)
    return b, db, lap_b


def weak_entropy_residual(
    trajectory: SolutionTrajectory,
    pair: EntropyPair,
    theta: SpaceTimeBump,
    include_source: Optional[bool] = None,
) -> float:
    """
    Weak-form entropy value of one trajectory (nonnegative for entropy solutions).

    Args:
        trajectory: Solver output carrying its flux
        pair: Convex entropy pair
        theta: Nonnegative test function
        include_source: Force the (div F)(u) theta term on or off; by default it is
            included exactly when the flux is not geometry-compatible
    """
    flux = trajectory.flux
    if flux is None:
        raise ValueError("Trajectory carries no flux; rebuild it from its scenario first")
    mesh = trajectory.mesh
    vol = mesh.volumes
    if include_source is None:
        include_source = not flux.compatible
    b, db, lap_b = _space_terms(trajectory, theta)
    a = theta.time_factor(trajectory.times)
    da = theta.time_derivative(trajectory.times)
    weights = trapezoid_weights(trajectory.times)
    epsilon = trajectory.epsilon

    total = float(np.dot(vol, pair.entropy(trajectory.initial) * b) * a[0])
    for n, u in enumerate(trajectory.snapshots):
        if weights[n] == 0.0 or (a[n] == 0.0 and da[n] == 0.0):
            continue
        U = pair.entropy(u)
        if include_source:
            F, div_F = general_entropy_residual_terms(flux, pair, mesh.centers, u)
        else:
            F, div_F = pair.flux(flux, mesh.centers, u), None
        integrand = U * b * da[n] + a[n] * np.einsum("nj,nj->n", F, db)
        if div_F is not None:
            integrand = integrand + a[n] * div_F * b
        if epsilon > 0.0:
            integrand = integrand + epsilon * a[n] * U * lap_b
        total += weights[n] * float(np.dot(vol, integrand))
    return total


def kruzkov_pair_residual(a_traj: SolutionTrajectory, b_traj: SolutionTrajectory, theta: SpaceTimeBump) -> float:
    """
    Weak form of the two-solution Kruzkov inequality

        d_t |u - v| + div(sgn(u - v)(f(u) - f(v))) <= eps Lap |u - v|

    for two runs of the same scheme and flux. No source term appears, for any flux.
    """
    ensure_comparable(a_traj, b_traj)
    flux = a_traj.flux
    if flux is None:
        raise ValueError("Trajectory carries no flux; rebuild it from its scenario first")
    mesh = a_traj.mesh
    vol = mesh.volumes
    b, db, lap_b = _space_terms(a_traj, theta)
    a = theta.time_factor(a_traj.times)
    da = theta.time_derivative(a_traj.times)
    weights = trapezoid_weights(a_traj.times)
    epsilon = a_traj.epsilon

    total = float(np.dot(vol, np.abs(a_traj.initial - b_traj.initial) * b) * a[0])
    for n, (u, v) in enumerate(zip(a_traj.snapshots, b_traj.snapshots)):
        if weights[n] == 0.0:
            continue
        gap = np.abs(u - v)
        F = np.sign(u - v)[:, None] * (flux.evaluate(mesh.centers, u) - flux.evaluate(mesh.centers, v))
        integrand = gap * b * da[n] + a[n] * np.einsum("nj,nj->n", F, db)
        if epsilon > 0.0:
            integrand = integrand + epsilon * a[n] * gap * lap_b
        total += weights[n] * float(np.dot(vol, integrand))
    return total


def weak_form_scale(trajectory: SolutionTrajectory, theta: SpaceTimeBump, entropy_size: float) -> float:
    """int theta(0) dV * max(1, entropy_size)."""
    mesh = trajectory.mesh
    mass = float(np.dot(mesh.volumes, theta.space_factor(mesh.chart, mesh.centers))) * float(theta.time_factor(0.0))
    return mass * max(1.0, float(entropy_size))


def weak_form_tolerance(
    trajectory: SolutionTrajectory,
    theta: SpaceTimeBump,
    entropy_size: float,
    constant: float = WEAK_FORM_CONSTANT,
) -> float:
    """C (dx + dt) times the test-function scale."""
    return constant * (trajectory.mesh.h + trajectory.snapshot_spacing) * weak_form_scale(
        trajectory, theta, entropy_size
    )
