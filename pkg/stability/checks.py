"""
Stability statements turned into quantified checks over trajectories.

Every check is a pure function of immutable trajectories and returns a
PropertyReport; margins are signed and the report passes when
margin >= -tolerance.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from fluxes.entropy import EntropyPair, kruzkov_pair, quadratic_pair
from fluxes.families import FluxFamily
from geometry.mesh import ManifoldMesh, build_mesh, integrate, lp_norm, total_variation
from geometry.operators import divergence, partial_derivatives
from solvers.bumps import SpaceTimeBump, default_basket
from solvers.finite_volume import solve_fv
from solvers.models import FVConfig
from solvers.trajectory import SolutionTrajectory, ensure_comparable
from solvers.viscous import discrete_laplacian
from solvers.weak_forms import (
    WEAK_FORM_CONSTANT,
    kruzkov_pair_residual,
    weak_entropy_residual,
    weak_form_scale,
)
from stability.models import PropertyReport, ScenarioVerdict

logger = logging.getLogger(__name__)

LP_TOLERANCE = {"fv": 1e-10, "viscous": 1e-8}
CONTRACTION_TOLERANCE = {"fv": 1e-12, "viscous": 1e-8}
MAX_PRINCIPLE_SLACK = 1e-12
MASS_SLACK = 1e-11
TV_FLAT_LIMIT = 0.01
LIPSCHITZ_SLACK = 0.1
KRUZKOV_BASKET_SIZE = 7
DICHOTOMY_BOUND = 1e-4
DICHOTOMY_SEPARATION = 100.0
DRIFT_WINDOW_CAP = 0.05
DRIFT_WINDOW_FRACTION = 0.25
DRIFT_REFINEMENT_RATIO = 1.5
DRIFT_GENERAL_FRACTION = 0.5
TINY = 1e-300


def _tolerance(table: Dict[str, float], trajectory: SolutionTrajectory) -> float:
    return table.get(trajectory.metadata.scheme, table["viscous"])


def _at(trajectory: SolutionTrajectory, n: int) -> str:
    return f"t={trajectory.times[n]:.6g}"


def check_lp_stability(trajectory: SolutionTrajectory, p_list: Sequence[float] = (1.0, 2.0, np.inf)) -> PropertyReport:
    """Each L^p norm is nonincreasing over all snapshot pairs t' <= t (relative margin)."""
    name = "lp_stability"
    if not trajectory.metadata.compatible:
        return PropertyReport.not_applicable(name, "no uniform L^p estimate for non-compatible fluxes")
    tolerance = _tolerance(LP_TOLERANCE, trajectory)
    worst, where = 0.0, None
    for p in p_list:
        norms = np.array([lp_norm(u, p, trajectory.mesh) for u in trajectory.snapshots])
        running = np.minimum.accumulate(norms)
        for n in range(1, len(norms)):
            margin = (running[n - 1] - norms[n]) / max(running[n - 1], TINY)
            if margin < worst:
                earlier = int(np.argmin(norms[:n]))
                worst, where = margin, f"p={p}, t'={trajectory.times[earlier]:.6g}, {_at(trajectory, n)}"
    report = PropertyReport.judged(name, worst, tolerance, where, p_list=[float(p) for p in p_list])
    logger.info(f"{name}: margin {worst:.3e} ({report.status()})")
    return report


def check_max_principle(trajectory: SolutionTrajectory) -> PropertyReport:
    """min u0 <= u <= max u0 at every snapshot."""
    name = "max_principle"
    if not trajectory.metadata.compatible:
        return PropertyReport.not_applicable(name, "maximum principle is only asserted for compatible fluxes")
    u0 = trajectory.initial
    lo, hi = float(u0.min()), float(u0.max())
    tolerance = MAX_PRINCIPLE_SLACK * max(1.0, float(np.abs(u0).max()))
    worst, where = 0.0, None
    for n, u in enumerate(trajectory.snapshots):
        margin = min(float(u.min()) - lo, hi - float(u.max()))
        if margin < worst:
            worst, where = margin, _at(trajectory, n)
    return PropertyReport.judged(name, worst, tolerance, where, data_range=[lo, hi])


def check_mass_conservation(trajectory: SolutionTrajectory) -> PropertyReport:
    """sum vol * u is constant up to round-off on closed meshes."""
    name = "mass_conservation"
    mesh = trajectory.mesh
    masses = np.array([integrate(mesh, u) for u in trajectory.snapshots])
    drift = np.abs(masses - masses[0])
    n = int(np.argmax(drift))
    scale = max(1.0, float(np.dot(mesh.volumes, np.abs(trajectory.initial))))
    tolerance = MASS_SLACK * scale * max(1, trajectory.metadata.steps)
    return PropertyReport.judged(name, -float(drift[n]), tolerance, _at(trajectory, n), mass=float(masses[0]))


def check_contraction(a: SolutionTrajectory, b: SolutionTrajectory) -> PropertyReport:
    """
    ||u - v||_1 is nonincreasing across consecutive snapshots.

    Raises:
        TrajectoryMismatchError: if the runs differ in mesh, scheme, flux or times
    """
    ensure_comparable(a, b)
    name = "contraction"
    distances = np.array([lp_norm(u - v, 1, a.mesh) for u, v in zip(a.snapshots, b.snapshots)])
    scale = max(float(distances[0]), TINY)
    worst, where = 0.0, None
    for n in range(1, len(distances)):
        margin = (distances[n - 1] - distances[n]) / scale
        if margin < worst:
            worst, where = margin, f"t={a.times[n - 1]:.6g} -> {a.times[n]:.6g}"
    tolerance = _tolerance(CONTRACTION_TOLERANCE, a)
    report = PropertyReport.judged(name, worst, tolerance, where, distances=distances.tolist())
    logger.info(f"{name}: margin {worst:.3e} ({report.status()})")
    return report


def _basket(trajectory: SolutionTrajectory, basket: Optional[Sequence[SpaceTimeBump]]) -> List[SpaceTimeBump]:
    return list(basket) if basket is not None else default_basket(trajectory.mesh.chart, trajectory.t_end)


def _step_size(trajectory: SolutionTrajectory) -> float:
    return trajectory.mesh.h + trajectory.snapshot_spacing


def check_kruzkov_inequality(
    a: SolutionTrajectory,
    b: SolutionTrajectory,
    basket: Optional[Sequence[SpaceTimeBump]] = None,
    constant: float = WEAK_FORM_CONSTANT,
) -> PropertyReport:
    """Two-solution Kruzkov weak form >= -C (dx + dt) against every test function."""
    ensure_comparable(a, b)
    name = "kruzkov"
    gap = float(np.max(np.abs(a.initial - b.initial)))
    worst, where, values = np.inf, None, []
    for i, theta in enumerate(_basket(a, basket)):
        value = kruzkov_pair_residual(a, b, theta) / weak_form_scale(a, theta, gap)
        values.append(value)
        if value < worst:
            worst, where = value, f"theta[{i}] (m={theta.sharpness:g})"
    tolerance = constant * _step_size(a)
    return PropertyReport.judged(name, worst, tolerance, where, negative_part=max(0.0, -worst), values=values)


def kruzkov_basket(trajectory: SolutionTrajectory, size: int = KRUZKOV_BASKET_SIZE) -> List[EntropyPair]:
    """Kruzkov pairs at `size` levels spanning the data range, plus U = u^2."""
    u0 = trajectory.initial
    levels = np.linspace(float(u0.min()), float(u0.max()), size)
    return [kruzkov_pair(k) for k in levels] + [quadratic_pair()]


def _entropy_check(
    name: str,
    trajectory: SolutionTrajectory,
    pairs: Optional[Sequence[EntropyPair]],
    basket: Optional[Sequence[SpaceTimeBump]],
    constant: float,
    include_source: Optional[bool],
) -> PropertyReport:
    pairs = list(pairs) if pairs is not None else kruzkov_basket(trajectory)
    worst, where = np.inf, None
    per_pair: Dict[str, float] = {}
    for pair in pairs:
        size = float(np.max(np.abs(pair.entropy(trajectory.initial))))
        for i, theta in enumerate(_basket(trajectory, basket)):
            value = weak_entropy_residual(trajectory, pair, theta, include_source=include_source)
            value /= weak_form_scale(trajectory, theta, size)
            per_pair[pair.name] = min(per_pair.get(pair.name, np.inf), value)
            if value < worst:
                worst, where = value, f"{pair.name}, theta[{i}] (m={theta.sharpness:g})"
    tolerance = constant * _step_size(trajectory)
    report = PropertyReport.judged(name, worst, tolerance, where, negative_part=max(0.0, -worst), per_pair=per_pair)
    logger.info(f"{name}: worst normalized value {worst:.3e} vs tolerance {tolerance:.3e} ({report.status()})")
    return report


def check_weak_entropy_solution(
    trajectory: SolutionTrajectory,
    pairs: Optional[Sequence[EntropyPair]] = None,
    basket: Optional[Sequence[SpaceTimeBump]] = None,
    constant: float = WEAK_FORM_CONSTANT,
) -> PropertyReport:
    """Full weak entropy form, initial-data term included, for every pair and test function."""
    return _entropy_check("weak_entropy", trajectory, pairs, basket, constant, None)


def check_general_entropy_inequality(
    trajectory: SolutionTrajectory,
    pairs: Optional[Sequence[EntropyPair]] = None,
    basket: Optional[Sequence[SpaceTimeBump]] = None,
    constant: float = WEAK_FORM_CONSTANT,
) -> PropertyReport:
    """The entropy form with the (div F)(u) source term, for non-compatible fluxes."""
    if trajectory.metadata.compatible:
        return PropertyReport.not_applicable("general_entropy", "flux is compatible; see weak_entropy")
    return _entropy_check("general_entropy", trajectory, pairs, basket, constant, True)


def fit_tv_constant(trajectory: SolutionTrajectory) -> float:
    """Smallest C1 >= 0 with TV(u(t)) <= exp(C1 t) (1 + TV(u0)) at every snapshot."""
    tv = np.array([total_variation(u, trajectory.mesh) for u in trajectory.snapshots])
    base = 1.0 + tv[0]
    best = 0.0
    for t, value in zip(trajectory.times[1:], tv[1:]):
        if t > 0.0 and value > base:
            best = max(best, float(np.log(value / base) / t))
    return best


def check_tv_envelope(trajectory: SolutionTrajectory, c1_limit: Optional[float] = None) -> PropertyReport:
    """
    Fit C1 of the exponential TV envelope.

    The fit is asserted against c1_limit when given, or against 0.01 on flat charts
    with translation-invariant fluxes; otherwise the constant is only reported.
    """
    name = "tv_envelope"
    c1 = fit_tv_constant(trajectory)
    flux = trajectory.flux
    if c1_limit is None and trajectory.mesh.chart.flat and flux is not None and flux.translation_invariant:
        c1_limit = TV_FLAT_LIMIT
    margin = (c1_limit - c1) if c1_limit is not None else 0.0
    logger.info(f"{name}: fitted C1 = {c1:.4g}")
    return PropertyReport.judged(name, margin, 0.0, None, c1=c1, c1_limit=c1_limit)


def check_time_lipschitz(trajectory: SolutionTrajectory) -> PropertyReport:
    """||u(t) - u(t')||_1 <= 1.1 (L TV(u0) + eps ||Lap u0||_1) |t - t'| over all snapshot pairs."""
    name = "time_lipschitz"
    if not trajectory.metadata.compatible:
        return PropertyReport.not_applicable(name, "time-Lipschitz bound is asserted for compatible fluxes")
    mesh = trajectory.mesh
    tv0 = total_variation(trajectory.initial, mesh)
    d0 = lp_norm(discrete_laplacian(mesh, trajectory.initial), 1, mesh) if trajectory.epsilon > 0.0 else 0.0
    rate = (1.0 + LIPSCHITZ_SLACK) * (trajectory.metadata.lipschitz_speed * tv0 + trajectory.epsilon * d0)
    scale = max(rate * trajectory.t_end, TINY)
    worst, where = np.inf, None
    for i in range(len(trajectory)):
        for j in range(i + 1, len(trajectory)):
            change = lp_norm(trajectory.snapshots[j] - trajectory.snapshots[i], 1, mesh)
            margin = (rate * (trajectory.times[j] - trajectory.times[i]) - change) / scale
            if margin < worst:
                worst, where = margin, f"t'={trajectory.times[i]:.6g}, t={trajectory.times[j]:.6g}"
    if not np.isfinite(worst):
        worst = 0.0
    return PropertyReport.judged(name, worst, 0.0, where, rate=rate, tv0=tv0, laplacian_norm=d0)


def entropy_rate(mesh: ManifoldMesh, flux: FluxFamily, u0: Callable[[np.ndarray], np.ndarray],
                 pair: Optional[EntropyPair] = None) -> float:
    """
    d/dt int U(u) dV at t = 0 for smooth data: -sum vol U'(u0) div(f(u0)).

    div(f(u0)) is the divergence of x -> f_x(u0(x)), taken pointwise.
    """
    pair = pair or quadratic_pair()
    centers = mesh.centers
    div = divergence(mesh.chart, lambda p: flux.evaluate(p, u0(p)), centers)
    return float(-np.dot(mesh.volumes, pair.dU(u0(centers)) * div))


def pre_shock_window(mesh: ManifoldMesh, flux: FluxFamily, u0: Callable[[np.ndarray], np.ndarray]) -> Tuple[float, float]:
    """
    Two snapshot times well before the first characteristic crossing.

    The breaking time is estimated as 1 / max(-V . grad h'(u0)) and the window is
    [t/2, t] with t = min(DRIFT_WINDOW_CAP, DRIFT_WINDOW_FRACTION * breaking time).
    """
    centers = mesh.centers
    speed = partial_derivatives(mesh.chart, lambda p: flux.profile_derivative(u0(p)), centers)
    compression = float(np.max(-np.einsum("nj,nj->n", flux.field_at(centers), speed)))
    breaking = 1.0 / compression if compression > 0.0 else np.inf
    t_hi = min(DRIFT_WINDOW_CAP, DRIFT_WINDOW_FRACTION * breaking)
    return 0.5 * t_hi, t_hi


def solver_entropy_drift(mesh: ManifoldMesh, flux: FluxFamily, u0: Callable[[np.ndarray], np.ndarray],
                         pair: Optional[EntropyPair] = None,
                         window: Optional[Tuple[float, float]] = None) -> float:
    """(int U(u(t2)) dV - int U(u(t1)) dV) / (t2 - t1) from two snapshots of a short FV run."""
    pair = pair or quadratic_pair()
    t1, t2 = window or pre_shock_window(mesh, flux, u0)
    trajectory = solve_fv(mesh, flux, u0(mesh.centers), FVConfig(t_end=t2, snapshot_times=[t1]))
    first, last = trajectory.snapshots[-2], trajectory.snapshots[-1]
    return (integrate(mesh, pair.entropy(last)) - integrate(mesh, pair.entropy(first))) / (t2 - t1)


def _refined(mesh: ManifoldMesh) -> ManifoldMesh:
    return build_mesh(mesh.chart, tuple(2 * n for n in mesh.shape))


def paired_entropy_drifts(mesh: ManifoldMesh, flux: FluxFamily, u0: Callable[[np.ndarray], np.ndarray],
                          pair: Optional[EntropyPair] = None) -> Tuple[float, float]:
    """Solver drifts on the mesh and on its refinement, over the same pre-shock window."""
    window = pre_shock_window(mesh, flux, u0)
    coarse = solver_entropy_drift(mesh, flux, u0, pair, window)
    fine = solver_entropy_drift(_refined(mesh), flux, u0, pair, window)
    return coarse, fine


def check_smooth_entropy_dichotomy(
    mesh: ManifoldMesh,
    flux_compatible: FluxFamily,
    flux_general: FluxFamily,
    u0: Callable[[np.ndarray], np.ndarray],
    pair: Optional[EntropyPair] = None,
    mesh_general: Optional[ManifoldMesh] = None,
    u0_general: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    bound: float = DICHOTOMY_BOUND,
    separation: float = DICHOTOMY_SEPARATION,
    solver_drift: bool = True,
) -> PropertyReport:
    """
    Smooth-data entropy drift: at most `bound` for the compatible flux, at least
    `separation * bound` for the general flux.

    The general flux may live on its own mesh (e.g. the weighted circle). With
    solver_drift the t = 0 rates are backed by short FV runs on each mesh and its
    refinement: the compatible drift (numerical dissipation only) must shrink by
    DRIFT_REFINEMENT_RATIO, the general drift must keep the sign of its rate and at
    least DRIFT_GENERAL_FRACTION of its size.
    """
    name = "entropy_dichotomy"
    mesh_general = mesh_general or mesh
    u0_general = u0_general or u0
    rate_c = entropy_rate(mesh, flux_compatible, u0, pair)
    rate_g = entropy_rate(mesh_general, flux_general, u0_general, pair)
    margins = [bound - abs(rate_c), abs(rate_g) - separation * bound]
    details: Dict[str, object] = {}
    if solver_drift:
        drift_c = paired_entropy_drifts(mesh, flux_compatible, u0, pair)
        drift_g = paired_entropy_drifts(mesh_general, flux_general, u0_general, pair)
        margins.append(max(abs(drift_c[0]) / DRIFT_REFINEMENT_RATIO, bound) - abs(drift_c[1]))
        margins.append(float(np.sign(rate_g)) * drift_g[1] - DRIFT_GENERAL_FRACTION * abs(rate_g))
        details = {"drift_compatible": list(drift_c), "drift_general": list(drift_g)}
        logger.info(f"{name}: solver drifts compatible {drift_c[0]:.3e} -> {drift_c[1]:.3e}, "
                    f"general {drift_g[0]:.3e} -> {drift_g[1]:.3e}")
    logger.info(f"{name}: compatible rate {rate_c:.3e}, general rate {rate_g:.3e}")
    return PropertyReport.judged(name, min(margins), 0.0, None, rate_compatible=rate_c, rate_general=rate_g,
                                 separation=abs(rate_g) / max(abs(rate_c), TINY), **details)


SINGLE_CHECKS: Dict[str, Callable[[SolutionTrajectory], PropertyReport]] = {
    "lp_stability": check_lp_stability,
    "max_principle": check_max_principle,
    "mass_conservation": check_mass_conservation,
    "tv_envelope": check_tv_envelope,
    "time_lipschitz": check_time_lipschitz,
    "weak_entropy": check_weak_entropy_solution,
    "general_entropy": check_general_entropy_inequality,
}

PAIR_CHECKS: Dict[str, Callable[[SolutionTrajectory, SolutionTrajectory], PropertyReport]] = {
    "contraction": check_contraction,
    "kruzkov": check_kruzkov_inequality,
}

CHECK_NAMES = tuple(SINGLE_CHECKS) + tuple(PAIR_CHECKS)


def run_checks(
    trajectory: SolutionTrajectory,
    names: Sequence[str],
    companion: Optional[SolutionTrajectory] = None,
    threads: int = 1,
) -> List[PropertyReport]:
    """Run the named checks concurrently; reports come back in request order."""
    unknown = [n for n in names if n not in SINGLE_CHECKS and n not in PAIR_CHECKS]
    if unknown:
        raise ValueError(f"Unknown checks: {', '.join(unknown)}")

    def run(name: str) -> PropertyReport:
        if name in PAIR_CHECKS:
            if companion is None:
                return PropertyReport.not_applicable(name, "no companion trajectory")
            return PAIR_CHECKS[name](trajectory, companion)
        return SINGLE_CHECKS[name](trajectory)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        return list(pool.map(run, names))


def scenario_verdict(scenario: str, reports: Sequence[PropertyReport]) -> ScenarioVerdict:
    """A scenario passes iff every applicable report passes."""
    return ScenarioVerdict(scenario=scenario, reports=list(reports))
