"""
Characteristics oracle for d_t u + (1/k) d_x(k f(u)) = 0 on the unit circle.

Along a characteristic the weighted flux k(X) f(v) keeps its initial value
c = k(y) f(u0(y)), and X' = f'(f^{-1}(c / k(X))), where f^{-1} is the inverse of
f on the monotone branch (left or right of its minimizer) picked at the foot point.
Before characteristics cross, these curves give the exact solution.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from errors import CharacteristicBranchError, ShockCrossingError
from fluxes.families import ProfileLike, as_polynomial, make_weighted_flux_1d
from fluxes.inverse import branch_inverse
from geometry.charts import FourierProfile
from geometry.mesh import build_mesh, lp_norm
from solvers.finite_volume import solve_fv
from solvers.models import FVConfig
from solvers.trajectory import SolutionTrajectory

logger = logging.getLogger(__name__)

ODE_STEP = 1e-3
CROSSING_STEP = 1e-2
CROSSING_SAMPLES = 512
CROSSING_T_MAX = 10.0
SOLVE_SAMPLES = 4096
REFINE_ITERATIONS = 6
BRANCH_TOLERANCE = 1e-12

InitialFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class WeightedProblem:
    """A positive periodic weight k, a convex flux f and initial data u0 on [0, 1)."""

    k: FourierProfile
    f: Polynomial
    u0: InitialFunction
    name: str = "weighted"

    def __post_init__(self):
        object.__setattr__(self, "f", as_polynomial(self.f))
        if not self.k.minimum() > 0.0:
            raise ValueError(f"Weight k must be positive, min k = {self.k.minimum():.6g}")
        second = self.f.deriv(2) if self.f.degree() >= 2 else Polynomial([0.0])
        samples = self.u0(np.linspace(0.0, 1.0, 257))
        lo, hi = float(np.min(samples)), float(np.max(samples))
        span = np.linspace(lo - 1.0, hi + 1.0, 257)
        if np.any(second(span) < -1e-12):
            raise ValueError("Flux must be convex on the data range")
        if self.minimizer is None:
            raise ValueError("Flux needs a minimizer (strictly convex profile)")

    @property
    def minimizer(self) -> Optional[float]:
        roots = self.f.deriv().roots()
        real = [float(r.real) for r in np.atleast_1d(roots) if abs(r.imag) < 1e-12]
        return real[0] if len(real) == 1 else None

    @property
    def f_min(self) -> float:
        return float(self.f(self.minimizer))

    def conserved(self, y) -> np.ndarray:
        """c(y) = k(y) f(u0(y))."""
        y = np.asarray(y, dtype=float)
        return self.k(y) * self.f(self.u0(y))

    def branch(self, y) -> np.ndarray:
        """+1 right of the minimizer of f (ties go right), -1 left."""
        return np.where(self.u0(np.asarray(y, dtype=float)) >= self.minimizer, 1.0, -1.0)

    def invert(self, targets: np.ndarray, branch: np.ndarray, feet: np.ndarray, time: float) -> np.ndarray:
        """f^{-1} on the given branches; raises when a target falls below min f."""
        targets = np.asarray(targets, dtype=float)
        low = targets < self.f_min - BRANCH_TOLERANCE * max(1.0, abs(self.f_min))
        if np.any(low):
            first = int(np.argmax(low))
            raise CharacteristicBranchError(float(np.asarray(feet)[first]), time)
        return branch_inverse(self.f, np.maximum(targets, self.f_min), self.minimizer, branch)


@dataclass(frozen=True)
class Characteristic:
    """One traced curve with its conserved value and states."""

    y: float
    c: float
    branch: int
    times: np.ndarray = field(repr=False)
    path: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)

    def drift(self, problem: WeightedProblem) -> float:
        """max_s |k(X(s)) f(v(s)) - c|."""
        return float(np.max(np.abs(problem.k(self.path) * problem.f(self.states) - self.c)))


def _velocity(problem: WeightedProblem, x, c, branch, feet, time) -> np.ndarray:
    v = problem.invert(c / problem.k(x), branch, feet, time)
    return problem.f.deriv()(v)


def _rk4_step(problem: WeightedProblem, x, c, branch, feet, time: float, h: float) -> np.ndarray:
    k1 = _velocity(problem, x, c, branch, feet, time)
    k2 = _velocity(problem, x + 0.5 * h * k1, c, branch, feet, time + 0.5 * h)
    k3 = _velocity(problem, x + 0.5 * h * k2, c, branch, feet, time + 0.5 * h)
    k4 = _velocity(problem, x + h * k3, c, branch, feet, time + h)
    return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _steps(t_end: float, ds: float) -> Tuple[int, float]:
    n = max(1, int(np.ceil(t_end / ds - 1e-9)))
    return n, t_end / n


def trace_feet(problem: WeightedProblem, feet, t_end: float, ds: float = ODE_STEP) -> np.ndarray:
    """Positions X(t_end; y) for many foot points at once."""
    feet = np.asarray(feet, dtype=float)
    if t_end <= 0.0:
        return feet.copy()
    c = problem.conserved(feet)
    branch = problem.branch(feet)
    x = feet.copy()
    n, h = _steps(t_end, ds)
    for i in range(n):
        x = _rk4_step(problem, x, c, branch, feet, i * h, h)
    return x


def trace_characteristic(
    problem: WeightedProblem,
    y: float,
    t_end: float,
    branch: Optional[int] = None,
    ds: float = ODE_STEP,
) -> Characteristic:
    """
    Integrate one characteristic from foot point y with RK4.

    Raises:
        CharacteristicBranchError: if c / k(X) drops below the minimum of f
    """
    feet = np.array([float(y)])
    c = problem.conserved(feet)
    side = np.array([float(branch)]) if branch is not None else problem.branch(feet)
    n, h = _steps(t_end, ds) if t_end > 0.0 else (0, 0.0)
    path = np.empty(n + 1)
    path[0] = feet[0]
    x = feet.copy()
    for i in range(n):
        x = _rk4_step(problem, x, c, side, feet, i * h, h)
        path[i + 1] = x[0]
    times = np.arange(n + 1) * h
    states = problem.invert(c[0] / problem.k(path), np.full(n + 1, side[0]), np.full(n + 1, feet[0]), t_end)
    return Characteristic(y=float(y), c=float(c[0]), branch=int(side[0]), times=times, path=path, states=states)


def crossing_time(
    problem: WeightedProblem,
    samples: int = CROSSING_SAMPLES,
    t_max: float = CROSSING_T_MAX,
    ds: float = CROSSING_STEP,
    bisections: int = 40,
) -> float:
    """
    First time at which neighbouring characteristics meet, or +inf before t_max.

    Foot points are marched together; once a gap closes, the crossing is located
    by bisecting the step length from the last ordered state.
    """
    feet = (np.arange(samples) + 0.5) / samples
    c = problem.conserved(feet)
    branch = problem.branch(feet)

    def closed(x) -> bool:
        gaps = np.diff(np.append(x, x[0] + 1.0))
        return bool(np.min(gaps) <= 0.0)

    x = feet.copy()
    t = 0.0
    while t < t_max:
        h = min(ds, t_max - t)
        nxt = _rk4_step(problem, x, c, branch, feet, t, h)
        if closed(nxt):
            lo, hi = 0.0, h
            for _ in range(bisections):
                mid = 0.5 * (lo + hi)
                if closed(_rk4_step(problem, x, c, branch, feet, t, mid)):
                    hi = mid
                else:
                    lo = mid
            return t + hi
        x, t = nxt, t + h
    return float("inf")


def _positions(problem: WeightedProblem, feet: np.ndarray, t: float, ds: float, threads: int) -> np.ndarray:
    if threads <= 1 or feet.size < 2 * threads:
        return trace_feet(problem, feet, t, ds)
    chunks = np.array_split(feet, threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return np.concatenate(list(pool.map(lambda chunk: trace_feet(problem, chunk, t, ds), chunks)))


def smooth_solve(
    problem: WeightedProblem,
    t: float,
    x_grid,
    ds: float = ODE_STEP,
    samples: int = SOLVE_SAMPLES,
    threads: int = 1,
) -> np.ndarray:
    """
    Exact pre-crossing solution at time t on x_grid.

    Raises:
        ShockCrossingError: if X(t; .) is not monotone (characteristics crossed)
    """
    x_grid = np.asarray(x_grid, dtype=float).ravel()
    if t <= 0.0:
        return problem.u0(x_grid)
    feet = (np.arange(samples) + 0.5) / samples
    positions = _positions(problem, feet, t, ds, threads)
    if np.any(np.diff(np.append(positions, positions[0] + 1.0)) <= 0.0):
        raise ShockCrossingError(t, crossing_time(problem))

    # one period on each side so every x in [0, 1) is bracketed
    ext_feet = np.concatenate([feet - 1.0, feet, feet + 1.0])
    ext_pos = np.concatenate([positions - 1.0, positions, positions + 1.0])
    target = np.mod(x_grid, 1.0)
    j = np.clip(np.searchsorted(ext_pos, target) - 1, 0, len(ext_pos) - 2)
    y_lo, y_hi = ext_feet[j], ext_feet[j + 1]
    r_lo, r_hi = ext_pos[j] - target, ext_pos[j + 1] - target

    # false position inside the bracket
    for _ in range(REFINE_ITERATIONS):
        denom = np.where(r_hi != r_lo, r_hi - r_lo, 1.0)
        y = np.where(r_hi != r_lo, y_lo - r_lo * (y_hi - y_lo) / denom, 0.5 * (y_lo + y_hi))
        r = _positions(problem, np.mod(y, 1.0), t, ds, threads) + np.floor(y) - target
        left = r < 0.0
        y_lo, r_lo = np.where(left, y, y_lo), np.where(left, r, r_lo)
        y_hi, r_hi = np.where(left, y_hi, y), np.where(left, r_hi, r)
    denom = np.where(r_hi != r_lo, r_hi - r_lo, 1.0)
    y = np.where(r_hi != r_lo, y_lo - r_lo * (y_hi - y_lo) / denom, 0.5 * (y_lo + y_hi))
    foot = np.mod(y, 1.0)
    return problem.invert(problem.conserved(foot) / problem.k(target), problem.branch(foot), foot, t)


def compare_with_fv(problem: WeightedProblem, trajectory: SolutionTrajectory, threads: int = 1) -> np.ndarray:
    """Rows (x, u_exact, u_fv, |diff|) at the final snapshot."""
    x = trajectory.mesh.centers[:, 0]
    exact = smooth_solve(problem, trajectory.t_end, x, threads=threads)
    numeric = trajectory.final
    return np.column_stack([x, exact, numeric, np.abs(exact - numeric)])


def oracle_convergence(
    problem: WeightedProblem,
    resolutions: Sequence[int],
    t: float,
    numerical_flux: str = "rusanov",
    cfl: float = 0.45,
    threads: int = 1,
) -> List[Dict[str, float]]:
    """
    FV error against the oracle on a sequence of meshes, with observed orders.

    The L1 norm uses dV = k dx.
    """
    flux = make_weighted_flux_1d(problem.k, problem.f.coef, name=f"{problem.name}_flux")
    rows: List[Dict[str, float]] = []
    for n in resolutions:
        mesh = build_mesh(flux.chart, n)
        u0 = problem.u0(mesh.centers[:, 0])
        traj = solve_fv(mesh, flux, u0, FVConfig(t_end=t, numerical_flux=numerical_flux, cfl=cfl))
        exact = smooth_solve(problem, t, mesh.centers[:, 0], threads=threads)
        error = lp_norm(traj.final - exact, 1, mesh)
        row = {"resolution": float(n), "dx": mesh.h, "error": error, "order": float("nan")}
        if rows and rows[-1]["error"] > 0.0 and error > 0.0:
            row["order"] = float(np.log(rows[-1]["error"] / error) / np.log(rows[-1]["dx"] / mesh.h))
        logger.info(f"Oracle N={n}: L1 error {error:.4e}, order {row['order']:.3f}")
        rows.append(row)
    return rows


def standard_weights() -> List[FourierProfile]:
    """The three weight profiles used by the oracle checks."""
    return [
        FourierProfile(mean=2.0, sin=(1.0,)),
        FourierProfile(mean=1.0, sin=()),
        FourierProfile(mean=1.5, cos=(0.5,), sin=(0.0, 0.25)),
    ]


def make_problem(k: FourierProfile, f: ProfileLike, u0: InitialFunction, name: str = "weighted") -> WeightedProblem:
    return WeightedProblem(k=k, f=as_polynomial(f), u0=u0, name=name)
