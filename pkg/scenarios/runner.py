"""
Scenario runner: build the manifold and flux, run the solver (twice for paired
scenarios), verify the requested properties and write the run directory.

Run directory layout:
    a/, b/           trajectories (b only with a [companion] section)
    reports.csv      name,status,margin,tolerance,location
    report.txt       human-readable verdict
    oracle.csv       x,u_exact,u_fv,abs_diff (oracle scheme)
    oracle_convergence.csv
    vanishing_diffusion.csv
    diagnostic.txt   solver abort details
"""
import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from config import LabSettings
from errors import LabError
from fluxes.catalog import build_flux, weight_profile
from fluxes.families import FluxFamily
from geometry.charts import build_chart
from geometry.mesh import ManifoldMesh, build_mesh, lp_norm
from lorentzian.leaf_solver import (
    LeafConfig,
    foliation_contraction_check,
    leaf_entropy_report,
    solve_leaves,
    timelike_report,
)
from lorentzian.spacetime import (
    FoliatedSpacetime,
    TimelikeFlux,
    build_spacetime,
    build_timelike_flux,
    horizon_speed_exponent,
)
from oracle.characteristics import compare_with_fv, make_problem, oracle_convergence, trace_characteristic
from scenarios.models import InitialSpec, Scenario
from scenarios.parser import load_scenario, validate_scenario
from scenarios.profiles import cell_values, profile_function
from solvers.finite_volume import solve_fv
from solvers.models import FVConfig, ViscousConfig
from solvers.stepping import default_speed_range, union_range
from solvers.trajectory import SolutionTrajectory, distance_series, read_trajectory, write_trajectory
from solvers.viscous import solve_viscous, vanishing_diffusion_study
from stability.checks import (
    CHECK_NAMES,
    check_smooth_entropy_dichotomy,
    kruzkov_basket,
    run_checks,
    scenario_verdict,
)
from stability.models import PropertyReport, ScenarioVerdict

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_ABORT = 2

FLOAT_FORMAT = "%.17g"
DICHOTOMY_RESOLUTION = 512
VANISHING_FRACTION = 0.05
ORACLE_ORDER = 0.8
DRIFT_LIMIT = 1e-8
DRIFT_FEET = 16
HORIZON_SLOPE_TOLERANCE = 0.1


@dataclass
class RunOutcome:
    """Everything a run produced, for the CLI and for tests."""

    scenario: str
    directory: Optional[Path]
    verdict: ScenarioVerdict
    exit_code: int
    trajectories: Dict[str, SolutionTrajectory] = field(default_factory=dict)
    tables: Dict[str, np.ndarray] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class RiemannianSetup:
    mesh: ManifoldMesh
    flux: FluxFamily


@dataclass(frozen=True, eq=False)
class LorentzianSetup:
    spacetime: FoliatedSpacetime
    flux: TimelikeFlux
    mesh: ManifoldMesh


Setup = Union[RiemannianSetup, LorentzianSetup]


def build_setup(scenario: Scenario) -> Setup:
    """Chart, mesh and flux (or spacetime, leaf mesh and time-like flux) of a scenario."""
    if scenario.lorentzian:
        spec = scenario.spacetime
        spacetime = build_spacetime(spec.name, spec.spacetime_parameters())
        flux = build_timelike_flux(scenario.flux.family, spacetime, scenario.flux.flux_parameters())
        return LorentzianSetup(spacetime=spacetime, flux=flux,
                               mesh=build_mesh(spacetime.leaf_chart(), spec.resolution))
    spec = scenario.manifold
    chart = build_chart(spec.chart, spec.chart_parameters())
    mesh = build_mesh(chart, spec.resolution if len(spec.resolution) > 1 else spec.resolution[0])
    return RiemannianSetup(mesh=mesh, flux=build_flux(scenario.flux.family, chart, scenario.flux.flux_parameters()))


def initial_data(scenario: Scenario, mesh: ManifoldMesh) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Cell values of the initial datum and of the companion datum (seed + 1)."""
    seed = scenario.scenario.seed
    first = cell_values(scenario.initial, mesh, seed)
    second = cell_values(scenario.companion, mesh, seed + 1) if scenario.companion is not None else None
    return first, second


def _schedule(scenario: Scenario, speed_range: Tuple[float, float]) -> Dict[str, object]:
    solver = scenario.solver
    return dict(t_end=solver.t_end, snapshot_times=list(solver.snapshots), speed_range=speed_range,
                speed_margin=solver.speed_margin)


def _shared_range(scenario: Scenario, compatible: bool, data: Sequence[np.ndarray]) -> Tuple[float, float]:
    """One wave-speed range for every run of the scenario, so paired runs share dt."""
    margin = scenario.solver.speed_margin
    return union_range(*(default_speed_range(values, compatible, margin) for values in data))


def _solve_one(scenario: Scenario, setup: Setup, values: np.ndarray, speed_range) -> SolutionTrajectory:
    solver = scenario.solver
    schedule = _schedule(scenario, speed_range)
    if isinstance(setup, LorentzianSetup):
        config = LeafConfig(epsilon=solver.epsilon if solver.epsilon is not None else 1e-3, cfl=solver.cfl,
                            dt_max=solver.dt_max, variant=solver.variant, inflow_state=solver.inflow_state,
                            **schedule)
        return solve_leaves(setup.spacetime, setup.flux, values, config)
    if solver.scheme == "viscous":
        rough = scenario.initial.discontinuous or (scenario.companion is not None and scenario.companion.discontinuous)
        mollify = solver.mollify if solver.mollify is not None else rough
        config = ViscousConfig(epsilon=solver.epsilon, cfl=solver.cfl, dt_max=solver.dt_max, form=solver.form,
                               mollify=mollify, **schedule)
        return solve_viscous(setup.mesh, setup.flux, values, config)
    config = FVConfig(numerical_flux=solver.numerical_flux, cfl=solver.cfl, **schedule)
    return solve_fv(setup.mesh, setup.flux, values, config)


def solve_scenario(scenario: Scenario, setup: Setup, threads: int = 1) -> Dict[str, SolutionTrajectory]:
    """Run the solver on the initial datum and, concurrently, on the companion datum."""
    first, second = initial_data(scenario, setup.mesh)
    data = [first] if second is None else [first, second]
    if isinstance(setup, LorentzianSetup):
        compatible = setup.flux.is_compatible(setup.spacetime)
        if scenario.solver.inflow_state is not None:
            data = data + [np.array([scenario.solver.inflow_state])]
    else:
        compatible = setup.flux.compatible
    speed_range = _shared_range(scenario, compatible, data)
    runs = {"a": first} if second is None else {"a": first, "b": second}
    with ThreadPoolExecutor(max_workers=max(1, min(threads, len(runs)))) as pool:
        futures = {key: pool.submit(_solve_one, scenario, setup, values, speed_range) for key, values in runs.items()}
        return {key: future.result() for key, future in futures.items()}


def _dichotomy_report(scenario: Scenario, setup: RiemannianSetup) -> PropertyReport:
    """Smooth-data entropy drift of the scenario flux against the weighted Burgers flux on k = 2 + sin."""
    name = "entropy_dichotomy"
    if not setup.flux.compatible:
        return PropertyReport.not_applicable(name, "the scenario flux must be the compatible side")
    if scenario.initial.discontinuous:
        return PropertyReport.not_applicable(name, "needs smooth initial data")
    weighted_chart = build_chart("weighted_circle")
    general = build_flux("weighted_burgers_1d", weighted_chart)
    # a pulse under the trough of k; profiles that are functions of sin(2 pi x) alone have zero drift
    pulse = InitialSpec(profile="pulse", center=[0.5], width=0.1)
    return check_smooth_entropy_dichotomy(
        setup.mesh, setup.flux, general, profile_function(scenario.initial, setup.mesh.chart),
        mesh_general=build_mesh(weighted_chart, DICHOTOMY_RESOLUTION),
        u0_general=profile_function(pulse, weighted_chart),
    )


def _vanishing_report(scenario: Scenario, setup: RiemannianSetup, values: np.ndarray,
                      threads: int) -> Tuple[PropertyReport, np.ndarray]:
    """FV vs viscous L1 distance strictly decreasing along the eps schedule, final value small."""
    rows = vanishing_diffusion_study(setup.mesh, setup.flux, values, t=scenario.solver.t_end,
                                     dt_max=scenario.solver.dt_max, threads=threads)
    distances = np.array([row["distance"] for row in rows])
    scale = max(lp_norm(values, 1, setup.mesh), 1e-300)
    margins = list((distances[:-1] - distances[1:]) / scale)
    margins.append(VANISHING_FRACTION - distances[-1] / scale)
    worst = int(np.argmin(margins))
    where = f"eps={rows[worst]['epsilon']:.4g}" if worst < len(rows) - 1 else "final epsilon"
    table = np.array([[row["factor"], row["epsilon"], row["distance"]] for row in rows])
    report = PropertyReport.judged("vanishing_diffusion", margins[worst], 0.0, where,
                                   distances=distances.tolist(), relative_final=float(distances[-1] / scale))
    return report, table


def run_oracle(scenario: Scenario, setup: RiemannianSetup, trajectory: SolutionTrajectory,
               threads: int = 1) -> Tuple[np.ndarray, List[Dict[str, float]], float]:
    """
    Oracle comparison rows at t_end, the convergence study and the worst
    characteristic drift of the weighted problem.
    """
    chart = setup.mesh.chart
    smooth = profile_function(scenario.initial, chart)
    problem = make_problem(weight_profile(chart), setup.flux.profile, lambda x: smooth(np.reshape(x, (-1, 1))),
                           name=scenario.name)
    rows = compare_with_fv(problem, trajectory, threads=threads)
    study = oracle_convergence(problem, scenario.solver.oracle_resolutions, scenario.solver.t_end,
                               numerical_flux=scenario.solver.numerical_flux, cfl=scenario.solver.cfl,
                               threads=threads)
    feet = (np.arange(DRIFT_FEET) + 0.5) / DRIFT_FEET
    drift = max(trace_characteristic(problem, y, scenario.solver.t_end).drift(problem) for y in feet)
    return rows, study, drift


def _oracle_reports(names: Sequence[str], study: List[Dict[str, float]], drift: float) -> Dict[str, PropertyReport]:
    orders = [row["order"] for row in study if np.isfinite(row["order"])]
    order = min(orders) if orders else float("nan")
    reports = {}
    if "oracle_order" in names:
        if orders:
            reports["oracle_order"] = PropertyReport.judged("oracle_order", order - ORACLE_ORDER, 0.0, None,
                                                            orders=orders)
        else:
            reports["oracle_order"] = PropertyReport.not_applicable("oracle_order", "needs two or more resolutions")
    if "characteristic_drift" in names:
        reports["characteristic_drift"] = PropertyReport.judged("characteristic_drift", DRIFT_LIMIT - drift, 0.0,
                                                                None, drift=drift)
    return reports


def _lorentzian_reports(scenario: Scenario, setup: LorentzianSetup, runs: Dict[str, SolutionTrajectory],
                        names: Sequence[str]) -> Dict[str, PropertyReport]:
    a = runs["a"]
    reports: Dict[str, PropertyReport] = {}
    for name in names:
        if name == "foliation_contraction":
            reports[name] = foliation_contraction_check(a, runs["b"], setup.spacetime, setup.flux)
        elif name == "timelike":
            reports[name] = timelike_report(setup.flux, setup.spacetime, a.metadata.speed_range)
        elif name == "leaf_entropy":
            reports[name] = leaf_entropy_report(a, setup.spacetime, setup.flux, kruzkov_basket(a))
        elif name == "horizon_exponent":
            if setup.spacetime.name != "schwarzschild_radial" or setup.flux.name != "radial_transport":
                reports[name] = PropertyReport.not_applicable(name, "needs radial transport on Schwarzschild")
                continue
            slope = horizon_speed_exponent(float(setup.spacetime.parameters["mass"]), setup.flux)
            reports[name] = PropertyReport.judged(name, HORIZON_SLOPE_TOLERANCE - abs(slope - 1.0), 0.0, None,
                                                  slope=slope)
    return reports


def _write_table(path: Path, header: str, rows: np.ndarray) -> None:
    np.savetxt(path, np.atleast_2d(rows), fmt=FLOAT_FORMAT, delimiter=",", header=header, comments="")


def write_reports(directory: Path, verdict: ScenarioVerdict) -> None:
    """reports.csv and report.txt; no timestamps so reruns are byte-identical."""
    with open(directory / "reports.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["name", "status", "margin", "tolerance", "location"])
        for report in verdict.reports:
            writer.writerow([report.name, report.status(), FLOAT_FORMAT % report.margin,
                             FLOAT_FORMAT % report.tolerance, report.location or ""])
    lines = [f"scenario: {verdict.scenario}", f"verdict: {'PASS' if verdict.passed else 'FAIL'}", ""]
    for report in verdict.reports:
        line = f"{report.status():4s}  {report.name:24s} margin={report.margin:.6e} tolerance={report.tolerance:.3e}"
        if report.location:
            line += f"  at {report.location}"
        if not report.applicable:
            line += f"  ({report.details.get('reason', '')})"
        lines.append(line)
    (directory / "report.txt").write_text("\n".join(lines) + "\n")


def write_diagnostic(directory: Path, scenario: Scenario, error: Exception) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / "diagnostic.txt"
    context = {key: value for key, value in vars(error).items() if not key.startswith("_")}
    lines = [f"scenario: {scenario.name}", f"error: {type(error).__name__}", f"message: {error}"]
    lines += [f"{key}: {value}" for key, value in sorted(context.items())]
    path.write_text("\n".join(lines) + "\n")
    return path


def verify_properties(
    scenario: Scenario,
    setup: Setup,
    runs: Dict[str, SolutionTrajectory],
    names: Optional[Sequence[str]] = None,
    threads: int = 1,
    tables: Optional[Dict[str, np.ndarray]] = None,
    rerun: bool = True,
) -> ScenarioVerdict:
    """
    Reports for the requested properties, in request order.

    rerun=False skips everything that needs fresh solver runs (oracle study,
    vanishing-diffusion schedule, dichotomy rates).
    """
    names = list(names if names is not None else scenario.properties.checks)
    tables = tables if tables is not None else {}
    a, b = runs["a"], runs.get("b")
    reports: Dict[str, PropertyReport] = {}
    if isinstance(setup, LorentzianSetup):
        reports.update(_lorentzian_reports(scenario, setup, runs, names))
    else:
        standard = [n for n in names if n in CHECK_NAMES]
        for report in run_checks(a, standard, companion=b, threads=threads):
            reports[report.name] = report
        if rerun and "entropy_dichotomy" in names:
            reports["entropy_dichotomy"] = _dichotomy_report(scenario, setup)
        if rerun and "vanishing_diffusion" in names:
            reports["vanishing_diffusion"], tables["vanishing_diffusion"] = _vanishing_report(
                scenario, setup, np.asarray(a.initial), threads)
        if rerun and scenario.solver.scheme == "oracle":
            rows, study, drift = run_oracle(scenario, setup, a, threads)
            tables["oracle"] = rows
            tables["oracle_convergence"] = np.array([[r["resolution"], r["dx"], r["error"], r["order"]] for r in study])
            reports.update(_oracle_reports(names, study, drift))
    ordered = [reports[n] for n in names if n in reports]
    return scenario_verdict(scenario.name, ordered)


TABLE_HEADERS = {
    "oracle": ("oracle.csv", "x,u_exact,u_fv,abs_diff"),
    "oracle_convergence": ("oracle_convergence.csv", "resolution,dx,error,order"),
    "vanishing_diffusion": ("vanishing_diffusion.csv", "factor,epsilon,distance"),
}


def run_scenario(
    scenario: Scenario,
    settings: LabSettings,
    scenario_text: Optional[str] = None,
    write: bool = True,
) -> RunOutcome:
    """
    Run one scenario end to end.

    Exit codes: 0 when every applicable property passes, 1 when one fails,
    2 when the solver aborts (a diagnostic.txt is written).
    """
    validate_scenario(scenario)
    directory = Path(settings.output_root) / scenario.output_directory if write else None
    setup = build_setup(scenario)
    try:
        runs = solve_scenario(scenario, setup, settings.threads)
        tables: Dict[str, np.ndarray] = {}
        verdict = verify_properties(scenario, setup, runs, threads=settings.threads, tables=tables)
    except LabError as e:
        logger.error(f"Scenario '{scenario.name}' aborted: {e}")
        if directory is not None:
            write_diagnostic(directory, scenario, e)
        verdict = scenario_verdict(scenario.name, [])
        return RunOutcome(scenario=scenario.name, directory=directory, verdict=verdict, exit_code=EXIT_ABORT)

    if directory is not None:
        for key, trajectory in runs.items():
            write_trajectory(trajectory, directory / key, scenario_text)
        for key, rows in tables.items():
            filename, header = TABLE_HEADERS[key]
            _write_table(directory / filename, header, rows)
        write_reports(directory, verdict)
    for report in verdict.reports:
        logger.info(f"{scenario.name}: {report.name} {report.status()} (margin {report.margin:.3e})")
    exit_code = EXIT_PASS if verdict.passed else EXIT_FAIL
    return RunOutcome(scenario=scenario.name, directory=directory, verdict=verdict, exit_code=exit_code,
                      trajectories=runs, tables=tables)


def _trajectory_dirs(path: Path) -> Dict[str, Path]:
    if (path / "scenario.cfg").exists():
        return {"a": path}
    found = {key: path / key for key in ("a", "b") if (path / key / "scenario.cfg").exists()}
    if not found:
        raise FileNotFoundError(f"No trajectory with scenario.cfg under {path}")
    return found


def load_run(path: Union[str, Path]) -> Tuple[Scenario, Setup, Dict[str, SolutionTrajectory]]:
    """Rebuild scenario, mesh and flux from a stored run and read its trajectories."""
    dirs = _trajectory_dirs(Path(path))
    scenario, _ = load_scenario(dirs["a"] / "scenario.cfg")
    setup = build_setup(scenario)
    flux = setup.flux if isinstance(setup, RiemannianSetup) else None
    runs = {key: read_trajectory(d, setup.mesh, flux) for key, d in dirs.items()}
    return scenario, setup, runs


VERIFY_SKIPS = ("entropy_dichotomy", "vanishing_diffusion", "oracle_order", "characteristic_drift", "horizon_exponent")


def verify_directory(path: Union[str, Path], threads: int = 1) -> ScenarioVerdict:
    """
    Recheck the trajectory-based properties of a stored run.

    Properties that rerun solvers (dichotomy, vanishing diffusion, oracle) are
    reported as not applicable.
    """
    scenario, setup, runs = load_run(path)
    names = list(scenario.properties.checks)
    pair_names = {"contraction", "kruzkov", "foliation_contraction"}
    recheck = [n for n in names if n not in VERIFY_SKIPS and (n not in pair_names or "b" in runs)]
    reports = {r.name: r for r in verify_properties(scenario, setup, runs, recheck, threads, rerun=False).reports}
    ordered = []
    for name in names:
        if name in reports:
            ordered.append(reports[name])
        else:
            ordered.append(PropertyReport.not_applicable(name, "not recomputed from stored trajectories"))
    return scenario_verdict(scenario.name, ordered)


def compare_directories(path_a: Union[str, Path], path_b: Union[str, Path], p: float = 1.0) -> np.ndarray:
    """Rows (t, ||u_a(t) - u_b(t)||_p) between two stored trajectories."""
    _, _, runs_a = load_run(path_a)
    _, _, runs_b = load_run(path_b)
    return distance_series(runs_a["a"], runs_b["a"], p)


def mesh_rows(scenario: Scenario) -> List[List[float]]:
    """(cell, center coordinates..., volume) rows of the scenario mesh."""
    return build_setup(scenario).mesh.dump_rows()
