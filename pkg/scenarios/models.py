"""
Pydantic models for scenario files.

One model per [section]; unknown keys are rejected so typos surface as errors
instead of silently falling back to defaults.
"""
import difflib
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from fluxes.catalog import FLUX_FAMILIES
from geometry.charts import CHART_NAMES
from lorentzian.spacetime import SPACETIME_FLUXES, SPACETIMES
from stability.checks import CHECK_NAMES

MIN_RESOLUTION = 16

RIEMANNIAN_EXTRAS = ("entropy_dichotomy", "vanishing_diffusion")
ORACLE_PROPERTIES = ("oracle_order", "characteristic_drift")
LORENTZIAN_PROPERTIES = ("foliation_contraction", "timelike", "leaf_entropy", "horizon_exponent")
PROPERTY_NAMES = tuple(CHECK_NAMES) + RIEMANNIAN_EXTRAS + ORACLE_PROPERTIES + LORENTZIAN_PROPERTIES

PROFILES = ("constant", "sine", "pulse", "riemann")
DISCONTINUOUS_PROFILES = ("riemann",)


def suggest(name: str, choices: Sequence[str]) -> str:
    """' (did you mean 'x'?)' for the closest valid name, or ''."""
    close = difflib.get_close_matches(name, list(choices), n=1, cutoff=0.5)
    return f" (did you mean '{close[0]}'?)" if close else ""


def resolve_name(name: str, choices: Sequence[str], kind: str) -> str:
    if name not in choices:
        raise ValueError(f"unknown {kind} '{name}'{suggest(name, choices)}")
    return name


def as_list(value: Any) -> Any:
    """Scalars become one-element lists; an empty string is the empty list."""
    if value is None or isinstance(value, (list, tuple)):
        return value
    if isinstance(value, str) and not value.strip():
        return []
    return [value]


class Section(BaseModel):
    """Base for every scenario section."""

    model_config = ConfigDict(extra="forbid")


class ScenarioHeader(Section):
    name: str = Field(..., description="Scenario name, used for the default output directory")
    description: str = Field("", description="Free text")
    seed: int = Field(0, ge=0, description="Seed for randomized perturbations of the initial data")

    @field_validator("description", mode="before")
    @classmethod
    def join_description(cls, v):
        """Commas inside the description come back from the parser as a list."""
        if isinstance(v, (list, tuple)):
            return ", ".join(str(item) for item in v)
        return v


class ManifoldSpec(Section):
    """Riemannian chart and its structured mesh."""

    chart: str = Field(..., description="Built-in chart name")
    resolution: List[int] = Field(..., description="Cells per axis (one value is used for every axis)")
    amplitude: Optional[float] = Field(None, description="Wavy torus conformal amplitude")
    latitude: Optional[float] = Field(None, description="Sphere band half-width in latitude")
    k_mean: Optional[float] = Field(None, description="Mean of the weighted-circle coefficient k")
    k_cos: Optional[List[float]] = Field(None, description="Cosine coefficients of k")
    k_sin: Optional[List[float]] = Field(None, description="Sine coefficients of k")

    @field_validator("resolution", "k_cos", "k_sin", mode="before")
    @classmethod
    def wrap_scalars(cls, v):
        return as_list(v)

    @field_validator("chart")
    @classmethod
    def validate_chart(cls, v):
        return resolve_name(v, CHART_NAMES, "chart")

    @field_validator("resolution")
    @classmethod
    def validate_resolution(cls, v):
        if not v:
            raise ValueError("resolution needs at least one value")
        small = [n for n in v if n < MIN_RESOLUTION]
        if small:
            raise ValueError(f"resolution must be at least {MIN_RESOLUTION} per axis, got {v}")
        return v

    def chart_parameters(self) -> Dict[str, object]:
        params = self.model_dump(exclude={"chart", "resolution"}, exclude_none=True)
        return params


class SpacetimeSpec(Section):
    """Foliated 1+1 spacetime and its leaf mesh."""

    name: str = Field(..., description="Built-in spacetime name")
    resolution: int = Field(..., ge=MIN_RESOLUTION, description="Cells per leaf")
    length: Optional[float] = Field(None, gt=0.0, description="Leaf length (Minkowski)")
    mass: Optional[float] = Field(None, ge=0.0, description="Black hole mass (Schwarzschild)")
    r_min: Optional[float] = Field(None, description="Inner radius of the radial section")
    r_max: Optional[float] = Field(None, description="Outer radius of the radial section")

    @field_validator("name")
    @classmethod
    def validate_name(cls, v):
        return resolve_name(v, SPACETIMES, "spacetime")

    def spacetime_parameters(self) -> Dict[str, object]:
        return self.model_dump(exclude={"name", "resolution"}, exclude_none=True)


class FluxSpec(Section):
    family: str = Field(..., description="Flux family (Riemannian) or time-like flux (Lorentzian)")
    coefficients: Optional[List[float]] = Field(None, description="Polynomial h(u) coefficients, lowest first")
    velocity: Optional[List[float]] = Field(None, description="Constant field components")
    speed: Optional[float] = Field(None, description="Linear Minkowski transport speed")
    time_cubic: Optional[float] = Field(None, description="Cubic coefficient of f^0")
    space_quadratic: Optional[float] = Field(None, description="Quadratic coefficient of f^1")
    beta: Optional[float] = Field(None, description="Radial transport speed factor")

    @field_validator("coefficients", "velocity", mode="before")
    @classmethod
    def wrap_scalars(cls, v):
        return as_list(v)

    @field_validator("family")
    @classmethod
    def validate_family(cls, v):
        return resolve_name(v, tuple(FLUX_FAMILIES) + SPACETIME_FLUXES, "flux family")

    @property
    def lorentzian(self) -> bool:
        return self.family in SPACETIME_FLUXES

    def flux_parameters(self) -> Dict[str, object]:
        return self.model_dump(exclude={"family"}, exclude_none=True)


class InitialSpec(Section):
    """Named initial profile."""

    profile: Literal["constant", "sine", "pulse", "riemann"] = Field(..., description="Profile shape")
    offset: float = Field(0.0, description="Constant background value")
    amplitude: float = Field(1.0, description="Sine or pulse amplitude")
    wavenumber: List[int] = Field(default_factory=lambda: [1], description="Sine wavenumbers per axis")
    center: Optional[List[float]] = Field(None, description="Pulse center (defaults to the box center)")
    width: float = Field(0.1, gt=0.0, description="Pulse width relative to the box extent")
    left: float = Field(1.0, description="Riemann state below the jump")
    right: float = Field(0.0, description="Riemann state above the jump")
    position: float = Field(0.5, description="Riemann jump position relative to the axis extent")
    axis: int = Field(0, ge=0, description="Axis along which the Riemann jump is placed")
    noise: float = Field(0.0, ge=0.0, description="Amplitude of seeded uniform noise added to the profile")

    @field_validator("wavenumber", "center", mode="before")
    @classmethod
    def wrap_scalars(cls, v):
        return as_list(v)

    @property
    def discontinuous(self) -> bool:
        return self.profile in DISCONTINUOUS_PROFILES or self.noise > 0.0


class SolverSpec(Section):
    scheme: Literal["fv", "viscous", "lorentzian", "oracle"] = Field(..., description="Solver to run")
    t_end: float = Field(..., gt=0.0, description="Final time")
    snapshots: List[float] = Field(default_factory=list, description="Extra snapshot times")
    numerical_flux: Literal["rusanov", "engquist_osher"] = Field("rusanov", description="FV two-point flux")
    cfl: float = Field(0.4, gt=0.0, lt=1.0, description="Courant number")
    epsilon: Optional[float] = Field(None, ge=0.0, description="Diffusion coefficient")
    form: Literal["conservative", "advective"] = Field("conservative", description="Viscous discretization")
    variant: Literal["conservative", "local"] = Field("conservative", description="Leaf update variant")
    mollify: Optional[bool] = Field(None, description="Smooth the initial data (default: only if discontinuous)")
    dt_max: float = Field(1e-2, gt=0.0, description="Time step cap for diffusive schemes")
    inflow_state: Optional[float] = Field(None, description="Inflow state on bounded leaves")
    speed_margin: float = Field(1.0, ge=0.0, description="State-range widening for general fluxes")
    oracle_resolutions: List[int] = Field(
        default_factory=lambda: [64, 128, 256],
        description="Mesh sequence of the oracle convergence study",
    )

    @field_validator("snapshots", "oracle_resolutions", mode="before")
    @classmethod
    def wrap_scalars(cls, v):
        return as_list(v)


class PropertiesSpec(Section):
    checks: List[str] = Field(default_factory=list, description="Properties to verify after the run")

    @field_validator("checks", mode="before")
    @classmethod
    def wrap_scalars(cls, v):
        return as_list(v)

    @field_validator("checks")
    @classmethod
    def validate_checks(cls, v):
        for name in v:
            resolve_name(name, PROPERTY_NAMES, "property")
        return v


class OutputSpec(Section):
    directory: Optional[str] = Field(None, description="Run directory below the output root")


class Scenario(BaseModel):
    """A complete, validated scenario."""

    model_config = ConfigDict(extra="forbid")

    scenario: ScenarioHeader
    manifold: Optional[ManifoldSpec] = None
    spacetime: Optional[SpacetimeSpec] = None
    flux: FluxSpec
    initial: InitialSpec
    companion: Optional[InitialSpec] = None
    solver: SolverSpec
    properties: PropertiesSpec = Field(default_factory=PropertiesSpec)
    output: OutputSpec = Field(default_factory=OutputSpec)

    @property
    def name(self) -> str:
        return self.scenario.name

    @property
    def output_directory(self) -> str:
        return self.output.directory or self.scenario.name

    @property
    def lorentzian(self) -> bool:
        return self.solver.scheme == "lorentzian"


SECTION_MODELS: Dict[str, type] = {
    "scenario": ScenarioHeader,
    "manifold": ManifoldSpec,
    "spacetime": SpacetimeSpec,
    "flux": FluxSpec,
    "initial": InitialSpec,
    "companion": InitialSpec,
    "solver": SolverSpec,
    "properties": PropertiesSpec,
    "output": OutputSpec,
}


def cross_section_issues(scenario: Scenario) -> List[Tuple[str, Optional[str], str]]:
    """
    Consistency problems between sections, as (section, key, message).

    Field-level problems are caught by the section models; these need two sections at once.
    """
    issues: List[Tuple[str, Optional[str], str]] = []
    solver = scenario.solver
    flux = scenario.flux
    if scenario.lorentzian:
        if scenario.spacetime is None:
            issues.append(("solver", "scheme", "scheme 'lorentzian' needs a [spacetime] section"))
        if not flux.lorentzian:
            issues.append(("flux", "family",
                           f"'{flux.family}' is not a time-like flux; expected one of {', '.join(SPACETIME_FLUXES)}"))
        if scenario.manifold is not None:
            issues.append(("manifold", None, "scheme 'lorentzian' takes a [spacetime] section, not [manifold]"))
    else:
        if scenario.manifold is None:
            issues.append(("solver", "scheme", f"scheme '{solver.scheme}' needs a [manifold] section"))
        if flux.lorentzian:
            issues.append(("flux", "family", f"'{flux.family}' is a time-like flux; use scheme = lorentzian"))
        elif scenario.manifold is not None:
            charts, _ = FLUX_FAMILIES[flux.family]
            if charts is not None and scenario.manifold.chart not in charts:
                issues.append(("flux", "family",
                               f"flux family '{flux.family}' lives on {', '.join(charts)}, "
                               f"not on '{scenario.manifold.chart}'"))
        if scenario.spacetime is not None:
            issues.append(("spacetime", None, f"scheme '{solver.scheme}' does not use a [spacetime] section"))

    if solver.scheme == "viscous" and not (solver.epsilon or 0.0) > 0.0:
        issues.append(("solver", "epsilon", "scheme 'viscous' needs epsilon > 0"))
    if solver.scheme in ("viscous", "lorentzian") and solver.cfl > 0.9:
        issues.append(("solver", "cfl", f"cfl must be at most 0.9 for scheme '{solver.scheme}', got {solver.cfl}"))
    if solver.scheme == "viscous" and solver.form == "advective" and flux.family == "weighted_burgers_1d":
        issues.append(("solver", "form", "the advective form needs a compatible flux"))
    if solver.scheme == "oracle":
        if flux.family != "weighted_burgers_1d":
            issues.append(("flux", "family", "scheme 'oracle' solves the weighted_burgers_1d problem"))
        small = [n for n in solver.oracle_resolutions if n < MIN_RESOLUTION]
        if small:
            issues.append(("solver", "oracle_resolutions", f"resolutions below {MIN_RESOLUTION}: {small}"))
    late = [t for t in solver.snapshots if t > solver.t_end or t < 0.0]
    if late:
        issues.append(("solver", "snapshots", f"snapshot times {late} lie outside [0, {solver.t_end}]"))

    allowed = _allowed_properties(solver.scheme)
    for name in scenario.properties.checks:
        if name not in allowed:
            issues.append(("properties", "checks", f"property '{name}' does not apply to scheme '{solver.scheme}'"))
    pair_checks = {"contraction", "kruzkov", "foliation_contraction"}
    needs_pair = sorted(pair_checks.intersection(scenario.properties.checks))
    if needs_pair and scenario.companion is None:
        issues.append(("properties", "checks", f"{', '.join(needs_pair)} need a [companion] section"))
    if scenario.manifold is not None:
        dim = 2 if scenario.manifold.chart in ("flat_torus", "wavy_torus", "sphere_band") else 1
        for section, spec in (("initial", scenario.initial), ("companion", scenario.companion)):
            if spec is not None and spec.profile == "riemann" and spec.axis >= dim:
                issues.append((section, "axis", f"axis {spec.axis} does not exist on a {dim}D chart"))
    return issues


def _allowed_properties(scheme: str) -> Tuple[str, ...]:
    if scheme == "lorentzian":
        return LORENTZIAN_PROPERTIES
    if scheme == "oracle":
        return ORACLE_PROPERTIES + tuple(CHECK_NAMES)
    return tuple(CHECK_NAMES) + RIEMANNIAN_EXTRAS
