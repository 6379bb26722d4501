"""
Pydantic models for solver configuration and run metadata.
"""
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator


class ScheduleConfig(BaseModel):
    """Common time-window settings for every solver."""

    t_end: float = Field(..., gt=0.0, description="Final time of the run")
    snapshot_times: List[float] = Field(
        default_factory=list,
        description="Times at which snapshots are stored; 0 and t_end are always included",
    )
    speed_range: Optional[Tuple[float, float]] = Field(
        None,
        description="State interval the wave-speed bound covers; shared by paired runs",
    )
    speed_margin: float = Field(
        1.0,
        ge=0.0,
        description="Relative widening of the data range for non-compatible fluxes",
    )

    @field_validator("snapshot_times")
    @classmethod
    def validate_snapshot_times(cls, v):
        """Snapshot times must be finite and nonnegative."""
        for t in v:
            if not t >= 0.0:
                raise ValueError(f"Snapshot times must be nonnegative, got {t}")
        return v

    @field_validator("speed_range")
    @classmethod
    def validate_speed_range(cls, v):
        if v is not None and not v[0] <= v[1]:
            raise ValueError(f"speed_range must be ordered, got {v}")
        return v

    @model_validator(mode="after")
    def check_times_inside_window(self):
        """No snapshot after t_end."""
        late = [t for t in self.snapshot_times if t > self.t_end * (1.0 + 1e-12)]
        if late:
            raise ValueError(f"Snapshot times {late} exceed t_end={self.t_end}")
        return self

    def schedule(self) -> List[float]:
        """Sorted unique snapshot times including 0 and t_end."""
        times = sorted(set([0.0, float(self.t_end)] + [min(float(t), self.t_end) for t in self.snapshot_times]))
        return times


class FVConfig(ScheduleConfig):
    """Finite-volume run settings."""

    numerical_flux: Literal["rusanov", "engquist_osher"] = Field(
        "rusanov",
        description="Monotone two-point flux used at every face",
    )
    cfl: float = Field(0.45, gt=0.0, lt=1.0, description="Courant number")


class ViscousConfig(ScheduleConfig):
    """Vanishing-diffusion run settings."""

    epsilon: float = Field(..., gt=0.0, description="Diffusion coefficient")
    cfl: float = Field(0.4, gt=0.0, le=0.9, description="Courant number")
    dt_max: float = Field(1e-2, gt=0.0, description="Time step cap")
    form: Literal["conservative", "advective"] = Field(
        "conservative",
        description="Divergence form (any flux) or nonconservative parabolic form (compatible fluxes)",
    )
    mollify: bool = Field(False, description="Gaussian-smooth the initial data before the run")
    mollify_width: float = Field(2.0, gt=0.0, description="Mollifier width in cells")


class RunMetadata(BaseModel):
    """Everything needed to interpret a stored trajectory."""

    scheme: Literal["fv", "viscous", "lorentzian"]
    numerical_flux: Optional[str] = None
    form: Optional[str] = None
    epsilon: float = 0.0
    cfl: float
    dt: float
    steps: int
    flux_name: str
    compatible: bool
    speed_range: Tuple[float, float]
    lipschitz_speed: float = Field(
        ...,
        description="Largest face wave speed per unit area used by the scheme",
    )
    chart: str
    resolution: List[int]
    monotone: bool = True
    upwind_faces: int = Field(0, description="Faces where Rusanov viscosity replaced the physical diffusion")

    def matches(self, other: "RunMetadata") -> bool:
        """Same scheme, flux and step sequence."""
        return (
            self.scheme == other.scheme
            and self.numerical_flux == other.numerical_flux
            and self.form == other.form
            and self.epsilon == other.epsilon
            and self.flux_name == other.flux_name
            and self.dt == other.dt
            and self.chart == other.chart
            and list(self.resolution) == list(other.resolution)
        )
