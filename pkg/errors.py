"""
Exception hierarchy for the manifold conservation lab.

Every error carries the structured context needed to reproduce the failure
(a coordinate, a step index, a list of scenario issues) in addition to its message.
"""
from typing import List, Optional, Sequence


class LabError(Exception):
    """Base class for all lab errors."""


class GeometryError(LabError):
    """A metric is not positive-definite (or otherwise invalid) at a point."""

    def __init__(self, message: str, location: Optional[Sequence[float]] = None):
        if location is not None:
            location = tuple(float(v) for v in location)
            message = f"{message} at x={location}"
        super().__init__(message)
        self.location = location


class CompatibilityError(LabError):
    """A vector field offered as divergence-free is not."""

    def __init__(self, message: str, worst_point: Sequence[float], residual: float):
        self.worst_point = tuple(float(v) for v in worst_point)
        self.residual = float(residual)
        super().__init__(f"{message}: |div V| = {self.residual:.3e} at x={self.worst_point}")


class SolverInstabilityError(LabError):
    """Non-finite values appeared during time stepping."""

    def __init__(self, message: str, step: int, time: float = float("nan")):
        self.step = int(step)
        self.time = float(time)
        super().__init__(f"{message} (step {self.step}, t={self.time:.6g})")


class CFLViolationError(LabError):
    """A requested step exceeds the monotonicity bound of the scheme."""

    def __init__(self, message: str, step: Optional[int] = None):
        self.step = step
        suffix = f" (step {step})" if step is not None else ""
        super().__init__(f"{message}{suffix}")


class NonMonotoneSchemeError(LabError):
    """The nonconservative viscous form cannot keep a maximum principle at this cell Peclet number."""

    def __init__(self, peclet: float, limit: float):
        self.peclet = float(peclet)
        self.limit = float(limit)
        super().__init__(
            f"cell Peclet number {self.peclet:.4g} exceeds {self.limit:.4g}; "
            f"use the conservative form or a larger epsilon"
        )


class CharacteristicBranchError(LabError):
    """The weighted flux c/k(X) left the range of the selected inverse branch."""

    def __init__(self, foot_point: float, time: float):
        self.foot_point = float(foot_point)
        self.time = float(time)
        super().__init__(
            f"characteristic exits branch: foot point y={self.foot_point:.6g} at s={self.time:.6g}"
        )


class ShockCrossingError(LabError):
    """Characteristics crossed before the requested time."""

    def __init__(self, requested_time: float, crossing_time: float):
        self.requested_time = float(requested_time)
        self.crossing_time = float(crossing_time)
        super().__init__(
            f"characteristics cross at t*~{self.crossing_time:.6g}, "
            f"before requested t={self.requested_time:.6g}"
        )


class HorizonDomainError(LabError):
    """Schwarzschild coordinates evaluated at or inside the horizon r = 2m."""

    def __init__(self, radius: float, mass: float):
        self.radius = float(radius)
        self.mass = float(mass)
        super().__init__(
            f"r={self.radius:.6g} is not outside the horizon r=2m={2.0 * self.mass:.6g}"
        )


class HyperbolicityLossError(LabError):
    """The time component of the flux derivative is not positive."""

    def __init__(self, message: str, location: Optional[Sequence[float]] = None):
        self.location = tuple(float(v) for v in location) if location is not None else None
        suffix = f" at x={self.location}" if self.location is not None else ""
        super().__init__(f"{message}{suffix}")


class ScenarioIssue:
    """One problem found in a scenario file."""

    def __init__(self, line: Optional[int], message: str):
        self.line = line
        self.message = message

    def __str__(self) -> str:
        where = f"line {self.line}" if self.line is not None else "scenario"
        return f"{where}: {self.message}"

    def __repr__(self) -> str:
        return f"ScenarioIssue(line={self.line!r}, message={self.message!r})"


class ScenarioError(LabError):
    """A scenario file failed to parse or validate; carries every issue found."""

    def __init__(self, issues: List[ScenarioIssue]):
        self.issues = list(issues)
        lines = "\n".join(f"  - {issue}" for issue in self.issues)
        super().__init__(f"{len(self.issues)} scenario issue(s):\n{lines}")


class TrajectoryMismatchError(LabError):
    """Two trajectories cannot be compared (mesh, scheme, flux or times differ)."""
