"""
Pydantic models for property-check results.
"""
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, model_validator


class PropertyReport(BaseModel):
    """Outcome of one quantified stability check."""
    name: str = Field(..., description="Property name")
    margin: float = Field(..., description="Worst-case signed margin; >= -tolerance passes")
    location: Optional[str] = Field(None, description="Snapshot pair, cell or test function of the worst case")
    tolerance: float = Field(0.0, ge=0.0, description="Tolerance the margin is judged against")
    passed: bool = Field(..., description="Whether the check passed")
    applicable: bool = Field(True, description="False when the property does not apply to this run")
    details: Dict[str, Any] = Field(default_factory=dict, description="Measured constants and extra context")

    @model_validator(mode="after")
    def check_verdict(self):
        """passed must agree with margin >= -tolerance; inapplicable checks pass."""
        if not self.applicable:
            if not self.passed:
                raise ValueError(f"Report '{self.name}' is not applicable and must pass")
            return self
        expected = self.margin >= -self.tolerance
        if self.passed != expected:
            raise ValueError(
                f"Report '{self.name}': passed={self.passed} disagrees with margin {self.margin:.3e} "
                f"and tolerance {self.tolerance:.3e}"
            )
        return self

    @classmethod
    def judged(cls, name: str, margin: float, tolerance: float, location: Optional[str] = None,
               **details) -> "PropertyReport":
        """Build a report whose pass flag follows from margin and tolerance."""
        return cls(name=name, margin=float(margin), tolerance=float(tolerance), location=location,
                   passed=bool(margin >= -tolerance), details=details)

    @classmethod
    def not_applicable(cls, name: str, reason: str) -> "PropertyReport":
        return cls(name=name, margin=0.0, passed=True, applicable=False, details={"reason": reason})

    def status(self) -> str:
        if not self.applicable:
            return "N/A"
        return "PASS" if self.passed else "FAIL"


class ScenarioVerdict(BaseModel):
    """All reports of one scenario run."""
    scenario: str = Field(..., description="Scenario name")
    reports: List[PropertyReport] = Field(default_factory=list, description="Reports in request order")

    @property
    def passed(self) -> bool:
        return all(report.passed for report in self.reports if report.applicable)

    def failures(self) -> List[PropertyReport]:
        return [r for r in self.reports if r.applicable and not r.passed]
