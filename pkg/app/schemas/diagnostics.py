from pydantic import BaseModel, Field
from typing import Optional


class IdentityReport(BaseModel):
    name: str
    lhs: float
    rhs: float
    rel_error: float
    tolerance: float
    passed: bool
    vacuous: bool = False
    details: dict[str, float] = Field(default_factory=dict)


class SmallEpsTrendReport(BaseModel):
    """Observational report on the ε → 0⁺ alternatives; no pass/fail"""

    eps: list[float]
    hs_half_seminorm: list[float]
    linf: list[float]
    window: int
    trivial: bool = False
    hs_growing: bool = False
    linf_decaying: bool = False
    consistent_with: list[str] = Field(default_factory=list)


class BranchDiagnostics(BaseModel):
    label: str
    k: Optional[int] = None
    points: int
    termination: str
    hard: list[IdentityReport] = Field(default_factory=list)
    soft: list[IdentityReport] = Field(default_factory=list)
    singular_indices: list[int] = Field(default_factory=list)
    trend: Optional[SmallEpsTrendReport] = None
    fitted_ddot_omega: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(report.passed for report in self.hard)


class DiagnosticReport(BaseModel):
    branches: list[BranchDiagnostics]
    passed: bool
    failures: list[str] = Field(default_factory=list)
    trace_errors: dict[str, str] = Field(default_factory=dict)
