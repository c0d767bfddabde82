from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from app.models.enums import CheckStatus, Component, SolveStatus, StopReason


class ConditionResult(BaseModel):
    """Outcome of one potential hypothesis over a sample set"""
    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "condition": "A1",
                "status": "FAIL",
                "worst_margin": -1.0e8,
                "violation": [8000.0, 0.0, 0.0],
                "detail": "A_inf is not finite: A is unbounded",
            }
        }
    )

    condition: str = Field(..., description="A1, A2, A3 or A4")
    status: CheckStatus
    worst_margin: float = Field(..., description="Smallest slack over all samples; negative means violated")
    violation: Optional[List[float]] = Field(None, description="First violating sample point")
    detail: str = ""


class PotentialCheckReport(BaseModel):
    potential: Dict[str, Any]
    results: List[ConditionResult]

    @computed_field
    @property
    def passed(self) -> bool:
        return all(r.status == CheckStatus.PASS for r in self.results)

    @property
    def failed_conditions(self) -> List[str]:
        return [r.condition for r in self.results if r.status == CheckStatus.FAIL]


class NodalReport(BaseModel):
    """Connected components of {f > eps} and {f < -eps}"""
    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "component": "u",
                "threshold": 1e-3,
                "positive_domains": 2,
                "negative_domains": 2,
                "total": 4,
            }
        }
    )

    component: Optional[Component] = None
    threshold: float = Field(..., gt=0)
    positive_domains: int = Field(..., ge=0)
    negative_domains: int = Field(..., ge=0)
    total: int = Field(..., ge=0)

    @model_validator(mode="after")
    def validate_total(self):
        if self.total != self.positive_domains + self.negative_domains:
            raise ValueError("total must equal positive_domains + negative_domains")
        return self


class NodalSensitivity(BaseModel):
    """Nodal totals at eps and at one decade above it"""
    eps: float
    total_at_eps: int
    total_at_decade: int


class TraceRow(BaseModel):
    iteration: int
    I: float
    G: float
    gradnorm: float
    dx: float

    def as_row(self) -> List[Any]:
        return [self.iteration, self.I, self.G, self.gradnorm, self.dx]


TRACE_HEADER = ["iter", "I", "G", "gradnorm", "dx"]


class SolveReportModel(BaseModel):
    """Serialized form of one minimization run"""
    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "status": "converged",
                "stop_reason": "tol_dx",
                "m_estimate": 12.3,
                "constraint_residual": 1e-9,
                "iterations": 240,
                "nodal_count_u": 4,
                "nodal_count_v": 4,
            }
        }
    )

    status: SolveStatus
    stop_reason: Optional[StopReason] = None
    message: Optional[str] = None
    seed_widths: List[float] = Field(..., description="[w_u, w_v] of the seed")
    m_estimate: float
    constraint_residual: float = Field(..., description="|G(final pair)|")
    constraint_scale: float = Field(..., description="Sum of absolute values of the terms of G")
    pohozaev_residual: float = Field(..., description="|P(final pair)|")
    pohozaev_relative: float = Field(..., description="|P| over the sum of absolute values of its terms")
    grad_norm: float = Field(..., description="Relative norm of the tangent-projected gradient")
    equivariance_defect: float
    coupling: float
    nodal_count_u: int
    nodal_count_v: int
    iterations: int
    fields: Dict[str, str] = Field(default_factory=dict, description="Component -> dump file name")
    trace_file: Optional[str] = None


class MEstimate(BaseModel):
    m: float
    spread: float = Field(..., description="(max - min) / min over converged runs")
    runs_converged: int
    runs_total: int


class SolveSummary(BaseModel):
    config: Dict[str, Any]
    runs: List[SolveReportModel]
    best_run: Optional[int] = None
    m: Optional[MEstimate] = None


class CheckResult(BaseModel):
    """One PASS/FAIL/WARN line of a re-verification"""
    name: str
    status: CheckStatus
    value: Optional[float] = None
    threshold: Optional[float] = None
    margin: Optional[float] = None
    detail: str = ""


class DiagnoseSummary(BaseModel):
    config: Dict[str, Any]
    report_path: str
    checks: List[CheckResult]

    @computed_field
    @property
    def passed(self) -> bool:
        return all(c.status != CheckStatus.FAIL for c in self.checks)

    @property
    def failed_checks(self) -> List[str]:
        return [c.name for c in self.checks if c.status == CheckStatus.FAIL]

    @property
    def warned_checks(self) -> List[str]:
        return [c.name for c in self.checks if c.status == CheckStatus.WARN]


class GradcheckRow(BaseModel):
    sample: int
    functional: str = Field(..., description="I or G")
    finite_difference: float
    analytic: float
    relative_error: float
    status: CheckStatus

    def as_row(self) -> List[Any]:
        return [
            self.sample,
            self.functional,
            self.finite_difference,
            self.analytic,
            self.relative_error,
            self.status.value,
        ]


GRADCHECK_HEADER = ["sample", "functional", "finite_difference", "analytic", "relative_error", "status"]


class GradcheckSummary(BaseModel):
    config: Dict[str, Any]
    samples: int
    tolerance: float
    max_relative_error: float
    failures: int

    @computed_field
    @property
    def passed(self) -> bool:
        return self.failures == 0


class FiberScanRow(BaseModel):
    t: float
    h: float
    h_prime: float
    G: float

    def as_row(self) -> List[Any]:
        return [self.t, self.h, self.h_prime, self.G]


FIBER_SCAN_HEADER = ["t", "h", "h_prime", "G"]


class FiberScanSummary(BaseModel):
    config: Dict[str, Any]
    coefficients: Dict[str, float]
    tbar: float
    sign_changes: int
    sigma_concavity_defect: float


class ErrorResponse(BaseModel):
    """Error document printed on stdout when a subcommand fails"""
    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "error": "alpha+beta must lie in (2, 4N/(N-2)) = (2, 12), got 13",
                "error_type": "ValidationError",
                "exit_code": 2,
            }
        }
    )

    error: str = Field(..., description="Error message")
    error_type: str = Field(..., description="Exception class name")
    exit_code: int
    detail: Optional[Dict[str, Any]] = None
