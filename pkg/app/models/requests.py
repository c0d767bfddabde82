import math
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.models.enums import (
    DEFAULT_HALF_EXTENT,
    DEFAULT_NODAL_EPS_FACTOR,
    DEFAULT_POINTS_PER_AXIS,
    Descent,
    FieldFormat,
    PotentialKind,
    Preconditioner,
    SeedShape,
)

ALPHA_BETA_HYPOTHESIS = "2<α+β<4N/(N−2)"
EXPONENT_HYPOTHESIS = "α,β>1"
COUPLING_HYPOTHESIS = "B>0 is a constant"
DIMENSION_HYPOTHESIS = "N≥3"


class StrictModel(BaseModel):
    """Base for config models: unknown keys are rejected"""
    model_config = ConfigDict(extra="forbid", frozen=True)


class Params(StrictModel):
    """Exponents, dimension and coupling constant of the system"""
    model_config = ConfigDict(
        extra="forbid",
        frozen=True,
        json_schema_extra={"example": {"N": 3, "alpha": 2.0, "beta": 2.0, "B": 1.0}},
    )

    N: int = Field(3, description="Spatial dimension")
    alpha: float = Field(2.0, description="Exponent on |u|")
    beta: float = Field(2.0, description="Exponent on |v|")
    B: float = Field(1.0, description="Mass coefficient of the v-equation")

    @field_validator("N")
    @classmethod
    def validate_dimension(cls, v):
        if v < 3:
            raise ValueError(f"N must be at least 3 [hypothesis: {DIMENSION_HYPOTHESIS}]")
        return v

    @field_validator("alpha", "beta")
    @classmethod
    def validate_exponent(cls, v):
        if not math.isfinite(v) or v <= 1:
            raise ValueError(f"alpha and beta must exceed 1 [hypothesis: {EXPONENT_HYPOTHESIS}]")
        return v

    @field_validator("B")
    @classmethod
    def validate_coupling(cls, v):
        if not math.isfinite(v) or v <= 0:
            raise ValueError(f"B must be positive [hypothesis: {COUPLING_HYPOTHESIS}]")
        return v

    @model_validator(mode="after")
    def validate_subcritical(self):
        """Excludes the critical exponent 4N/(N-2) and everything above it"""
        p = self.alpha + self.beta
        critical = 4 * self.N / (self.N - 2)
        if not (2 < p < critical):
            raise ValueError(
                f"alpha+beta must lie in (2, 4N/(N-2)) = (2, {critical:g}), got {p:g} "
                f"[hypothesis: {ALPHA_BETA_HYPOTHESIS}]"
            )
        return self

    @property
    def p(self) -> float:
        """alpha + beta"""
        return self.alpha + self.beta


class GridSpec(StrictModel):
    """Truncated lattice [-L, L]^N with n nodes per axis"""
    half_extent: float = Field(DEFAULT_HALF_EXTENT, gt=0, description="L, box is [-L, L] per axis")
    points_per_axis: int = Field(DEFAULT_POINTS_PER_AXIS, ge=3, description="Odd node count n")

    @field_validator("points_per_axis")
    @classmethod
    def validate_odd(cls, v):
        if v % 2 == 0:
            raise ValueError("points_per_axis must be odd so the origin is a grid node")
        return v


class PotentialSpec(StrictModel):
    """Selects and parameterizes a potential model"""
    kind: PotentialKind = Field(PotentialKind.CONSTANT, description="Potential family")
    A0: float = Field(1.0, description="Lower bound / value at the origin")
    A_inf: Optional[float] = Field(None, description="Limit at infinity (rational, tabulated)")
    length_scale: float = Field(1.0, gt=0, description="l in the rational family")
    curvature: float = Field(1.0, ge=0, description="kappa in the harmonic family")
    table_path: Optional[str] = Field(None, description="QSSFIELD table of A")
    gradient_paths: Optional[List[str]] = Field(
        None, description="Optional N QSSFIELD tables of the components of grad A"
    )

    @model_validator(mode="after")
    def validate_kind(self):
        if self.A0 <= 0:
            raise ValueError("A0 must be positive [hypothesis: (A1) 0<A_0≤A(x)]")
        if self.kind == PotentialKind.RATIONAL:
            if self.A_inf is None or self.A_inf < self.A0:
                raise ValueError("rational potential needs A_inf >= A0")
        if self.kind == PotentialKind.TABULATED:
            if not self.table_path:
                raise ValueError("tabulated potential needs table_path")
            if self.A_inf is None:
                raise ValueError("tabulated potential needs A_inf (value outside the table)")
        return self


class SeedProfile(StrictModel):
    """Angular Gaussian seed u0 = amp * exp(-|x|^2 / w^2) * [(r / w)^s] * sin(s * (theta - rotation))"""
    width_u: float = Field(1.5, gt=0)
    width_v: float = Field(1.5, gt=0)
    amplitude: Optional[float] = Field(
        None, gt=0, description="Fixed amplitude; None calibrates the amplitude-to-width ratio on G = 0"
    )
    rotation: float = Field(0.0, description="Angular offset of the seed, radians")
    shape: SeedShape = Field(SeedShape.HARMONIC, description="Angular factor")
    min_inner_mass: float = Field(
        0.3, ge=0, lt=1, description="Refuse seeds on G = 0 with less inner half-box mass than this"
    )


class SolverConfig(StrictModel):
    """Projected-gradient settings"""
    s: int = Field(2, ge=2, description="Order parameter of the dihedral group G_s")
    step0: float = Field(1e-2, gt=0)
    max_step: float = Field(1.0, gt=0)
    shrink: float = Field(0.5, gt=0, lt=1)
    tol_dx: Optional[float] = Field(
        None, gt=0, description="Absolute d_X threshold; default 1e-6 * (1 + d_X(seed, 0))"
    )
    tol_dx_relative: float = Field(1e-6, gt=0)
    tol_grad: float = Field(1e-5, gt=0)
    max_iter: int = Field(5000, ge=1)
    coupling_floor: float = Field(1e-10, gt=0)
    constraint_tol: float = Field(1e-6, gt=0, description="Relative |G| tolerance after projection")
    min_step: float = Field(1e-14, gt=0, description="Line search gives up below this step")
    preconditioner: Preconditioner = Preconditioner.H1
    descent: Descent = Field(Descent.CONJUGATE, description="Polak-Ribiere+ directions or steepest descent")
    seed_profile: SeedProfile = Field(default_factory=SeedProfile)


class MultistartConfig(StrictModel):
    """Seed-width variants for probing the infimum m"""
    width_variants: List[List[float]] = Field(
        default_factory=list, description="[[w_u, w_v], ...]; empty means a single run"
    )

    @field_validator("width_variants")
    @classmethod
    def validate_variants(cls, v):
        for pair in v:
            if len(pair) != 2 or min(pair) <= 0:
                raise ValueError("each width variant must be [w_u, w_v] with positive widths")
        return v


class FiberScanOptions(StrictModel):
    t_min: float = Field(0.05, gt=0)
    t_max: float = Field(5.0, gt=0)
    points: int = Field(101, ge=3)
    regrid: bool = Field(True, description="Evaluate G(u_t, v_t) on the interpolated grid field")

    @model_validator(mode="after")
    def validate_range(self):
        if self.t_max <= self.t_min:
            raise ValueError("t_max must exceed t_min")
        return self


class GradcheckOptions(StrictModel):
    samples: int = Field(20, ge=1)
    epsilon: float = Field(1e-5, gt=0)
    tolerance: float = Field(1e-5, gt=0)
    random_seed: int = 0


class NodalCountOptions(StrictModel):
    field_path: Optional[str] = None
    eps_factor: float = Field(DEFAULT_NODAL_EPS_FACTOR, gt=0)


class DiagnoseOptions(StrictModel):
    report_path: Optional[str] = None
    consistency_tol: float = Field(1e-10, gt=0)
    pohozaev_tol: float = Field(1e-2, gt=0)
    residual_tol: float = Field(5e-2, gt=0)
    equivariance_tol: float = Field(1e-10, gt=0)
    interpolated_equivariance_tol: float = Field(1e-6, gt=0)
    eps_factor: float = Field(DEFAULT_NODAL_EPS_FACTOR, gt=0)


class RunConfig(StrictModel):
    """Complete, archived description of one CLI run"""
    model_config = ConfigDict(
        extra="forbid",
        frozen=True,
        json_schema_extra={
            "example": {
                "params": {"N": 3, "alpha": 2.0, "beta": 2.0, "B": 1.0},
                "potential": {"kind": "constant", "A0": 1.0},
                "grid": {"half_extent": 8.0, "points_per_axis": 65},
                "solver": {"s": 2},
            }
        },
    )

    params: Params = Field(default_factory=Params)
    potential: PotentialSpec = Field(default_factory=PotentialSpec)
    grid: GridSpec = Field(default_factory=GridSpec)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    multistart: MultistartConfig = Field(default_factory=MultistartConfig)
    fiber_scan: FiberScanOptions = Field(default_factory=FiberScanOptions)
    gradcheck: GradcheckOptions = Field(default_factory=GradcheckOptions)
    nodal_count: NodalCountOptions = Field(default_factory=NodalCountOptions)
    diagnose: DiagnoseOptions = Field(default_factory=DiagnoseOptions)
    output_dir: Optional[str] = None
    workers: Optional[int] = Field(None, ge=1)
    field_format: Optional[FieldFormat] = None
    paper_literal_G: bool = Field(
        False, description="Use the displayed constraint formula without the grad A . x term"
    )
