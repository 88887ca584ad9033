from datetime import datetime, timezone
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Verdict(str, Enum):
    """Verdicts issued by analyzers."""
    DECAYS = "decays"
    PERSISTS = "persists"
    INCONCLUSIVE = "inconclusive"
    OBSTRUCTION = "obstruction"
    UC_EVIDENCE = "uc-evidence"
    NORM1 = "norm-1-on-family"
    NOT_NORM1 = "not-norm-1"
    PASS = "pass"
    FAIL = "fail"


class ProbeMode(str, Enum):
    """Direction of a continuity probe."""
    FROM_ABOVE = "from-above"
    FROM_BELOW = "from-below"


class SetValue(BaseModel):
    """A set (canonical text) with a measured value."""
    set: str = Field(..., description="Canonical set text")
    value: float = Field(..., description="Measured value, usually ‖F(Δ)‖")


class PairResult(BaseModel):
    """Maximum of a pairwise quantity (commutator or product norm) over set pairs."""
    max_norm: float = Field(..., ge=0, description="Largest norm found")
    worst_pair: Optional[Tuple[str, str]] = Field(None, description="Pair attaining the maximum")
    pairs_checked: int = Field(0, ge=0, description="Number of pairs evaluated")


class PVMResult(BaseModel):
    """Outcome of the idempotence check ‖F(Δ)² − F(Δ)‖ ≤ 1e-8."""
    is_pvm: bool
    witness_set: Optional[str] = Field(None, description="Set with the largest idempotence defect")
    witness_value: float = Field(0.0, description="Largest ‖F(Δ)² − F(Δ)‖")


class SpectrumEstimate(BaseModel):
    """Grid points whose tested balls all have non-zero effects."""
    points: List[float]
    radii: List[float]
    under_approximation: bool = Field(True, description="Only finitely many open sets are tested")


class AbsoluteContinuityFit(BaseModel):
    """Fitted constant c of ‖F(Δ)‖ ≤ c·ν(Δ)."""
    c_hat: Optional[float] = Field(None, description="max ‖F(Δ)‖/ν(Δ) over 0 < ν(Δ) < ∞")
    extremal_set: Optional[str] = None
    measure: str
    ratios: List[SetValue] = Field(default_factory=list)
    skipped: List[str] = Field(default_factory=list, description="Members with ν(Δ) = ∞")
    failures: List[str] = Field(default_factory=list, description="Members with ν(Δ) = 0 but F(Δ) ≠ 0")


class ScalingReport(BaseModel):
    """Probe value per truncation dimension with a trend verdict."""
    probe: str
    dims: List[int]
    values: List[float]
    verdict: Verdict

    @model_validator(mode="after")
    def check_lengths(self):
        """One value per dimension."""
        if len(self.dims) != len(self.values):
            raise ValueError("dims and values must have the same length")
        return self


class ContinuityReport(BaseModel):
    """Norm sequence of a continuity probe with its verdict."""
    family: str = Field(..., description="Family description")
    mode: ProbeMode = ProbeMode.FROM_ABOVE
    limit: Optional[str] = Field(None, description="Limit set of a from-below probe")
    norms: List[float]
    decay_rate: float = Field(..., description="Least-squares exponent r of norms ~ i^(-r) on the tail")
    monotone_tail: bool
    verdict: Verdict
    scaling: Optional[ScalingReport] = None

    @field_validator('norms')
    @classmethod
    def validate_norms(cls, value):
        """Norms are nonnegative."""
        if any(v < 0 for v in value):
            raise ValueError("norms must be nonnegative")
        return value


class Norm1Report(BaseModel):
    """Norm-1 scan over a family plus singleton probes."""
    norms: List[SetValue] = Field(..., description="Members with ‖F(Δ)‖ > 1e-9")
    zero_sets: List[str] = Field(default_factory=list, description="Members with F(Δ) = 0")
    norm1_on_family: bool
    singleton_norms: List[SetValue] = Field(default_factory=list)
    point_mass_condition: Optional[bool] = Field(
        None, description="‖F({x})‖ ≠ 0 on every singleton probe (necessary for norm-1 under uniform continuity)")


class PovmAxiomReport(BaseModel):
    """Normalization, additivity and effect checks on a partition."""
    normalization_error: float
    additivity_error: float
    effect_failures: List[str] = Field(default_factory=list)
    passed: bool


class ChiSquareResult(BaseModel):
    """Chi-square statistic with its 99.9% acceptance quantile."""
    statistic: float
    dof: int
    p_value: float
    quantile: float
    passed: bool


class FourSigmaResult(BaseModel):
    """Largest per-cell deviation in binomial standard deviations."""
    max_sigmas: float
    worst_cell: Optional[int] = None
    passed: bool


class OutcomeHistogram(BaseModel):
    """Counts of sampled outcomes per partition cell."""
    cells: List[str] = Field(..., description="Canonical cell texts")
    lower: List[float] = Field(..., description="Lower bound of each cell")
    upper: List[float] = Field(..., description="Upper bound of each cell")
    counts: List[int]
    total: int = Field(..., ge=1)
    seed: Optional[int] = None
    mode: str = Field("direct", description="direct or two-stage")
    observable: Optional[str] = None

    @model_validator(mode="after")
    def check_counts(self):
        """Counts are nonnegative, one per cell, and sum to the total."""
        if len(self.counts) != len(self.cells):
            raise ValueError("one count per cell is required")
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be nonnegative")
        if sum(self.counts) != self.total:
            raise ValueError(f"counts sum to {sum(self.counts)}, expected {self.total}")
        return self

    def frequencies(self) -> List[float]:
        return [c / self.total for c in self.counts]


class AnalyzerReport(BaseModel):
    """One analyzer run as written to disk."""
    model_config = ConfigDict(use_enum_values=True)

    analyzer: str
    inputs: Dict[str, Any] = Field(default_factory=dict, description="Observable, family and parameters")
    sequence: List[float] = Field(default_factory=list, description="Raw measured sequence")
    verdict: Optional[Verdict] = None
    tolerances: Dict[str, float] = Field(default_factory=dict)
    seed: Optional[int] = None
    checks: Dict[str, bool] = Field(default_factory=dict, description="Invariant-level checks")
    failures: List[str] = Field(default_factory=list)
    details: Dict[str, Any] = Field(default_factory=dict)
    generated_at: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    @property
    def passed(self) -> bool:
        return all(self.checks.values()) and not self.failures


class ClaimStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


class ClaimRow(BaseModel):
    """One row of the claims table."""
    model_config = ConfigDict(use_enum_values=True)

    row: int
    claim: str
    measured: Dict[str, Any] = Field(default_factory=dict)
    status: ClaimStatus
    note: Optional[str] = None


class ClaimsTable(BaseModel):
    """Consolidated reproduction report."""
    rows: List[ClaimRow]
    parameters: Dict[str, Any] = Field(default_factory=dict)
    seed: int
    generated_at: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    @property
    def passed(self) -> bool:
        return all(row.status != ClaimStatus.FAIL.value for row in self.rows)
