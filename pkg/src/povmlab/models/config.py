from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, field_validator

DEFAULT_SEED = 12345
SEED_ENV_VAR = "POVMLAB_SEED"


class AnalyzerName(str, Enum):
    """Analyzers the CLI can run."""
    NORM1 = "norm1"
    UC_PROBE = "uc-probe"
    ABS_CONT = "abs-cont"
    COMMUTE = "commute"
    COVARIANCE = "covariance"
    SCALING = "scaling"
    SAMPLE = "sample"
    KERNEL_AXIOMS = "kernel-axioms"


class SamplingMode(str, Enum):
    DIRECT = "direct"
    TWO_STAGE = "two-stage"
    BOTH = "both"


class RunConfig(BaseModel):
    """Model for one analysis run."""
    observable: str = Field(..., description="Observable spec string, e.g. 'phase-can:dim=256'")
    analyzers: List[AnalyzerName] = Field(default_factory=lambda: [AnalyzerName.NORM1],
                                          description="Analyzers to run, in order")
    families: Dict[str, str] = Field(default_factory=dict,
                                     description="Family spec string per analyzer name")
    measure: Optional[str] = Field(None, description="Reference measure spec for abs-cont")
    partition: Optional[str] = Field(None, description="Partition spec for sample and kernel-axioms")
    state: str = Field("uniform", description="State spec for sampling")
    kernel: Optional[str] = Field(None, description="Kernel spec for kernel-axioms (defaults to the observable's kernel)")
    dims: List[int] = Field(default_factory=list, description="Truncation dimensions for scaling")
    samples: int = Field(100000, ge=1, description="Number of sampled outcomes")
    sampling_mode: SamplingMode = Field(SamplingMode.BOTH, description="Sampling procedure")
    seed: int = Field(DEFAULT_SEED, description="Seed of every random choice")
    workers: int = Field(1, ge=1, description="Worker threads for sharded computations")
    pairs_budget: int = Field(200, ge=1, description="Maximum number of set pairs per pairwise check")
    singletons: List[float] = Field(default_factory=list, description="Singleton probe points for norm1")
    output_dir: str = Field("reports", description="Directory receiving report files")

    @field_validator('dims')
    @classmethod
    def validate_dims(cls, value):
        """Dimensions are positive and strictly increasing."""
        if any(d < 1 for d in value):
            raise ValueError("dimensions must be positive")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("dimensions must be strictly increasing")
        return value
