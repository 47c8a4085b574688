from enum import Enum
from typing import ClassVar, List, Literal, Optional, Tuple

from pydantic import Field, model_validator

from pcr.schemas.base_schema import BaseSchema
from pcr.schemas.config_schema import ThresholdKind


class ModelId(str, Enum):
    CRT_FAILURE_EXAMPLE = "crt_failure_example"
    THETA_FAMILY = "theta_family"
    QUADRATIC_NULL = "quadratic_null"
    QUADRATIC_SHIFT = "quadratic_shift"
    QUADRATIC_A = "quadratic_a"
    ROBUST_MISMATCH = "robust_mismatch"


class Procedure(str, Enum):
    PCR = "pcr"
    CRT = "crt"
    PF_PCR = "pf_pcr"
    ROBUST_PCR = "robust_pcr"


class ModelSpec(BaseSchema):
    model_id: ModelId
    n: int = Field(..., ge=1, description="Samples per replicate dataset")
    theta: float = Field(1e-3, gt=0.0, description="Spike width of g(x) = 1/sqrt(theta^2 + x^2)")
    a: float = Field(0.0, description="Coefficient of X in E[Y | X, Z] for quadratic models")
    eta: float = Field(0.0, gt=-1.0, description="Scale mismatch of the approximate sampler")
    p_dim: int = Field(20, ge=0, description="Dimension of Z for quadratic models")


class ExperimentSpec(BaseSchema):
    name: str
    model: ModelSpec
    test: Procedure
    replicates: int = Field(2000, ge=1)
    seed: int = Field(20231019, ge=0)
    score: Optional[str] = Field(None, description="Per-sample score; defaults to the model's natural score")
    # pcr / robust_pcr / pf_pcr
    L: int = Field(5, ge=2)
    K: int = Field(4, ge=1)
    alpha: float = Field(0.1, gt=0.0, lt=1.0)
    threshold_kind: ThresholdKind = ThresholdKind.ASYM
    # crt
    M: int = Field(1000, ge=1)
    sided: Literal["one_lower", "one_upper", "two"] = "two"
    # pf_pcr
    grid: List[int] = Field(default_factory=lambda: [2, 4, 8, 16, 32])
    shared: bool = False
    # robust_pcr; None means the Pinsker bound for the model's eta
    delta: Optional[float] = Field(None, ge=0.0)
    per_replicate: bool = False

    @model_validator(mode="after")
    def check_combination(self):
        if self.test == Procedure.ROBUST_PCR.value and self.model.model_id != ModelId.ROBUST_MISMATCH.value \
                and self.delta is None:
            raise ValueError("robust_pcr on an exact sampler needs an explicit delta")
        return self


class ReplicateDetail(BaseSchema):
    replicate: int
    statistic: float
    p: float
    reject: bool


class ExperimentReport(BaseSchema):
    experiment: str
    model: str
    test: str
    L: Optional[int]
    K: Optional[int]
    alpha: float
    threshold: str
    replicates: int
    rate: float = Field(..., ge=0.0, le=1.0)
    se: float = Field(..., ge=0.0)
    seconds: Optional[float] = None
    u: Optional[List[float]] = Field(None, description="Coefficient vector drawn for the experiment")
    v: Optional[List[float]] = None
    per_replicate: Optional[List[ReplicateDetail]] = None

    CSV_COLUMNS: ClassVar[Tuple[str, ...]] = (
        "experiment", "model", "test", "L", "K", "alpha", "threshold", "replicates", "rate", "se", "seconds",
    )

    def csv_row(self) -> dict:
        row = self.model_dump(include=set(self.CSV_COLUMNS))
        return {c: ("" if row[c] is None else row[c]) for c in self.CSV_COLUMNS}
