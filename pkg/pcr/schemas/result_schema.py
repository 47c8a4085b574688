from fractions import Fraction
from typing import List, Optional

from pydantic import Field, model_validator

from pcr.schemas.base_schema import BaseSchema
from pcr.schemas.config_schema import ThresholdKind


class LabelCounts(BaseSchema):
    w: List[int] = Field(..., description="Samples per label, W_1..W_L")
    n: int = Field(..., ge=1)

    @model_validator(mode="after")
    def check_total(self):
        if any(c < 0 for c in self.w):
            raise ValueError("label counts must be non-negative")
        if sum(self.w) != self.n:
            raise ValueError(f"label counts sum to {sum(self.w)}, expected n={self.n}")
        return self

    @property
    def num_labels(self) -> int:
        return len(self.w)


class PcrResult(BaseSchema):
    n: int
    L: int
    K: int
    alpha: float
    counts: List[int]
    U: float = Field(..., ge=0.0)
    p_finite: float = Field(..., ge=0.0, le=1.0)
    p_asym: float = Field(..., ge=0.0, le=1.0)
    threshold_kind: ThresholdKind
    threshold: float
    reject: bool
    seed: int
    # kept in memory for diagnostics, never serialized
    ranks: Optional[List[int]] = Field(None, exclude=True)
    labels: Optional[List[int]] = Field(None, exclude=True)


class RobustPcrResult(PcrResult):
    delta: float = Field(..., ge=0.0)
    qp_objective: float = Field(..., ge=0.0)
    p_hat: List[float]
    U_plain: float = Field(..., ge=0.0, description="Non-robust statistic on the same counts")


class GroupedPcrResult(BaseSchema):
    """Per-response summary written by the pipeline reporter."""

    p_finite: float = Field(..., ge=0.0, le=1.0)
    p_asym: float = Field(..., ge=0.0, le=1.0)
    U: float = Field(..., ge=0.0)
    N_groups: int = Field(..., ge=1)
    L: int
    K: int
    reject: bool = Field(..., exclude=True)
    dropped: int = Field(0, exclude=True, description="Trailing samples not assigned to a group")


class CrtResult(BaseSchema):
    M: int = Field(..., ge=1)
    p_num: int = Field(..., ge=1)
    p_den: int
    reject_one_lower: bool
    reject_one_upper: bool
    reject_two: bool

    @model_validator(mode="after")
    def check_rational(self):
        if self.p_den != self.M + 1 or self.p_num > self.p_den:
            raise ValueError(f"p = {self.p_num}/{self.p_den} is not in {{1/(M+1), ..., 1}} for M={self.M}")
        return self

    @property
    def p(self) -> Fraction:
        return Fraction(self.p_num, self.p_den)


class PfEntry(BaseSchema):
    L: int
    U: float
    p: float


class PfResult(BaseSchema):
    grid: List[int]
    per_l: List[PfEntry]
    p_star: float = Field(..., ge=0.0, le=1.0)
    reject: bool


class QpSolution(BaseSchema):
    p: List[float]
    objective: float = Field(..., ge=0.0)
    multiplier: float


class OdcCurve(BaseSchema):
    grid: List[float]
    R: List[float]
    r: List[float]
    lipschitz_C: float
    bound_B: float


class PowerPredicates(BaseSchema):
    finite_ok: bool
    asym_ok: bool
    rhs_finite: float
    rhs_asym: float


class PowerReport(BaseSchema):
    n: int
    L: int
    K: int
    alpha: float
    beta: float
    delta_T: float = Field(..., ge=0.0)
    p_s: List[float]
    l1_gap: float
    nu_K: float
    B: float
    C: float
    lower_bound_finite: float
    lower_bound_asym: float
    finite_ok: bool
    asym_ok: bool
    predicted_power_asym: float = Field(..., ge=0.0, le=1.0)
    renormalization_drift: float = Field(..., description="sum(p_s) - 1 as computed, before any rounding")
    eta: Optional[float] = None
