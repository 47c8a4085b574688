from enum import Enum

from pydantic import Field, model_validator

from pcr.schemas.base_schema import BaseSchema


class ThresholdKind(str, Enum):
    FINITE = "finite"
    ASYM = "asym"


class TieBreak(str, Enum):
    LITERAL = "literal"
    RANDOM = "random"


class PcrConfig(BaseSchema):
    num_labels: int = Field(..., ge=2, description="Number of labels L")
    counterfeit_ratio: int = Field(..., ge=1, description="Counterfeits per label K")
    alpha: float = Field(..., gt=0.0, lt=1.0, description="Significance level")
    threshold_kind: ThresholdKind = Field(ThresholdKind.ASYM, description="finite or asym threshold")
    tie_break: TieBreak = Field(TieBreak.LITERAL, description="literal >= rule or uniform random tie-break")

    @property
    def num_counterfeits(self) -> int:
        """M = K*L - 1."""
        return self.counterfeit_ratio * self.num_labels - 1


class RobustConfig(PcrConfig):
    delta: float = Field(..., ge=0.0, description="Bound on the expected total variation of the sampler")

    @model_validator(mode="after")
    def check_delta(self):
        if self.delta > 1.0 - 1.0 / self.num_labels:
            raise ValueError(f"delta must lie in [0, 1 - 1/L] = [0, {1.0 - 1.0 / self.num_labels:g}]")
        return self


class GroupedPcrConfig(PcrConfig):
    group_size: int = Field(4, ge=1, description="Samples per group")
