from pcr.schemas.base_schema import BaseSchema
from pcr.schemas.config_schema import GroupedPcrConfig, PcrConfig, RobustConfig, ThresholdKind, TieBreak
from pcr.schemas.experiment_schema import (
    ExperimentReport,
    ExperimentSpec,
    ModelId,
    ModelSpec,
    Procedure,
    ReplicateDetail,
)
from pcr.schemas.result_schema import (
    CrtResult,
    GroupedPcrResult,
    LabelCounts,
    OdcCurve,
    PcrResult,
    PfEntry,
    PfResult,
    PowerPredicates,
    PowerReport,
    QpSolution,
    RobustPcrResult,
)
from pcr.schemas.trip_schema import TripRecord

__all__ = [
    "BaseSchema",
    "CrtResult",
    "ExperimentReport",
    "ExperimentSpec",
    "GroupedPcrConfig",
    "GroupedPcrResult",
    "LabelCounts",
    "ModelId",
    "ModelSpec",
    "OdcCurve",
    "PcrConfig",
    "PcrResult",
    "PfEntry",
    "PfResult",
    "PowerPredicates",
    "PowerReport",
    "Procedure",
    "QpSolution",
    "ReplicateDetail",
    "RobustConfig",
    "RobustPcrResult",
    "ThresholdKind",
    "TieBreak",
    "TripRecord",
]
