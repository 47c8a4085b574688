"""Model-X conditional independence testing with the PCR test."""
from pcr.crt import crt_decide, crt_p, run_crt
from pcr.data import Dataset, read_dataset_csv, write_dataset_csv
from pcr.errors import DataError, DomainError, NumericalError, PcrError, PipelineStageError
from pcr.parameter_free import run_parameter_free
from pcr.pcr_core import pcr_statistic, run_pcr
from pcr.robust import robust_statistic, run_robust_pcr
from pcr.schemas import GroupedPcrConfig, PcrConfig, RobustConfig

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "Dataset",
    "DomainError",
    "GroupedPcrConfig",
    "NumericalError",
    "PcrConfig",
    "PcrError",
    "PipelineStageError",
    "RobustConfig",
    "crt_decide",
    "crt_p",
    "pcr_statistic",
    "read_dataset_csv",
    "robust_statistic",
    "run_crt",
    "run_parameter_free",
    "run_pcr",
    "run_robust_pcr",
    "write_dataset_csv",
]
