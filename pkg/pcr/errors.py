"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: ``DomainError`` is a usage problem (2),
everything else derived from ``PcrError`` is a data or numerical failure (1).
"""
from typing import Any, Optional


class PcrError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(PcrError, ValueError):
    """An argument lies outside the domain of the operation."""


class DataError(PcrError):
    """Input data is malformed, or a sampler / score failed on a given row."""

    def __init__(self, message: str, sample_index: Optional[int] = None, line: Optional[int] = None):
        self.sample_index = sample_index
        self.line = line
        where = []
        if sample_index is not None:
            where.append(f"sample {sample_index}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class NumericalError(PcrError, ArithmeticError):
    """A numerical routine failed to converge or produced a non-finite value."""

    def __init__(self, message: str, **context: Any):
        self.context = context
        if context:
            detail = ", ".join(f"{k}={v!r}" for k, v in context.items())
            message = f"{message} [{detail}]"
        super().__init__(message)


class PipelineStageError(DataError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")
