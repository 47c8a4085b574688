"""
Score functions T(x, y, z).

Per-sample scores are evaluated with numpy broadcasting, so ``x`` may be a
vector of counterfeits for a single (y, z). Dataset scores map a whole
(X, Y, Z) triple to one number, as the CRT needs.
"""
from abc import ABC, abstractmethod
from typing import Callable, Optional

import numpy as np

from pcr.errors import DomainError


class ScoreFunction(ABC):
    descriptor: str = "score"

    @abstractmethod
    def score(self, x, y, z):
        """Deterministic, finite on finite input, broadcasting over ``x``."""

    def __call__(self, x, y, z):
        return self.score(x, y, z)


class FunctionScore(ScoreFunction):
    def __init__(self, fn: Callable, descriptor: str):
        self.fn = fn
        self.descriptor = descriptor

    def score(self, x, y, z):
        return self.fn(x, y, z)


def _residual_linear_z1(x, y, z):
    return (y - x - np.sum(z, axis=-1)) ** 2


def _sq_loss_xy(x, y, z):
    return (y - x) ** 2


def ols_residual_score(b0: float, b1: float) -> ScoreFunction:
    """T(x, y) = (y - b0 - b1 x)^2 with coefficients fitted elsewhere."""
    b0, b1 = float(b0), float(b1)
    return FunctionScore(lambda x, y, z: (y - b0 - b1 * x) ** 2, f"ols_residual(b0={b0:g}, b1={b1:g})")


def score_builtin(name: str, b0: Optional[float] = None, b1: Optional[float] = None) -> ScoreFunction:
    """
    Built-in scores:

    - ``residual_linear_z1``: (y - x - z'1)^2
    - ``sq_loss_xy``: (y - x)^2
    - ``ols_residual``: (y - b0 - b1 x)^2, needs ``b0`` and ``b1``
    """
    if name == "residual_linear_z1":
        return FunctionScore(_residual_linear_z1, name)
    if name == "sq_loss_xy":
        return FunctionScore(_sq_loss_xy, name)
    if name == "ols_residual":
        if b0 is None or b1 is None:
            raise DomainError("ols_residual needs both b0 and b1")
        return ols_residual_score(b0, b1)
    raise DomainError(f"unknown score '{name}' (expected residual_linear_z1, sq_loss_xy, ols_residual)")


class DatasetScore(ABC):
    descriptor: str = "dataset-score"

    @abstractmethod
    def score(self, x: np.ndarray, y: np.ndarray, z: np.ndarray) -> float:
        """Score of a whole dataset."""


class SumDatasetScore(DatasetScore):
    """Lifts a per-sample score to a dataset score by summation."""

    def __init__(self, sample_score: ScoreFunction):
        self.sample_score = sample_score
        self.descriptor = f"sum[{sample_score.descriptor}]"

    def score(self, x, y, z):
        return float(np.sum(self.sample_score.score(x, y, z)))


def squared_distance_score() -> DatasetScore:
    """||Y - X||_2^2."""
    return SumDatasetScore(score_builtin("sq_loss_xy"))
