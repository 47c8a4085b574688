"""
Model-X samplers: draws of X from L(X | Z = z).
"""
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Callable, Tuple

import numpy as np
import pandas as pd

from pcr.errors import DataError, DomainError


class ConditionalSampler(ABC):
    """
    Draws counterfeit X values given z. Implementations must be deterministic
    given the generator state.
    """

    descriptor: str = "conditional"

    @abstractmethod
    def draw_many(self, z: np.ndarray, rng: np.random.Generator, size: int) -> np.ndarray:
        """``size`` independent draws from L(X | Z = z)."""

    def draw(self, z: np.ndarray, rng: np.random.Generator) -> float:
        return float(self.draw_many(z, rng, 1)[0])

    def draw_rows(self, z_rows: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """One draw per row of ``z_rows`` (a full counterfeit column)."""
        return np.array([self.draw(z, rng) for z in z_rows])


class GaussianSampler(ConditionalSampler):
    """X | Z = z ~ N(mean(z), sd(z)^2)."""

    @abstractmethod
    def mean_sd(self, z_rows: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Conditional mean and standard deviation for each row of ``z_rows``."""

    def draw_many(self, z, rng, size):
        mean, sd = self.mean_sd(np.atleast_2d(z))
        return mean[0] + sd[0] * rng.standard_normal(size)

    def draw_rows(self, z_rows, rng):
        mean, sd = self.mean_sd(z_rows)
        return mean + sd * rng.standard_normal(mean.shape[0])


class GaussianLinearSampler(GaussianSampler):
    """X | Z = z ~ N(intercept + v'z, sd^2)."""

    def __init__(self, v, sd: float = 1.0, intercept: float = 0.0):
        if not sd > 0:
            raise DomainError(f"sampler sd must be positive, got {sd}")
        self.v = np.asarray(v, dtype=float).reshape(-1)
        self.sd = float(sd)
        self.intercept = float(intercept)
        self.descriptor = f"gaussian-linear(q={self.v.size}, sd={self.sd:g})"

    def mean_sd(self, z_rows):
        z_rows = np.atleast_2d(np.asarray(z_rows, dtype=float))
        if z_rows.shape[1] != self.v.size:
            raise DataError(f"sampler expects z of dimension {self.v.size}, got {z_rows.shape[1]}")
        mean = self.intercept + z_rows @ self.v
        return mean, np.full(mean.shape, self.sd)


class StandardNormalSampler(GaussianLinearSampler):
    """Z is empty and X ~ N(0, 1)."""

    def __init__(self, sd: float = 1.0):
        super().__init__(np.empty(0), sd=sd)
        self.descriptor = "standard-normal" if sd == 1.0 else f"normal(sd={sd:g})"


class CallableSampler(ConditionalSampler):
    """Wraps ``fn(z, rng, size) -> array``."""

    def __init__(self, fn: Callable[[np.ndarray, np.random.Generator, int], np.ndarray], descriptor: str = "callable"):
        self.fn = fn
        self.descriptor = descriptor

    def draw_many(self, z, rng, size):
        return np.asarray(self.fn(z, rng, size), dtype=float).reshape(size)


def parse_sampler_spec(spec: str) -> ConditionalSampler:
    """
    Build a sampler from a text spec:

    - ``standard-normal``
    - ``gaussian-linear:<v.csv>[:<sd>]`` (v as one column or one row of numbers)
    - ``kernel:<model.json>`` (a fitted trip-duration kernel model)
    """
    kind, _, rest = spec.partition(":")
    if kind == "standard-normal":
        return StandardNormalSampler(float(rest) if rest else 1.0)
    if kind == "gaussian-linear":
        path, _, sd = rest.partition(":")
        if not path:
            raise DomainError("gaussian-linear sampler needs a coefficient file")
        try:
            v = pd.read_csv(Path(path), header=None).to_numpy(dtype=float).reshape(-1)
        except (ValueError, pd.errors.ParserError) as e:
            raise DataError(f"cannot read coefficients from {path}: {e}") from e
        return GaussianLinearSampler(v, sd=float(sd) if sd else 1.0)
    if kind == "kernel":
        from pcr.pipeline.kernel import KernelModel, KernelSampler

        return KernelSampler(KernelModel.load(Path(rest)))
    raise DomainError(f"unknown sampler spec '{spec}' (expected standard-normal, gaussian-linear:..., kernel:...)")
