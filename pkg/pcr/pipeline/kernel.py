"""
Per-route Nadaraya-Watson estimate of the duration distribution given the
hour of day, and the Gaussian sampler it defines.

For a route with training rides (h_i, d_i) and bandwidth b (hours),

    mu(h)     = sum w_i d_i / sum w_i
    sigma2(h) = sum w_i (d_i - mu(h))^2 / sum w_i,   w_i = exp(-(h - h_i)^2 / (2 b^2))

with sigma2 floored at ``variance_floor``.
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
import pandas as pd

from pcr.errors import DataError, DomainError, NumericalError
from pcr.samplers import GaussianSampler

logger = logging.getLogger(__name__)

VARIANCE_FLOOR = 1e-6
DEFAULT_BANDWIDTH_MINUTES = 20.0
ROUTE_SEPARATOR = " -> "


def route_key(start_loc: str, end_loc: str) -> str:
    return f"{start_loc}{ROUTE_SEPARATOR}{end_loc}"


@dataclass(eq=False)
class KernelModel:
    bandwidth_minutes: float
    routes: List[str]
    hours: Dict[str, np.ndarray]
    durations: Dict[str, np.ndarray]
    variance_floor: float = VARIANCE_FLOOR
    _codes: Dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        if not self.bandwidth_minutes > 0:
            raise DomainError(f"bandwidth must be positive, got {self.bandwidth_minutes}")
        if not self.variance_floor > 0:
            raise DomainError(f"variance floor must be positive, got {self.variance_floor}")
        self._codes = {key: code for code, key in enumerate(self.routes)}

    @property
    def bandwidth_hours(self) -> float:
        return self.bandwidth_minutes / 60.0

    def route_code(self, start_loc: str, end_loc: str) -> int:
        key = route_key(start_loc, end_loc)
        if key not in self._codes:
            raise DataError(f"route '{key}' has no training rides in the kernel model")
        return self._codes[key]

    def _route(self, route: Union[int, str]) -> str:
        if isinstance(route, (int, np.integer)):
            if not 0 <= route < len(self.routes):
                raise DataError(f"route code {route} outside the kernel model (0..{len(self.routes) - 1})")
            return self.routes[int(route)]
        if route not in self._codes:
            raise DataError(f"route '{route}' has no training rides in the kernel model")
        return route

    def moments(self, route: Union[int, str], hours) -> Tuple[np.ndarray, np.ndarray]:
        """mu and sigma2 of the given route at each query hour."""
        key = self._route(route)
        h = np.atleast_1d(np.asarray(hours, dtype=float))
        h_train, d_train = self.hours[key], self.durations[key]
        expo = (h[:, None] - h_train[None, :]) ** 2 / (2.0 * self.bandwidth_hours ** 2)
        # shift by the nearest point so the largest weight is exactly 1
        expo -= expo.min(axis=1, keepdims=True)
        w = np.exp(-expo)
        total = w.sum(axis=1)
        mu = (w @ d_train) / total
        sigma2 = np.einsum("ij,ij->i", w, (d_train[None, :] - mu[:, None]) ** 2) / total
        if not (np.isfinite(mu).all() and np.isfinite(sigma2).all()):
            raise NumericalError("non-finite kernel estimate", route=key)
        return mu, np.maximum(sigma2, self.variance_floor)

    def mu(self, route: Union[int, str], hour: float) -> float:
        return float(self.moments(route, hour)[0][0])

    def sigma2(self, route: Union[int, str], hour: float) -> float:
        return float(self.moments(route, hour)[1][0])

    def to_dict(self) -> dict:
        return {
            "bandwidth_minutes": self.bandwidth_minutes,
            "variance_floor": self.variance_floor,
            "routes": [
                {"route": key, "hours": self.hours[key].tolist(), "durations": self.durations[key].tolist()}
                for key in self.routes
            ],
        }

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict()) + "\n")
        logger.info("Kernel model saved: %s (%d routes)", path, len(self.routes))
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "KernelModel":
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
            entries = raw["routes"]
            return cls(
                bandwidth_minutes=float(raw["bandwidth_minutes"]),
                routes=[e["route"] for e in entries],
                hours={e["route"]: np.asarray(e["hours"], dtype=float) for e in entries},
                durations={e["route"]: np.asarray(e["durations"], dtype=float) for e in entries},
                variance_floor=float(raw.get("variance_floor", VARIANCE_FLOOR)),
            )
        except OSError as e:
            raise DataError(f"cannot read kernel model {path}: {e}") from e
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise DataError(f"malformed kernel model {path}: {e}") from e


def kernel_fit(train: pd.DataFrame, bandwidth_minutes: float = DEFAULT_BANDWIDTH_MINUTES, min_count: int = 1,
               variance_floor: float = VARIANCE_FLOOR) -> KernelModel:
    """Store the training rides of every route with at least ``min_count`` of them."""
    if not bandwidth_minutes > 0:
        raise DomainError(f"bandwidth must be positive, got {bandwidth_minutes}")
    routes, hours, durations = [], {}, {}
    if not train.empty:
        for (start, end), rides in train.groupby(["start_loc", "end_loc"], sort=True):
            if len(rides) < min_count:
                continue
            key = route_key(start, end)
            routes.append(key)
            hours[key] = rides["hour"].to_numpy(dtype=float)
            durations[key] = rides["duration_min"].to_numpy(dtype=float)
    logger.info("Kernel fit: %d routes, bandwidth %g minutes", len(routes), bandwidth_minutes)
    return KernelModel(bandwidth_minutes, routes, hours, durations, variance_floor)


class KernelSampler(GaussianSampler):
    """X | Z = (route_code, hour) ~ N(mu(route, hour), sigma2(route, hour))."""

    def __init__(self, model: KernelModel):
        self.model = model
        self.descriptor = f"kernel(routes={len(model.routes)}, bandwidth={model.bandwidth_minutes:g}min)"

    def mean_sd(self, z_rows):
        z_rows = np.atleast_2d(np.asarray(z_rows, dtype=float))
        if z_rows.shape[1] != 2:
            raise DataError(f"kernel sampler expects z = (route_code, hour), got dimension {z_rows.shape[1]}")
        codes = z_rows[:, 0].astype(np.int64)
        mean = np.empty(z_rows.shape[0])
        var = np.empty(z_rows.shape[0])
        for code in np.unique(codes):
            rows = codes == code
            mean[rows], var[rows] = self.model.moments(int(code), z_rows[rows, 1])
        return mean, np.sqrt(var)
