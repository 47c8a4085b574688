"""
Synthetic trip data in the ingestion schema, with a known route histogram.

Duration on a route is ``base + hour_shift * 1{hour > 12} + planted_effect *
1{casual} + N(0, noise_sd^2)``; with ``planted_effect = 0`` every response
is independent of duration given (route, hour).
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, NamedTuple, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from pcr.config import DEFAULT_SEED
from pcr.errors import DomainError
from pcr.pipeline.loader import COLUMNS
from pcr.randkit import RngStream

logger = logging.getLogger(__name__)

MIN_DURATION = 0.5
USER_TYPES = ("Casual", "Registered")


class RouteSpec(NamedTuple):
    start_loc: str
    end_loc: str
    n_train: int
    n_test: int
    base_minutes: float


# two boundary routes: 20 training rides survives the default filter, 19 does not
DEFAULT_ROUTES: Tuple[RouteSpec, ...] = (
    RouteSpec("Dupont Circle", "Union Station", 2600, 2470, 14.0),
    RouteSpec("Union Station", "Dupont Circle", 1400, 1300, 15.0),
    RouteSpec("Eastern Market", "Lincoln Park", 1100, 1000, 9.0),
    RouteSpec("Lincoln Park", "Eastern Market", 1000, 950, 9.5),
    RouteSpec("Logan Circle", "Thomas Circle", 900, 850, 10.0),
    RouteSpec("Thomas Circle", "Logan Circle", 800, 746, 10.5),
    RouteSpec("Adams Mill", "Columbia Road", 20, 30, 12.0),
    RouteSpec("Columbia Road", "Adams Mill", 19, 25, 12.0),
    RouteSpec("Georgetown", "Foggy Bottom", 5, 40, 11.0),
)


@dataclass(frozen=True)
class TripFixture:
    test_path: Path
    train_path: Path
    histogram: Dict[Tuple[str, str], Tuple[int, int]]  # route -> (n_train, n_test)

    def surviving_test_rides(self, min_count: int = 20) -> int:
        return sum(n_test for n_train, n_test in self.histogram.values() if n_train >= min_count)


def simulate_trips(routes: Sequence[RouteSpec], split: str, rng: np.random.Generator, planted_effect: float = 0.0,
                   hour_shift: float = 5.0, noise_sd: float = 2.0, casual_rate: float = 0.3) -> pd.DataFrame:
    """Rides of every route for one split (``"train"`` or ``"test"``)."""
    if not 0.0 <= casual_rate <= 1.0:
        raise DomainError(f"casual_rate must lie in [0, 1], got {casual_rate}")
    if noise_sd < 0:
        raise DomainError(f"noise_sd must be non-negative, got {noise_sd}")
    days = pd.bdate_range("2011-10-01", "2011-10-31")
    frames = []
    for route in routes:
        n = route.n_train if split == "train" else route.n_test
        if n == 0:
            continue
        hour = rng.uniform(6.0, 22.0, n)
        casual = rng.random(n) < casual_rate
        duration = (route.base_minutes + hour_shift * (hour > 12.0) + planted_effect * casual
                    + noise_sd * rng.standard_normal(n))
        day = days[rng.integers(0, len(days), n)]
        frames.append(pd.DataFrame({
            "duration_min": np.round(np.maximum(duration, MIN_DURATION), 4),
            "start_loc": route.start_loc,
            "end_loc": route.end_loc,
            "hour": np.round(hour, 4),
            "user_type": np.where(casual, USER_TYPES[0], USER_TYPES[1]),
            "date": day.strftime("%Y-%m-%d"),
            "weekday": day.day_name(),
        }))
    if not frames:
        return pd.DataFrame(columns=COLUMNS)
    return pd.concat(frames, ignore_index=True)[COLUMNS]


def generate_trip_fixture(out_dir: Union[str, Path], routes: Sequence[RouteSpec] = DEFAULT_ROUTES,
                          planted_effect: float = 0.0, seed: int = DEFAULT_SEED, **kwargs) -> TripFixture:
    """Write ``train.csv`` and ``test.csv`` under ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    for split in ("train", "test"):
        rng = RngStream.derive(seed, "fixture", split).generator()
        frame = simulate_trips(routes, split, rng, planted_effect=planted_effect, **kwargs)
        paths[split] = out_dir / f"{split}.csv"
        frame.to_csv(paths[split], index=False)
        logger.info("Fixture %s: %d rides -> %s", split, len(frame), paths[split])
    histogram = {(r.start_loc, r.end_loc): (r.n_train, r.n_test) for r in routes}
    return TripFixture(test_path=paths["test"], train_path=paths["train"], histogram=histogram)
