import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd

from pcr.errors import DataError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    n i.i.d. rows of (X, Y, Z) with X, Y scalar and Z in R^q (q may be 0).
    """

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    y_categories: Optional[Dict[int, str]] = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).reshape(-1)
        y = np.asarray(self.y, dtype=float).reshape(-1)
        z = np.asarray(self.z, dtype=float)
        if z.ndim == 1:
            z = z.reshape(-1, 1) if z.size == x.size and z.size > 0 else z.reshape(x.size, 0)
        n = x.size
        if n < 1:
            raise DataError("dataset must contain at least one sample")
        if y.size != n or z.shape[0] != n:
            raise DataError(f"x, y and z must have the same number of rows (got {n}, {y.size}, {z.shape[0]})")
        for name, arr in (("x", x), ("y", y), ("z", z)):
            bad = np.flatnonzero(~np.isfinite(arr).reshape(n, -1).all(axis=1)) if arr.size else []
            if len(bad):
                raise DataError(f"non-finite entry in column {name}", sample_index=int(bad[0]))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def q(self) -> int:
        return self.z.shape[1]

    def subset(self, rows: Union[Sequence[int], np.ndarray]) -> "Dataset":
        rows = np.asarray(rows, dtype=int)
        return Dataset(self.x[rows], self.y[rows], self.z[rows], self.y_categories)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"x": self.x, "y": self.y})
        for k in range(self.q):
            frame[f"z{k + 1}"] = self.z[:, k]
        return frame


def read_dataset_csv(path: Union[str, Path]) -> Dataset:
    """
    Read ``x,y,z1,...,zq``. A non-numeric y column is encoded as category
    codes in sorted category order.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError:
        raise
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataError(f"cannot parse dataset {path}: {e}") from e

    missing = [c for c in ("x", "y") if c not in frame.columns]
    if missing:
        raise DataError(f"dataset {path} is missing columns: {', '.join(missing)}")
    z_cols = sorted((c for c in frame.columns if c.startswith("z") and c[1:].isdigit()), key=lambda c: int(c[1:]))
    expected = [f"z{k + 1}" for k in range(len(z_cols))]
    if z_cols != expected:
        raise DataError(f"z columns must be named z1..zq consecutively, got {z_cols}")

    categories = None
    y = frame["y"]
    if not pd.api.types.is_numeric_dtype(y):
        codes, uniques = pd.factorize(y.astype(str), sort=True)
        categories = {i: str(u) for i, u in enumerate(uniques)}
        logger.info("Encoded categorical y with %d levels: %s", len(categories), categories)
        y = codes.astype(float)
    try:
        x = pd.to_numeric(frame["x"]).to_numpy(dtype=float)
        z = frame[z_cols].apply(pd.to_numeric).to_numpy(dtype=float) if z_cols else np.empty((len(frame), 0))
    except (ValueError, TypeError) as e:
        raise DataError(f"non-numeric value in dataset {path}: {e}") from e
    return Dataset(x, np.asarray(y, dtype=float), z, categories)


def write_dataset_csv(data: Dataset, path: Union[str, Path]) -> None:
    data.to_frame().to_csv(path, index=False, float_format="%.17g")
