"""
Response encoding, the OLS fit on the training rides, and the per-response
datasets the grouped test consumes.
"""
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from pcr.data import Dataset
from pcr.errors import DataError, DomainError
from pcr.pipeline.kernel import KernelModel
from pcr.scores import ScoreFunction, ols_residual_score

logger = logging.getLogger(__name__)

RESPONSES = ("user_type", "date", "weekday")
WEEKDAYS = {"mon": 1, "tue": 2, "wed": 3, "thu": 4, "fri": 5, "sat": 6, "sun": 7}


def ols_fit(x, y) -> Tuple[float, float]:
    """Least-squares (b0, b1) for y = b0 + b1 x."""
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.size != y.size:
        raise DomainError(f"x and y must have the same length (got {x.size}, {y.size})")
    if x.size < 2:
        raise DomainError(f"OLS needs at least two points, got {x.size}")
    x_bar, y_bar = x.mean(), y.mean()
    dx = x - x_bar
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise DomainError("x has zero variance; the OLS slope is undefined")
    b1 = float(dx @ (y - y_bar)) / sxx
    return float(y_bar - b1 * x_bar), b1


def _weekday_code(value) -> int:
    text = str(value).strip()
    if text.lstrip("+-").isdigit():
        code = int(text)
    else:
        code = WEEKDAYS.get(text[:3].lower(), 0)
    if not 1 <= code <= 7:
        raise DataError(f"unrecognized weekday '{value}'")
    return code


def _day_of_month(value) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        pass
    stamp = pd.to_datetime(str(value), errors="coerce")
    if pd.isna(stamp):
        raise DataError(f"unrecognized date '{value}'")
    return float(stamp.day)


def user_type_categories(train: pd.DataFrame) -> List[str]:
    categories = sorted(train["user_type"].unique().tolist())
    if len(categories) > 2:
        raise DomainError(f"user_type must take at most two values for indicator encoding, got {categories}")
    return categories


def encode_response(frame: pd.DataFrame, response: str, categories: Optional[List[str]] = None) -> np.ndarray:
    """
    Numeric response: ``user_type`` as the indicator of the second sorted
    category, ``date`` as the day of month, ``weekday`` as 1 (Monday) to 5
    (Friday), weekend days continuing to 7.
    """
    if response == "user_type":
        categories = categories if categories is not None else user_type_categories(frame)
        unknown = set(frame["user_type"]) - set(categories)
        if unknown:
            raise DataError(f"user_type values not seen in training: {sorted(unknown)}")
        if len(categories) < 2:
            return np.zeros(len(frame))
        return (frame["user_type"] == categories[1]).to_numpy(dtype=float)
    if response == "date":
        return np.array([_day_of_month(v) for v in frame["date"]], dtype=float)
    if response == "weekday":
        return np.array([_weekday_code(v) for v in frame["weekday"]], dtype=float)
    raise DomainError(f"unknown response '{response}' (expected one of {', '.join(RESPONSES)})")


def route_codes(frame: pd.DataFrame, model: KernelModel) -> np.ndarray:
    return np.array([model.route_code(s, e) for s, e in zip(frame["start_loc"], frame["end_loc"])], dtype=float)


def build_dataset(test: pd.DataFrame, model: KernelModel, response: str,
                  categories: Optional[List[str]] = None) -> Dataset:
    """X = duration, Y = encoded response, Z = (route_code, hour)."""
    if test.empty:
        raise DataError("no test rides to score")
    z = np.column_stack([route_codes(test, model), test["hour"].to_numpy(dtype=float)])
    y = encode_response(test, response, categories)
    y_categories = dict(enumerate(categories)) if response == "user_type" and categories else None
    return Dataset(test["duration_min"].to_numpy(dtype=float), y, z, y_categories)


def fit_response_scores(train: pd.DataFrame, test: pd.DataFrame, model: KernelModel, responses
                        ) -> Tuple[Dict[str, Dataset], Dict[str, ScoreFunction], Dict[str, List[float]]]:
    """OLS of each response on duration over the training rides, and the matching test dataset."""
    datasets, scores, fits = {}, {}, {}
    for response in responses:
        categories = user_type_categories(train) if response == "user_type" else None
        b0, b1 = ols_fit(train["duration_min"].to_numpy(dtype=float), encode_response(train, response, categories))
        datasets[response] = build_dataset(test, model, response, categories)
        scores[response] = ols_residual_score(b0, b1)
        fits[response] = [b0, b1]
        logger.info("Response %s: b0=%.6g b1=%.6g on %d training rides", response, b0, b1, len(train))
    return datasets, scores, fits
