"""
Trip CSV ingestion. Every row is validated against ``TripRecord``; line
numbers in diagnostics count the header as line 1.
"""
import logging
from pathlib import Path
from typing import Union

import pandas as pd
from pydantic import ValidationError

from pcr.errors import DataError
from pcr.schemas.trip_schema import TripRecord

logger = logging.getLogger(__name__)

COLUMNS = list(TripRecord.COLUMNS)


def empty_trips() -> pd.DataFrame:
    return pd.DataFrame({c: pd.Series(dtype=float if c in ("duration_min", "hour") else object) for c in COLUMNS})


def _first_error(e: ValidationError) -> str:
    err = e.errors()[0]
    field = ".".join(str(p) for p in err.get("loc", ())) or "row"
    return f"{field}: {err.get('msg', 'invalid value')}"


def load_trips(path: Union[str, Path], strict: bool = True) -> pd.DataFrame:
    """
    Read a trip CSV with header ``duration_min,start_loc,end_loc,hour,
    user_type,date,weekday``.

    A malformed row raises ``DataError`` carrying its line number; with
    ``strict=False`` it is dropped with a warning instead. An empty file gives
    an empty frame.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"trip file not found: {path}")
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        logger.warning("Trip file %s is empty", path)
        return empty_trips()
    except pd.errors.ParserError as e:
        raise DataError(f"cannot parse trip file {path}: {e}") from e

    missing = [c for c in COLUMNS if c not in raw.columns]
    if missing:
        raise DataError(f"trip file {path} is missing columns: {', '.join(missing)}", line=1)
    if raw.empty:
        logger.warning("Trip file %s has a header but no rows", path)
        return empty_trips()

    records, rejected = [], 0
    for i, row in enumerate(raw[COLUMNS].to_dict(orient="records")):
        line = i + 2
        try:
            records.append(TripRecord(**row).model_dump())
        except ValidationError as e:
            if strict:
                raise DataError(f"invalid trip record in {path}: {_first_error(e)}", line=line) from e
            rejected += 1
            logger.warning("Skipping line %d of %s: %s", line, path, _first_error(e))

    if rejected:
        logger.warning("%d of %d rows rejected from %s", rejected, len(raw), path)
    if not records:
        return empty_trips()
    frame = pd.DataFrame.from_records(records, columns=COLUMNS)
    logger.info("Loaded %d trips from %s", len(frame), path)
    return frame
