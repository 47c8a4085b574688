"""
Report persistence: JSON documents with stable key order and CSV tables
appended row by row with the header written once.
"""
import csv
import json
import logging
import os
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence, Union

from pydantic import BaseModel

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, BaseModel):
        return obj.model_dump(mode="json")
    if isinstance(obj, Mapping):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj


def dumps(obj: Any) -> str:
    # float repr is the shortest round-trip form, so equal values give equal bytes
    return json.dumps(to_jsonable(obj), indent=2) + "\n"


def write_json(obj: Any, path: PathLike) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        os.makedirs(path.parent, exist_ok=True)
    with open(path, "w") as f:
        f.write(dumps(obj))
    logger.info("Report saved: %s", path)
    return path


def append_csv_rows(path: PathLike, rows: Iterable[Mapping[str, Any]], fieldnames: Sequence[str]) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        os.makedirs(path.parent, exist_ok=True)
    file_exists = path.is_file() and path.stat().st_size > 0
    with open(path, "a", newline="") as csvfile:
        writer = csv.DictWriter(csvfile, fieldnames=list(fieldnames))
        if not file_exists:
            writer.writeheader()
        for row in rows:
            writer.writerow(row)
    logger.info("Rows appended to: %s", path)
    return path
