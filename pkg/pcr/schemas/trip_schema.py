from typing import ClassVar, Tuple, Union

from pydantic import Field, field_validator

from pcr.schemas.base_schema import BaseSchema


class TripRecord(BaseSchema):
    """One ride of the trip CSV. ``duration_min`` is X; route and hour are Z."""

    COLUMNS: ClassVar[Tuple[str, ...]] = (
        "duration_min", "start_loc", "end_loc", "hour", "user_type", "date", "weekday",
    )

    duration_min: float = Field(..., gt=0.0, description="Ride duration in minutes")
    start_loc: str
    end_loc: str
    hour: float = Field(..., ge=0.0, lt=24.0, description="Fractional hour of day")
    user_type: str
    date: Union[float, str] = Field(..., description="Day of month, or a calendar date")
    weekday: Union[int, str]

    @field_validator("start_loc", "end_loc", "user_type", mode="before")
    @classmethod
    def clean_text(cls, v):
        if v is None or (isinstance(v, float) and v != v):
            raise ValueError("value is missing")
        value = " ".join(str(v).split())
        if not value:
            raise ValueError("value is empty")
        return value

    @property
    def route(self) -> Tuple[str, str]:
        return self.start_loc, self.end_loc
