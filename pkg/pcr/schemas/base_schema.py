# pcr/schemas/base_schema.py
import json
from typing import Any, Dict

from pydantic import BaseModel, ConfigDict


class BaseSchema(BaseModel):
    """
    Base schema for every config and result model.
    Extra fields are forbidden and assignments are re-validated.
    """

    model_config = ConfigDict(extra="forbid", validate_assignment=True, use_enum_values=True)

    def to_json_dict(self) -> Dict[str, Any]:
        """Plain dict in field-declaration order, excluding in-memory-only fields."""
        return self.model_dump(mode="json")

    def to_json(self) -> str:
        # json.dumps keeps float repr round-trip exact, so equal inputs give equal bytes
        return json.dumps(self.to_json_dict(), indent=2)
