import json
from datetime import datetime
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, field_validator


class RunManifest(BaseModel):
    run_id: str
    command: str
    parameters: Dict[str, Any]
    seed: Optional[int] = None
    tool_version: str
    started_at: datetime
    wall_time: Optional[float] = None
    output_paths: List[str] = []


class RunOut(BaseModel):
    id: int
    run_id: str
    command: str
    parameters: Dict[str, Any] = {}
    seed: Optional[int] = None
    tool_version: str
    started_at: datetime
    wall_time: Optional[float] = None
    output_paths: List[str] = []
    model_config = ConfigDict(from_attributes=True)

    # the ledger stores both as JSON text
    @field_validator("parameters", "output_paths", mode="before")
    @classmethod
    def _decode(cls, value):
        if isinstance(value, str):
            return json.loads(value)
        return value
