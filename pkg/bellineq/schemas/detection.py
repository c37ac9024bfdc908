from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from bellineq.enums import Scenario
from bellineq.schemas.optimize import OptimizerConfig


class TracePoint(BaseModel):
    eta: float
    value: float


class FrontierPoint(BaseModel):
    eta2: float
    eta3_min: Optional[float] = None


class ThresholdReport(BaseModel):
    inequality: str
    scenario: Scenario
    threshold: float
    tolerance: float
    efficiencies: List[float]
    angles: List[float]
    polar_angles: Optional[List[float]] = None
    margin: float
    iterations: int
    trace: List[TracePoint] = []
    verified_above: Optional[bool] = None
    verified_below: Optional[bool] = None
    eta3_floor: Optional[float] = None
    frontier: List[FrontierPoint] = []
    run_id: Optional[str] = None
    model_config = ConfigDict(from_attributes=True)


class ThresholdRequest(BaseModel):
    inequality: str = "pi5"
    scenario: Scenario = Scenario.symmetric
    tolerance: float = Field(1e-3, gt=0, le=0.01)
    config: OptimizerConfig = OptimizerConfig()
