from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from bellineq.enums import SearchSpace, SettingsMode
from bellineq.repository.polynomial import format_fraction
from bellineq.schemas.polynomial import PolynomialIO


class OptimizerConfig(BaseModel):
    restarts: int = Field(64, ge=1)
    seed: int = 0
    tolerance: float = Field(1e-9, gt=0)
    max_iterations: int = Field(2000, ge=1)
    search_space: SearchSpace = SearchSpace.sphere
    model_config = ConfigDict(frozen=True)


class ViolationOut(BaseModel):
    value: float
    factor: float
    bound: str
    mode: SettingsMode
    settings: List[List[List[float]]]
    best_restart: Optional[int] = None
    restarts: Optional[int] = None
    run_id: Optional[str] = None

    @classmethod
    def from_result(cls, result, mode: SettingsMode, run_id: Optional[str] = None) -> "ViolationOut":
        return cls(
            value=result.value,
            factor=result.factor,
            bound=format_fraction(result.bound),
            mode=mode,
            settings=result.settings.as_lists(),
            best_restart=result.best_restart,
            restarts=len(result.restart_values) or None,
            run_id=run_id,
        )


class ViolationRequest(BaseModel):
    polynomial: PolynomialIO
    mode: SettingsMode = SettingsMode.optimize
    config: OptimizerConfig = OptimizerConfig()


class SweepRRequest(BaseModel):
    r_min: float = Field(0.0, ge=0)
    r_max: float = Field(100.0, ge=0)
    steps: int = Field(200, ge=1)


class SweepURequest(BaseModel):
    u_min: float = Field(0.0, ge=0)
    u_max: float = Field(20.0, ge=0)
    steps: int = Field(20, ge=1)
    free_angles: bool = False
    config: OptimizerConfig = OptimizerConfig()


class SweepOut(BaseModel):
    columns: List[str]
    rows: List[List[float]]
    run_id: Optional[str] = None
