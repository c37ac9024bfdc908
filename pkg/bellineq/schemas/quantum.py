from typing import List, Literal, Optional

from pydantic import BaseModel, Field

from bellineq.schemas.polynomial import PolynomialIO


class EigenRequest(BaseModel):
    polynomial: PolynomialIO
    # per site, two Bloch vectors; omitted means sigma_x / sigma_y everywhere
    settings: Optional[List[List[List[float]]]] = None
    method: Literal["jacobi", "lapack"] = "jacobi"


class EigenOut(BaseModel):
    value: float
    eigenvector: List[List[float]]
    residual: float
    method: str


class QuarticOut(BaseModel):
    r: float
    value: float


class ClosedFormOut(BaseModel):
    branch: Literal["f1", "f2", "eprime"]
    s: float = Field(0.0, ge=0)
    t: float = Field(0.0, ge=0)
    r: float = Field(0.0, ge=0)
    xi: float
    value: float
    theta: Optional[float] = None
