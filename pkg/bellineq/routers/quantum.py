import math
from typing import Optional

import numpy as np
from fastapi import APIRouter, Query

from bellineq.exceptions import InvalidArgument
from bellineq.repository import quantum as quantum_repo
from bellineq.schemas.quantum import ClosedFormOut, EigenOut, EigenRequest, QuarticOut

router = APIRouter(prefix="/quantum", tags=["Quantum"])


@router.get("/quartic", response_model=QuarticOut)
def quartic(r: float = Query(..., ge=0)):
    return QuarticOut(r=r, value=quantum_repo.quartic_root_max(r))


@router.post("/eigen-max", response_model=EigenOut)
def eigen_max(payload: EigenRequest):
    p = payload.polynomial.to_polynomial()
    if payload.settings is None:
        settings = quantum_repo.fixed_settings(p.arity)
    else:
        settings = quantum_repo.MeasurementSettings(tuple(
            tuple(quantum_repo.BlochVector(*vector) for vector in pair) for pair in payload.settings
        ))
    operator = quantum_repo.assemble_operator(p, settings)
    value, vector = quantum_repo.eigen_max(operator, method=payload.method)
    residual = float(np.linalg.norm(operator.matrix @ vector - value * vector))
    return EigenOut(
        value=value,
        eigenvector=[[float(z.real), float(z.imag)] for z in vector],
        residual=residual,
        method=payload.method,
    )


@router.get("/closed-form", response_model=ClosedFormOut)
def closed_form(
    branch: str = Query("f1", pattern="^(f1|f2|eprime)$"),
    xi: float = Query(..., ge=0, le=math.pi / 2),
    s: float = Query(0.0, ge=0),
    t: float = Query(0.0, ge=0),
    r: float = Query(0.0, ge=0),
):
    theta: Optional[float] = None
    if branch == "f1":
        value = quantum_repo.f1_closed(s, t, xi)
    elif branch == "f2":
        value = quantum_repo.f2_closed(s, t, xi)
    elif branch == "eprime":
        value, theta = quantum_repo.eprime_expectation_max(r, xi)
    else:
        raise InvalidArgument(f"unknown branch {branch}")
    return ClosedFormOut(branch=branch, s=s, t=t, r=r, xi=xi, value=value, theta=theta)
