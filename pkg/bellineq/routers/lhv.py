from fastapi import APIRouter, Depends
from sqlalchemy.orm import Session

from bellineq.database import get_db
from bellineq.repository import lhv as lhv_repo
from bellineq.repository import runs as runs_repo
from bellineq.repository.polynomial import FamilyParams
from bellineq.schemas.lhv import ConstraintReportOut, LhvBoundOut
from bellineq.schemas.polynomial import FamilyRequest, PolynomialIO

router = APIRouter(prefix="/lhv", tags=["LHV bounds"])


@router.post("/bound", response_model=LhvBoundOut)
def bound(payload: PolynomialIO, db: Session = Depends(get_db)):
    stopwatch = runs_repo.Stopwatch()
    p = payload.to_polynomial()
    result = lhv_repo.vertex_max(p)
    manifest = runs_repo.record_computation(db, "lhv", payload.model_dump(), None, stopwatch)
    return LhvBoundOut.from_result(result, p.bound, run_id=manifest.run_id)


@router.post("/constraints", response_model=ConstraintReportOut)
def constraints(payload: FamilyRequest):
    params = FamilyParams(u=payload.u, r=payload.r, s=payload.s, t=payload.t)
    return ConstraintReportOut.from_report(lhv_repo.check_constraints(params))
