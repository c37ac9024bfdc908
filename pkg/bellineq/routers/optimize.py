from fastapi import APIRouter, Depends
from sqlalchemy.orm import Session

from bellineq.database import get_db
from bellineq.enums import SettingsMode
from bellineq.repository import optimize as optimize_repo
from bellineq.repository import runs as runs_repo
from bellineq.schemas.optimize import SweepOut, SweepRRequest, SweepURequest, ViolationOut, ViolationRequest

router = APIRouter(prefix="/optimize", tags=["Optimize"])


def _frame_out(frame, run_id: str) -> SweepOut:
    return SweepOut(
        columns=list(frame.columns),
        rows=frame.astype(float).values.tolist(),
        run_id=run_id,
    )


@router.post("/violation", response_model=ViolationOut)
def violation(payload: ViolationRequest, db: Session = Depends(get_db)):
    stopwatch = runs_repo.Stopwatch()
    p = payload.polynomial.to_polynomial()
    if payload.mode == SettingsMode.fixed:
        result = optimize_repo.fixed_violation(p)
    else:
        result = optimize_repo.max_violation(p, payload.config)
    manifest = runs_repo.record_computation(db, "qmax", payload.model_dump(mode="json"), payload.config.seed, stopwatch)
    return ViolationOut.from_result(result, payload.mode, run_id=manifest.run_id)


@router.post("/sweep-r", response_model=SweepOut)
def sweep_r(payload: SweepRRequest, db: Session = Depends(get_db)):
    stopwatch = runs_repo.Stopwatch()
    frame = optimize_repo.sweep_r(optimize_repo.r_grid(payload.r_min, payload.r_max, payload.steps))
    manifest = runs_repo.record_computation(db, "sweep-eprime", payload.model_dump(mode="json"), None, stopwatch)
    return _frame_out(frame, manifest.run_id)


@router.post("/sweep-u", response_model=SweepOut)
def sweep_u(payload: SweepURequest, db: Session = Depends(get_db)):
    stopwatch = runs_repo.Stopwatch()
    grid = optimize_repo.u_grid(payload.u_min, payload.u_max, payload.steps)
    frame = optimize_repo.sweep_u(grid, payload.config, free_angles=payload.free_angles)
    manifest = runs_repo.record_computation(
        db, "sweep-violation-factor", payload.model_dump(mode="json"), payload.config.seed, stopwatch
    )
    return _frame_out(frame, manifest.run_id)
