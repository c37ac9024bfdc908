from typing import List

from fastapi import APIRouter, Depends, Query
from sqlalchemy.orm import Session

from bellineq.database import get_db
from bellineq.repository import runs as runs_repo
from bellineq.schemas.run import RunOut

router = APIRouter(prefix="/runs", tags=["Runs"])


@router.get("/", response_model=List[RunOut])
def list_runs(limit: int = Query(100, ge=1, le=1000), db: Session = Depends(get_db)):
    return [RunOut.model_validate(record) for record in runs_repo.list_runs(db, limit)]


@router.get("/{run_id}", response_model=RunOut)
def get_run(run_id: str, db: Session = Depends(get_db)):
    return RunOut.model_validate(runs_repo.get_run(db, run_id))
