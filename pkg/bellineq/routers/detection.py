from fastapi import APIRouter, Depends
from sqlalchemy.orm import Session

from bellineq.database import get_db
from bellineq.enums import SearchSpace
from bellineq.repository import catalog
from bellineq.repository import detection as detection_repo
from bellineq.repository import runs as runs_repo
from bellineq.schemas.detection import ThresholdReport, ThresholdRequest

router = APIRouter(prefix="/detection", tags=["Detection"])


@router.post("/threshold", response_model=ThresholdReport)
def threshold(payload: ThresholdRequest, db: Session = Depends(get_db)):
    stopwatch = runs_repo.Stopwatch()
    name, form = catalog.resolve_inequality(payload.inequality)
    config = payload.config
    if "search_space" not in config.model_fields_set:
        config = config.model_copy(update={"search_space": SearchSpace.xy_plane})
    report = detection_repo.threshold(form, payload.scenario, payload.tolerance, config, name=name)
    manifest = runs_repo.record_computation(db, "threshold", payload.model_dump(mode="json"), config.seed, stopwatch)
    return report.model_copy(update={"run_id": manifest.run_id})
