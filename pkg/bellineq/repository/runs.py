import hashlib
import json
import logging
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from sqlalchemy.orm import Session

from bellineq import __version__, models
from bellineq.exceptions import RunNotFound
from bellineq.schemas.run import RunManifest

logger = logging.getLogger(__name__)


def run_id_for(command: str, parameters: Dict[str, Any], seed: Optional[int]) -> str:
    payload = json.dumps({"command": command, "parameters": parameters, "seed": seed}, sort_keys=True, default=str)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


#---------------------------------MANIFESTS
def build_manifest(command: str, parameters: Dict[str, Any], seed: Optional[int] = None) -> RunManifest:
    return RunManifest(
        run_id=run_id_for(command, parameters, seed),
        command=command,
        parameters=json.loads(json.dumps(parameters, default=str)),
        seed=seed,
        tool_version=__version__,
        started_at=datetime.now(timezone.utc),
    )


def finish_manifest(manifest: RunManifest, outputs: Sequence[str] = (), wall_time: Optional[float] = None) -> RunManifest:
    if wall_time is None:
        wall_time = (datetime.now(timezone.utc) - manifest.started_at).total_seconds()
    return manifest.model_copy(update={"wall_time": wall_time, "output_paths": [str(p) for p in outputs]})


def sidecar_path(artifact) -> Path:
    artifact = Path(artifact)
    return artifact.with_name(artifact.name + ".manifest.json")


def write_sidecar(manifest: RunManifest, artifact) -> Path:
    path = sidecar_path(artifact)
    path.write_text(manifest.model_dump_json(indent=2) + "\n")
    return path


class Stopwatch:
    def __init__(self):
        self.start = time.perf_counter()

    def elapsed(self) -> float:
        return time.perf_counter() - self.start


#---------------------------------LEDGER
def record_run(db: Session, manifest: RunManifest) -> models.RunRecord:
    record = models.RunRecord(
        run_id=manifest.run_id,
        command=manifest.command,
        parameters=json.dumps(manifest.parameters, sort_keys=True),
        seed=manifest.seed,
        tool_version=manifest.tool_version,
        started_at=manifest.started_at,
        wall_time=manifest.wall_time,
        output_paths=json.dumps(manifest.output_paths),
    )
    db.add(record)
    db.commit()
    db.refresh(record)
    logger.info("recorded run %s (%s)", manifest.run_id, manifest.command)
    return record


def list_runs(db: Session, limit: int = 100) -> List[models.RunRecord]:
    return db.query(models.RunRecord).order_by(models.RunRecord.id.desc()).limit(limit).all()


def get_run(db: Session, run_id: str) -> models.RunRecord:
    record = (
        db.query(models.RunRecord)
        .filter(models.RunRecord.run_id == run_id)
        .order_by(models.RunRecord.id.desc())
        .first()
    )
    if not record:
        raise RunNotFound(f"run {run_id} not found")
    return record


def record_computation(
    db: Session,
    command: str,
    parameters: Dict[str, Any],
    seed: Optional[int],
    stopwatch: Stopwatch,
    outputs: Sequence[str] = (),
) -> RunManifest:
    manifest = finish_manifest(build_manifest(command, parameters, seed), outputs, stopwatch.elapsed())
    record_run(db, manifest)
    return manifest
