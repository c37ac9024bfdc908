from datetime import datetime, timezone

from sqlalchemy import Column, DateTime, Float, Integer, String, Text

from .database import Base


class RunRecord(Base):
    __tablename__ = "runs"
    id           = Column(Integer, primary_key=True, index=True)
    run_id       = Column(String, index=True, nullable=False)
    command      = Column(String, nullable=False)
    parameters   = Column(Text, nullable=False, default="{}")
    seed         = Column(Integer, nullable=True)
    tool_version = Column(String, nullable=False)
    started_at   = Column(DateTime, default=lambda: datetime.now(timezone.utc))
    wall_time    = Column(Float, nullable=True)
    output_paths = Column(Text, nullable=False, default="[]")
