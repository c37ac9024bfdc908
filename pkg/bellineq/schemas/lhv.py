from typing import Dict, List, Optional

from pydantic import BaseModel

from bellineq.repository.lhv import ConstraintReport, LhvBound
from bellineq.repository.polynomial import format_fraction


class LhvBoundOut(BaseModel):
    max: str
    witness: Dict[str, int]
    vertices: int
    declared_bound: Optional[str] = None
    matches_declared: Optional[bool] = None
    run_id: Optional[str] = None

    @classmethod
    def from_result(cls, result: LhvBound, declared=None, run_id: Optional[str] = None) -> "LhvBoundOut":
        return cls(
            max=format_fraction(result.maximum),
            witness=result.witness_dict(),
            vertices=result.vertices,
            declared_bound=None if declared is None else format_fraction(declared),
            matches_declared=None if declared is None else result.maximum <= declared,
            run_id=run_id,
        )


class ConstraintCheckOut(BaseModel):
    name: str
    lhs: str
    rhs: str
    passed: bool
    saturated: bool


class ConstraintReportOut(BaseModel):
    passed: bool
    violated: List[str]
    checks: List[ConstraintCheckOut]

    @classmethod
    def from_report(cls, report: ConstraintReport) -> "ConstraintReportOut":
        return cls(
            passed=report.passed,
            violated=list(report.violated),
            checks=[
                ConstraintCheckOut(
                    name=check.name,
                    lhs=format_fraction(check.lhs),
                    rhs=format_fraction(check.rhs),
                    passed=check.passed,
                    saturated=check.saturated,
                )
                for check in report.checks
            ],
        )
