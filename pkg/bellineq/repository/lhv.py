import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, Tuple

from bellineq.exceptions import InvalidArgument
from bellineq.repository.polynomial import BellPolynomial, FamilyParams

logger = logging.getLogger(__name__)

MAX_VARIABLES = 6


@dataclass(frozen=True)
class LhvBound:
    maximum: Fraction
    witness: Tuple[Tuple[str, int], ...]
    vertices: int

    def witness_dict(self) -> Dict[str, int]:
        return dict(self.witness)


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    lhs: Fraction
    rhs: Fraction

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs

    @property
    def saturated(self) -> bool:
        return self.lhs == self.rhs


@dataclass(frozen=True)
class ConstraintReport:
    checks: Tuple[ConstraintCheck, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def violated(self) -> Tuple[str, ...]:
        return tuple(check.name for check in self.checks if not check.passed)


def vertex_assignments(p: BellPolynomial) -> Iterator[Dict[str, int]]:
    # every +/-1 assignment of the variables p uses, +1 first, in a1..c2 order
    labels = p.variable_labels()
    if len(labels) > MAX_VARIABLES:
        raise InvalidArgument(f"at most {MAX_VARIABLES} variables, got {len(labels)}")
    for values in itertools.product((1, -1), repeat=len(labels)):
        yield dict(zip(labels, values))


def vertex_max(p: BellPolynomial) -> LhvBound:
    best_value = None
    best_vertex: Dict[str, int] = {}
    count = 0
    for vertex in vertex_assignments(p):
        count += 1
        value = Fraction(p.evaluate(vertex))
        # strict comparison keeps the first maximiser in enumeration order
        if best_value is None or value > best_value:
            best_value, best_vertex = value, vertex
    logger.debug("vertex max %s over %d vertices", best_value, count)
    return LhvBound(maximum=best_value, witness=tuple(best_vertex.items()), vertices=count)


def verify_declared_bound(p: BellPolynomial) -> Tuple[bool, LhvBound]:
    if p.bound is None:
        raise InvalidArgument("polynomial carries no declared bound")
    result = vertex_max(p)
    matches = result.maximum <= p.bound
    if not matches:
        logger.warning("declared bound %s is below vertex maximum %s", p.bound, result.maximum)
    return matches, result


def certify(p: BellPolynomial) -> BellPolynomial:
    return p.with_bound(vertex_max(p).maximum)


def check_constraints(params: FamilyParams) -> ConstraintReport:
    u, r, s, t = params.u, params.r, params.s, params.t
    checks = (
        ConstraintCheck("r <= 4+2u", r, 4 + 2 * u),
        ConstraintCheck("r-s <= 2u", r - s, 2 * u),
        ConstraintCheck("r-t <= 2u", r - t, 2 * u),
        ConstraintCheck("r-s-t <= 0", r - s - t, Fraction(0)),
    )
    report = ConstraintReport(checks)
    if not report.passed:
        logger.info("family constraints violated: %s", ", ".join(report.violated))
    return report
