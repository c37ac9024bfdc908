# J = sum_S c_S prod_{i in S} eta_i P(S) - K; testable at eta when its largest eigenvalue is positive
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from bellineq.enums import Scenario, SearchSpace
from bellineq.exceptions import InvalidArgument, NonMonotonicError, NoViolationError
from bellineq.repository.optimize import multistart_maximize, observable_matrices
from bellineq.repository.polynomial import ProbabilityForm
from bellineq.repository.quantum import (
    PAULI_I,
    PAULI_X,
    HermitianOperator,
    MeasurementSettings,
    bloch_matrix,
    contract,
    largest_eigenvalue,
)
from bellineq.schemas.detection import FrontierPoint, TracePoint, ThresholdReport
from bellineq.schemas.optimize import OptimizerConfig

logger = logging.getLogger(__name__)

VIOLATION_MARGIN = 1e-9
NEAR_BAND = 1e-2
BOOSTED_RESTARTS = 128
MONOTONICITY_SAMPLES = 5
ETA3_FLOOR = 1e-3
FRONTIER_GRID = (0.6, 0.7, 0.8, 0.9, 1.0)


@dataclass(frozen=True)
class EfficiencyVector:
    eta1: float = 1.0
    eta2: float = 1.0
    eta3: float = 1.0

    def __post_init__(self):
        for name, value in zip(("eta1", "eta2", "eta3"), self.as_tuple()):
            if not 0.0 <= value <= 1.0:
                raise InvalidArgument(f"{name} must lie in [0, 1], got {value}")

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.eta1, self.eta2, self.eta3)


@dataclass(frozen=True)
class AngleOptimum:
    value: float
    angles: Tuple[float, float, float]
    polar_angles: Optional[Tuple[float, float, float]] = None

    @property
    def violated(self) -> bool:
        return self.value > VIOLATION_MARGIN


def efficiency_tensor(q: ProbabilityForm, eta: EfficiencyVector) -> np.ndarray:
    if q.arity != 3:
        raise InvalidArgument(f"efficiency analysis needs a three-site form, got arity {q.arity}")
    weights = eta.as_tuple()
    tensor = np.zeros((3, 3, 3))
    for event, coeff in q.terms:
        scale = float(coeff)
        for sel, weight in zip(event, weights):
            if sel:
                scale *= weight
        tensor[tuple(event)] = scale
    tensor[0, 0, 0] -= float(q.bound)
    return tensor


def _projector_stack(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    return np.stack([PAULI_I, (PAULI_I + first) / 2.0, (PAULI_I + second) / 2.0])


def efficiency_operator(q: ProbabilityForm, eta: EfficiencyVector, settings: MeasurementSettings) -> HermitianOperator:
    if settings.arity != 3:
        raise InvalidArgument("efficiency operator needs settings for three sites")
    tensor = efficiency_tensor(q, eta)
    stacks = [_projector_stack(bloch_matrix(a), bloch_matrix(b)) for a, b in settings.sites]
    return HermitianOperator(contract(tensor, stacks))


def _stacks(x: np.ndarray, space: SearchSpace) -> List[np.ndarray]:
    # first observable pinned to sigma_x; second at azimuth x[k] (and polar x[3+k] on the sphere)
    phis = np.asarray(x[:3])
    thetas = np.asarray(x[3:6]) if space == SearchSpace.sphere else np.full(3, math.pi / 2)
    second = observable_matrices(thetas, phis)
    return [_projector_stack(PAULI_X, second[k]) for k in range(3)]


def max_eigen_over_angles(
    q: ProbabilityForm,
    eta: EfficiencyVector,
    cfg: Optional[OptimizerConfig] = None,
) -> AngleOptimum:
    cfg = cfg or OptimizerConfig(search_space=SearchSpace.xy_plane)
    tensor = efficiency_tensor(q, eta)
    sphere = cfg.search_space == SearchSpace.sphere
    size = 6 if sphere else 3
    first = np.array([math.pi / 2] * size)

    def objective(x: np.ndarray) -> float:
        return largest_eigenvalue(contract(tensor, _stacks(x, cfg.search_space)))

    x, value, _, _ = multistart_maximize(objective, size, cfg, first)
    angles = tuple(float(a % (2.0 * math.pi)) for a in x[:3])
    polar = tuple(float(a) for a in x[3:6]) if sphere else None
    return AngleOptimum(value=value, angles=angles, polar_angles=polar)


def scenario_profile(scenario: Scenario, eta: float, eta2: Optional[float] = None) -> EfficiencyVector:
    # efficiency vector for the scenario's free variable; ``eta2`` fixes the second site in frontier scans
    if scenario == Scenario.symmetric:
        return EfficiencyVector(eta, eta, eta)
    if scenario == Scenario.one_perfect:
        return EfficiencyVector(1.0, eta, eta)
    if scenario == Scenario.two_perfect:
        return EfficiencyVector(1.0, 1.0, eta)
    if eta2 is None:
        raise InvalidArgument("frontier profile needs eta2")
    return EfficiencyVector(1.0, eta2, eta)


class _EtaPredicate:
    # cached predicate evaluations for one bisection, with restarts boosted near zero
    def __init__(self, q: ProbabilityForm, profile: Callable[[float], EfficiencyVector], cfg: OptimizerConfig):
        self.q = q
        self.profile = profile
        self.cfg = cfg
        self.cache: Dict[float, AngleOptimum] = {}

    def __call__(self, eta: float) -> AngleOptimum:
        if eta in self.cache:
            return self.cache[eta]
        optimum = max_eigen_over_angles(self.q, self.profile(eta), self.cfg)
        if -NEAR_BAND < optimum.value <= VIOLATION_MARGIN and self.cfg.restarts < BOOSTED_RESTARTS:
            boosted = self.cfg.model_copy(update={"restarts": BOOSTED_RESTARTS})
            retry = max_eigen_over_angles(self.q, self.profile(eta), boosted)
            if retry.value > optimum.value:
                optimum = retry
        logger.debug("eta=%.6f lambda_max=%.6e", eta, optimum.value)
        self.cache[eta] = optimum
        return optimum

    def trace(self) -> List[TracePoint]:
        return [TracePoint(eta=eta, value=opt.value) for eta, opt in sorted(self.cache.items())]


def _bisect(predicate: _EtaPredicate, tol: float, samples: int = MONOTONICITY_SAMPLES) -> Tuple[float, int]:
    # smallest efficiency with a positive eigenvalue, to within ``tol``
    if not predicate(1.0).violated:
        raise NoViolationError(f"no violation at perfect efficiency (lambda_max = {predicate(1.0).value:.3e})")
    if predicate(0.0).violated:
        return 0.0, 0
    grid = [k / samples for k in range(1, samples)]
    outcomes = [(0.0, False)] + [(eta, predicate(eta).violated) for eta in grid] + [(1.0, True)]
    for (low, was_violated), (high, is_violated) in zip(outcomes, outcomes[1:]):
        if was_violated and not is_violated:
            raise NonMonotonicError(f"violation at eta={low:.4f} but not at eta={high:.4f}")
    lo = max(eta for eta, hit in outcomes if not hit)
    hi = min(eta for eta, hit in outcomes if hit)
    iterations = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        iterations += 1
        if predicate(mid).violated:
            hi = mid
        else:
            lo = mid
    return hi, iterations


def _verify(q: ProbabilityForm, profile, cfg: OptimizerConfig, threshold: float, tol: float):
    fresh = cfg.model_copy(update={"seed": cfg.seed + 1})
    above = max_eigen_over_angles(q, profile(min(1.0, threshold + tol)), fresh).violated
    below = None
    if threshold - tol >= 0.0:
        below = not max_eigen_over_angles(q, profile(threshold - tol), fresh).violated
    return above, below


def _confirmed(above: bool, below: Optional[bool]) -> bool:
    return above and below is not False


def threshold(
    q: ProbabilityForm,
    scenario: Scenario,
    tol: float = 1e-3,
    cfg: Optional[OptimizerConfig] = None,
    name: str = "custom",
    frontier_grid: Sequence[float] = FRONTIER_GRID,
    eta3_floor: float = ETA3_FLOOR,
) -> ThresholdReport:
    if not 0.0 < tol <= 0.01:
        raise InvalidArgument(f"tolerance must lie in (0, 0.01], got {tol}")
    cfg = cfg or OptimizerConfig(search_space=SearchSpace.xy_plane)
    scenario = Scenario(scenario)
    if scenario == Scenario.frontier:
        # minimal eta2 with the third detector almost switched off
        profile = lambda eta: EfficiencyVector(1.0, eta, eta3_floor)
    else:
        profile = lambda eta: scenario_profile(scenario, eta)

    predicate = _EtaPredicate(q, profile, cfg)
    value, iterations = _bisect(predicate, tol)
    above, below = _verify(q, profile, cfg, value, tol)
    if not _confirmed(above, below):
        boosted = cfg.model_copy(update={"restarts": max(2 * cfg.restarts, BOOSTED_RESTARTS)})
        logger.warning(
            "threshold %.4f failed re-verification (above=%s, below=%s), retrying with %d restarts",
            value, above, below, boosted.restarts,
        )
        predicate = _EtaPredicate(q, profile, boosted)
        value, extra = _bisect(predicate, tol)
        iterations += extra
        above, below = _verify(q, profile, boosted, value, tol)
        if not _confirmed(above, below):
            raise NonMonotonicError(
                f"threshold {value:.4f} does not hold up under a fresh seed (above={above}, below={below})"
            )
    at_threshold = predicate(value)

    frontier: List[FrontierPoint] = []
    if scenario == Scenario.frontier:
        for eta2 in frontier_grid:
            inner = _EtaPredicate(q, lambda eta, e2=eta2: EfficiencyVector(1.0, e2, eta), cfg)
            try:
                eta3_min, _ = _bisect(inner, tol)
            except NoViolationError:
                eta3_min = None
            frontier.append(FrontierPoint(eta2=eta2, eta3_min=eta3_min))

    logger.info("%s %s threshold %.4f after %d bisection steps", name, scenario.value, value, iterations)
    return ThresholdReport(
        inequality=name,
        scenario=scenario,
        threshold=value,
        tolerance=tol,
        efficiencies=list(profile(value).as_tuple()),
        angles=list(at_threshold.angles),
        polar_angles=None if at_threshold.polar_angles is None else list(at_threshold.polar_angles),
        margin=at_threshold.value,
        iterations=iterations,
        trace=predicate.trace(),
        verified_above=above,
        verified_below=below,
        eta3_floor=eta3_floor if scenario == Scenario.frontier else None,
        frontier=frontier,
    )


def efficiency_scan(
    q: ProbabilityForm,
    settings: MeasurementSettings,
    site: int,
    grid: Sequence[float],
) -> List[float]:
    values = []
    for eta in grid:
        weights = [1.0, 1.0, 1.0]
        weights[site] = eta
        operator = efficiency_operator(q, EfficiencyVector(*weights), settings)
        values.append(largest_eigenvalue(operator.matrix))
    return values


_TABLE_COLUMNS = (
    ("symmetric", Scenario.symmetric),
    ("eta1=1", Scenario.one_perfect),
    ("eta1=eta2=1", Scenario.two_perfect),
)


def render_table(reports: Sequence[ThresholdReport]) -> str:
    names: List[str] = []
    cells: Dict[Tuple[str, Scenario], str] = {}
    for report in reports:
        if report.inequality not in names:
            names.append(report.inequality)
        cells[(report.inequality, report.scenario)] = (
            "0" if report.threshold == 0.0 else f"{100.0 * report.threshold:.1f}%"
        )
    header = ["inequality"] + [title for title, _ in _TABLE_COLUMNS]
    rows = [[name] + [cells.get((name, scenario), "-") for _, scenario in _TABLE_COLUMNS] for name in names]
    widths = [max(len(str(row[i])) for row in [header] + rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip() for row in [header] + rows]
    return "\n".join(lines)
