import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import minimize

from bellineq.enums import SearchSpace, SettingsMode
from bellineq.exceptions import InvalidArgument
from bellineq.repository.lhv import check_constraints
from bellineq.repository.polynomial import (
    BellPolynomial,
    FamilyParams,
    as_fraction,
    e_double_prime,
    e_prime,
    three_qubit_family,
)
from bellineq.repository.quantum import (
    PAULI_I,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    BlochVector,
    MeasurementSettings,
    assemble_operator,
    coefficient_tensor,
    contract,
    eigen_max,
    largest_eigenvalue,
    quartic_root_max,
)
from bellineq.schemas.optimize import OptimizerConfig

logger = logging.getLogger(__name__)

XATOL = 1e-8
CSV_FLOAT_FORMAT = "%.9g"


@dataclass(frozen=True)
class ViolationResult:
    value: float
    factor: float
    bound: Fraction
    settings: MeasurementSettings
    restart_values: Tuple[float, ...] = ()
    best_restart: Optional[int] = None


def observable_matrices(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    # n(theta, phi).sigma for arrays of angles; shape (..., 2, 2)
    st = np.sin(theta)[..., None, None]
    nx = st * np.cos(phi)[..., None, None]
    ny = st * np.sin(phi)[..., None, None]
    nz = np.cos(theta)[..., None, None]
    return nx * PAULI_X + ny * PAULI_Y + nz * PAULI_Z


def _stacks_from_vector(x: np.ndarray, arity: int, space: SearchSpace):
    if space == SearchSpace.sphere:
        angles = np.asarray(x).reshape(arity, 2, 2)
        obs = observable_matrices(angles[..., 0], angles[..., 1])
    else:
        obs = observable_matrices(np.full((arity, 2), math.pi / 2), np.asarray(x).reshape(arity, 2))
    return [np.stack([PAULI_I, obs[k, 0], obs[k, 1]]) for k in range(arity)]


def settings_from_vector(x: np.ndarray, arity: int, space: SearchSpace) -> MeasurementSettings:
    if space == SearchSpace.sphere:
        angles = np.asarray(x).reshape(arity, 2, 2)
        pairs = [
            tuple(BlochVector.from_angles(float(a[0]), float(a[1])) for a in site) for site in angles
        ]
    else:
        phis = np.asarray(x).reshape(arity, 2)
        pairs = [tuple(BlochVector.in_xy_plane(float(phi)) for phi in site) for site in phis]
    return MeasurementSettings(tuple(pairs))


def fixed_start(arity: int, space: SearchSpace) -> np.ndarray:
    if space == SearchSpace.sphere:
        site = [math.pi / 2, 0.0, math.pi / 2, math.pi / 2]
    else:
        site = [0.0, math.pi / 2]
    return np.array(site * arity, dtype=float)


def restart_points(size: int, cfg: OptimizerConfig, first: np.ndarray) -> Iterable[np.ndarray]:
    # restart 0 is ``first``; the rest draw from independent PCG64 streams
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    for index, child in enumerate(children):
        if index == 0:
            yield np.array(first, dtype=float)
        else:
            yield np.random.Generator(np.random.PCG64(child)).uniform(0.0, 2.0 * math.pi, size=size)


def multistart_maximize(
    objective: Callable[[np.ndarray], float],
    size: int,
    cfg: OptimizerConfig,
    first: np.ndarray,
) -> Tuple[np.ndarray, float, Tuple[float, ...], int]:
    # Nelder-Mead from every restart point; ties keep the lowest restart index
    best_x, best_value, best_index = None, -math.inf, 0
    values = []
    options = {"maxiter": cfg.max_iterations, "xatol": XATOL, "fatol": cfg.tolerance, "adaptive": True}
    for index, x0 in enumerate(restart_points(size, cfg, first)):
        start_value = objective(x0)
        result = minimize(lambda x: -objective(x), x0, method="Nelder-Mead", options=options)
        value, x = -float(result.fun), result.x
        if value < start_value:
            value, x = start_value, x0
        values.append(value)
        if value > best_value:
            best_x, best_value, best_index = x, value, index
    logger.debug("multistart best %.12g at restart %d of %d", best_value, best_index, cfg.restarts)
    return best_x, best_value, tuple(values), best_index


def _factor(value: float, bound: Optional[Fraction]) -> float:
    if bound is None or bound <= 0:
        raise InvalidArgument("violation factor needs a positive declared bound")
    return value / float(bound)


def max_violation(p: BellPolynomial, cfg: Optional[OptimizerConfig] = None) -> ViolationResult:
    cfg = cfg or OptimizerConfig()
    _factor(1.0, p.bound)
    tensor = coefficient_tensor(p)
    size = p.arity * (4 if cfg.search_space == SearchSpace.sphere else 2)

    def objective(x: np.ndarray) -> float:
        return largest_eigenvalue(contract(tensor, _stacks_from_vector(x, p.arity, cfg.search_space)))

    x, value, values, index = multistart_maximize(objective, size, cfg, fixed_start(p.arity, cfg.search_space))
    logger.info("max violation %.9g (bound %s, %d restarts)", value, p.bound, cfg.restarts)
    return ViolationResult(
        value=value,
        factor=_factor(value, p.bound),
        bound=p.bound,
        settings=settings_from_vector(x, p.arity, cfg.search_space),
        restart_values=values,
        best_restart=index,
    )


def fixed_violation(p: BellPolynomial, method: str = "jacobi") -> ViolationResult:
    settings = MeasurementSettings.fixed(p.arity)
    value, _ = eigen_max(assemble_operator(p, settings), method=method)
    return ViolationResult(value=value, factor=_factor(value, p.bound), bound=p.bound, settings=settings)


def optimal_params(u) -> FamilyParams:
    # (r, s, t) = (4u, 2u, 2u) up to u = 2, (4+2u, 2+u, 2+u) beyond
    u = as_fraction(u)
    if u < 0:
        raise InvalidArgument(f"u must be >= 0, got {u}")
    if u <= 2:
        return FamilyParams(u=u, r=4 * u, s=2 * u, t=2 * u)
    return FamilyParams(u=u, r=4 + 2 * u, s=2 + u, t=2 + u)


def _check_grid(name: str, low: float, high: float, steps: int) -> np.ndarray:
    if steps < 1 or low > high or low < 0:
        raise InvalidArgument(f"bad {name} range [{low}, {high}] with {steps} steps")
    return np.linspace(low, high, steps + 1)


def sweep_r(r_grid: Iterable[float], cross_check: bool = False) -> pd.DataFrame:
    rows = []
    for r in r_grid:
        row = {"r": float(r), "lambda_max": quartic_root_max(float(r))}
        if cross_check:
            operator = assemble_operator(e_prime(Fraction(repr(float(r)))), MeasurementSettings.fixed(2))
            row["lambda_max_jacobi"] = eigen_max(operator)[0]
        rows.append(row)
    return pd.DataFrame(rows)


def _violation(poly: BellPolynomial, mode: SettingsMode, cfg: OptimizerConfig) -> ViolationResult:
    if mode == SettingsMode.fixed:
        return fixed_violation(poly, method="lapack")
    return max_violation(poly, cfg)


def sweep_u(
    u_grid: Iterable[float],
    cfg: Optional[OptimizerConfig] = None,
    free_angles: bool = False,
) -> pd.DataFrame:
    # factor at the sigma_x / sigma_y settings; free_angles adds the optimum over all settings,
    # which sits above it (13.05 vs 12.87 at u=2, sqrt(2) vs 1.27 for large u)
    cfg = cfg or OptimizerConfig()
    rows = []
    for u in u_grid:
        params = optimal_params(float(u))
        poly = three_qubit_family(params)
        fixed = fixed_violation(poly, method="lapack")
        row = {
            "u": float(params.u),
            "r": float(params.r),
            "s": float(params.s),
            "t": float(params.t),
            "bound": float(poly.bound),
            "value": fixed.value,
            "factor": fixed.factor,
        }
        if free_angles:
            free = max_violation(poly, cfg)
            row["free_value"] = free.value
            row["free_factor"] = free.factor
        rows.append(row)
        logger.info("u=%g factor %.6f", u, fixed.factor)
    return pd.DataFrame(rows)


def neighbour_scan(
    u,
    cfg: Optional[OptimizerConfig] = None,
    step=1,
    mode: SettingsMode = SettingsMode.fixed,
) -> pd.DataFrame:
    cfg = cfg or OptimizerConfig()
    centre = optimal_params(u)
    step = Fraction(step)
    candidates = [centre]
    for name in ("r", "s", "t"):
        for delta in (-step, step):
            values = {key: getattr(centre, key) for key in ("u", "r", "s", "t")}
            values[name] += delta
            if values[name] < 0:
                continue
            params = FamilyParams(**values)
            if check_constraints(params).passed:
                candidates.append(params)
    rows = []
    for params in candidates:
        result = _violation(three_qubit_family(params), SettingsMode(mode), cfg)
        rows.append({
            "u": float(params.u),
            "r": float(params.r),
            "s": float(params.s),
            "t": float(params.t),
            "factor": result.factor,
            "is_optimal": params == centre,
        })
    return pd.DataFrame(rows)


def e_double_prime_asymptote(s=10 ** 6, t=10 ** 6) -> float:
    operator = assemble_operator(e_double_prime(s, t), MeasurementSettings.fixed(2))
    return eigen_max(operator)[0]


def eprime_asymptote() -> float:
    return (1.0 + math.sqrt(17.0)) / 2.0


def u_grid(u_min: float, u_max: float, steps: int) -> np.ndarray:
    return _check_grid("u", u_min, u_max, steps)


def r_grid(r_min: float, r_max: float, steps: int) -> np.ndarray:
    return _check_grid("r", r_min, r_max, steps)


def to_csv(frame: pd.DataFrame, path) -> None:
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
