import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from bellineq.exceptions import InvalidArgument, NumericalDriftError
from bellineq.repository.polynomial import BellPolynomial

logger = logging.getLogger(__name__)

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

UNIT_TOL = 1e-12
HERMITIAN_TOL = 1e-12
IMAG_TOL = 1e-10
NORM_TOL = 1e-10
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
ANGLE_SLACK = 1e-12


@dataclass(frozen=True)
class BlochVector:
    nx: float
    ny: float
    nz: float

    def __post_init__(self):
        norm = math.sqrt(self.nx ** 2 + self.ny ** 2 + self.nz ** 2)
        if abs(norm - 1.0) > UNIT_TOL:
            raise InvalidArgument(f"Bloch vector must be a unit vector, |n| = {norm!r}")

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> "BlochVector":
        return cls(
            math.sin(theta) * math.cos(phi),
            math.sin(theta) * math.sin(phi),
            math.cos(theta),
        )

    @classmethod
    def in_xy_plane(cls, phi: float) -> "BlochVector":
        return cls(math.cos(phi), math.sin(phi), 0.0)

    def __neg__(self) -> "BlochVector":
        return BlochVector(-self.nx, -self.ny, -self.nz)

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.nx, self.ny, self.nz)


SIGMA_X = BlochVector(1.0, 0.0, 0.0)
SIGMA_Y = BlochVector(0.0, 1.0, 0.0)
SIGMA_Z = BlochVector(0.0, 0.0, 1.0)


def bloch_matrix(n: BlochVector) -> np.ndarray:
    return n.nx * PAULI_X + n.ny * PAULI_Y + n.nz * PAULI_Z


def bloch_observable(n: BlochVector) -> "HermitianOperator":
    return HermitianOperator(bloch_matrix(n))


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 4, 8):
            raise InvalidArgument(f"expected a 2x2, 4x4 or 8x8 matrix, got shape {m.shape}")
        scale = max(1.0, float(np.max(np.abs(m))))
        drift = float(np.max(np.abs(m - m.conj().T)))
        if drift >= HERMITIAN_TOL * scale:
            raise InvalidArgument(f"matrix is not Hermitian (max |M - M^H| = {drift:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def to_json(self):
        # row-major [re, im] pairs
        return [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix]


@dataclass(frozen=True)
class MeasurementSettings:

    sites: Tuple[Tuple[BlochVector, BlochVector], ...]

    def __post_init__(self):
        if len(self.sites) not in (2, 3):
            raise InvalidArgument(f"settings cover 2 or 3 sites, got {len(self.sites)}")

    @property
    def arity(self) -> int:
        return len(self.sites)

    @classmethod
    def fixed(cls, arity: int) -> "MeasurementSettings":
        return cls(tuple((SIGMA_X, SIGMA_Y) for _ in range(arity)))

    def as_lists(self):
        return [[list(obs.as_tuple()) for obs in pair] for pair in self.sites]


def fixed_settings(arity: int) -> MeasurementSettings:
    return MeasurementSettings.fixed(arity)


def settings_from_angles(angles: Sequence[Sequence[Tuple[float, float]]]) -> MeasurementSettings:
    # per site, ((theta1, phi1), (theta2, phi2)) polar/azimuthal pairs
    return MeasurementSettings(tuple(
        tuple(BlochVector.from_angles(theta, phi) for theta, phi in pair) for pair in angles
    ))


def site_stack(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    return np.stack([PAULI_I, first, second])


def coefficient_tensor(p: BellPolynomial) -> np.ndarray:
    tensor = np.zeros((3,) * p.arity)
    for mono, coeff in p.terms:
        tensor[tuple(mono)[: p.arity]] = float(coeff)
    return tensor


def contract(tensor: np.ndarray, stacks: Sequence[np.ndarray]) -> np.ndarray:
    # sum of coefficient * kron(site operators); site A is the leading factor
    if len(stacks) == 2:
        return np.einsum("ij,iab,jcd->acbd", tensor, *stacks).reshape(4, 4)
    return np.einsum("ijk,iab,jcd,kef->acebdf", tensor, *stacks).reshape(8, 8)


def assemble_operator(p: BellPolynomial, settings: MeasurementSettings) -> HermitianOperator:
    if settings.arity != p.arity:
        raise InvalidArgument(f"polynomial arity {p.arity} but settings for {settings.arity} sites")
    stacks = [site_stack(bloch_matrix(a), bloch_matrix(b)) for a, b in settings.sites]
    return HermitianOperator(contract(coefficient_tensor(p), stacks))


def jacobi_eigh(
    matrix: np.ndarray,
    tol: float = JACOBI_TOL,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> Tuple[np.ndarray, np.ndarray]:
    # cyclic complex Jacobi sweeps; eigenvalues ascending, eigenvectors as columns
    a = np.array(matrix, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))
    off = float(np.linalg.norm(a - np.diag(np.diag(a))))
    for sweep in range(max_sweeps):
        if off < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = abs(a[p, q])
                if g == 0.0:
                    continue
                phase = a[p, q] / g
                theta = 0.5 * math.atan2(2.0 * g, a[p, p].real - a[q, q].real)
                c, s = math.cos(theta), math.sin(theta)
                u = np.eye(n, dtype=complex)
                u[p, p] = c
                u[p, q] = -s
                u[q, p] = s * np.conj(phase)
                u[q, q] = c * np.conj(phase)
                a = u.conj().T @ a @ u
                v = v @ u
        a = 0.5 * (a + a.conj().T)
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
    else:
        logger.warning("Jacobi stopped at the %d sweep cap, off-diagonal norm %.3e", max_sweeps, off)
    values = np.real(np.diag(a))
    order = np.argsort(values, kind="stable")
    return values[order], v[:, order]


def eigen_max(
    operator: Union[HermitianOperator, np.ndarray],
    method: str = "jacobi",
) -> Tuple[float, np.ndarray]:
    op = operator if isinstance(operator, HermitianOperator) else HermitianOperator(operator)
    if method == "jacobi":
        values, vectors = jacobi_eigh(op.matrix)
    elif method == "lapack":
        values, vectors = np.linalg.eigh(op.matrix)
    else:
        raise InvalidArgument(f"unknown eigen method {method!r}")
    vector = vectors[:, -1]
    return float(values[-1]), vector / np.linalg.norm(vector)


def largest_eigenvalue(matrix: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(matrix)[-1])


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    product: bool = False

    def __post_init__(self):
        psi = np.array(self.amplitudes, dtype=complex)
        if psi.ndim != 1 or psi.shape[0] not in (2, 4, 8):
            raise InvalidArgument(f"state must have 2, 4 or 8 amplitudes, got shape {psi.shape}")
        if abs(np.linalg.norm(psi) - 1.0) > NORM_TOL:
            raise InvalidArgument("state is not normalised")
        psi.setflags(write=False)
        object.__setattr__(self, "amplitudes", psi)


def schmidt_state(xi: float) -> PureState:
    # cos(xi)|00> + sin(xi)|11> for xi in [0, pi/2]
    if not (-ANGLE_SLACK <= xi <= math.pi / 2 + ANGLE_SLACK):
        raise InvalidArgument(f"xi must lie in [0, pi/2], got {xi}")
    product = math.isclose(xi, 0.0, abs_tol=ANGLE_SLACK) or math.isclose(xi, math.pi / 2, abs_tol=ANGLE_SLACK)
    if product:
        logger.warning("xi = %.6g gives a product state", xi)
    amplitudes = np.array([math.cos(xi), 0.0, 0.0, math.sin(xi)], dtype=complex)
    return PureState(amplitudes, product=product)


def expectation(state: PureState, operator: HermitianOperator) -> float:
    if state.amplitudes.shape[0] != operator.dim:
        raise InvalidArgument(f"state dimension {state.amplitudes.shape[0]} but operator {operator.dim}")
    value = np.vdot(state.amplitudes, operator.matrix @ state.amplitudes)
    if abs(value.imag) > IMAG_TOL:
        raise NumericalDriftError(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


# ------------------------------------------------- closed forms and settings
def quartic_root_max(r: float) -> float:
    # largest root of e^4 + r e^3 - (r+8) e^2 - 4r e = 0; after dividing by e the cubic
    # is negative at 2 and positive at 3
    r = float(r)
    if r < 0:
        raise InvalidArgument(f"r must be >= 0, got {r}")
    if r == 0:
        return 2.0 * math.sqrt(2.0)

    def cubic(e: float) -> float:
        return (e ** 3 + r * e ** 2 - (r + 8.0) * e - 4.0 * r) / (1.0 + r)

    return float(bisect(cubic, 2.0, 3.0, xtol=1e-14))


def _check_xi(xi: float, lower: float, upper: float) -> None:
    if not (lower - ANGLE_SLACK <= xi <= upper + ANGLE_SLACK):
        raise InvalidArgument(f"xi must lie in [{lower:.6g}, {upper:.6g}], got {xi}")


def _check_weights(s: float, t: float) -> None:
    if s < 0 or t < 0:
        raise InvalidArgument(f"s and t must be >= 0, got s={s}, t={t}")


def f1_closed(s: float, t: float, xi: float) -> float:
    # max over theta of <E''(s,t)> for A = (z, -x), xi in [0, pi/4]
    _check_weights(s, t)
    _check_xi(xi, 0.0, math.pi / 4)
    c2, s2 = math.cos(2.0 * xi), math.sin(2.0 * xi)
    return -(s + t + s * c2) / 4.0 + math.hypot(8.0 + s + (s + t) * c2, (8.0 + t) * s2) / 4.0


def f2_closed(s: float, t: float, xi: float) -> float:
    # max over theta of <E''(s,t)> for A = (-z, -x), xi in [pi/4, pi/2]
    _check_weights(s, t)
    _check_xi(xi, math.pi / 4, math.pi / 2)
    c2, s2 = math.cos(2.0 * xi), math.sin(2.0 * xi)
    return -(s + t - s * c2) / 4.0 + math.hypot(8.0 + s - (s + t) * c2, (8.0 + t) * s2) / 4.0


def _mirrored_b(a1: BlochVector, a2: BlochVector, theta: float) -> MeasurementSettings:
    b1 = BlochVector(math.sin(theta), 0.0, math.cos(theta))
    b2 = BlochVector(-math.sin(theta), 0.0, math.cos(theta))
    return MeasurementSettings(((a1, a2), (b1, b2)))


def eprime_settings(theta: float) -> MeasurementSettings:
    return _mirrored_b(SIGMA_X, -SIGMA_Z, theta)


def f1_settings(theta: float) -> MeasurementSettings:
    return _mirrored_b(SIGMA_Z, -SIGMA_X, theta)


def f2_settings(theta: float) -> MeasurementSettings:
    return _mirrored_b(-SIGMA_Z, -SIGMA_X, theta)


def eprime_expectation_max(r: float, xi: float) -> Tuple[float, float]:
    # best <E'> over the mirrored B settings for the Schmidt state at xi
    load = r / 2.0 * math.sin(xi) ** 2
    theta = math.atan2(2.0 * math.sin(2.0 * xi), 2.0 + load)
    value = math.hypot(2.0 + load, 2.0 * math.sin(2.0 * xi)) - load
    return value, theta


def ghz_state() -> PureState:
    amplitudes = np.zeros(8, dtype=complex)
    amplitudes[0] = amplitudes[7] = 1.0 / math.sqrt(2.0)
    return PureState(amplitudes)


def maximize_closed_form(func, upper: float) -> Tuple[float, float]:
    result = minimize_scalar(lambda x: -func(x), bounds=(0.0, upper), method="bounded", options={"xatol": 1e-12})
    return float(-result.fun), float(result.x)
