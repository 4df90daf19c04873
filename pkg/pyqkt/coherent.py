"""
États cohérents de spin et projection sur le sous-espace oo
"""
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

import numpy as np
import scipy.special

from .classical import INPUT_TOL, ClassicalPoint
from .errors import DimensionMismatchError, EmptyProjectionError, InvalidPointError
from .kicked_top import SubspaceDecomposition
from .spin import jx_matrix, jy_matrix, jz_matrix, m_values, validate_spin

NORM_TOL = 1e-12
EMPTY_WEIGHT = 1e-10


@dataclass(frozen=True)
class SphericalPoint:
    theta: float
    phi: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.theta <= np.pi):
            raise InvalidPointError(f"polar angle {self.theta} outside [0, pi]", key="theta")
        if not (-np.pi <= self.phi <= np.pi):
            raise InvalidPointError(f"azimuth {self.phi} outside [-pi, pi]", key="phi")


class Basis(str, Enum):
    FULL = "full"
    OO = "oo"


@dataclass(frozen=True)
class QuantumState:
    """Vecteur d'amplitudes ; `weight` est la norme² conservée par une projection"""

    basis: Basis
    J: int
    amplitudes: np.ndarray
    weight: float = 1.0

    def __post_init__(self) -> None:
        expected = self.dimension(self.basis, self.J)
        if self.amplitudes.shape != (expected,):
            raise DimensionMismatchError(
                f"{self.basis.value} basis of J={self.J} has dimension {expected}, "
                f"got amplitudes of shape {self.amplitudes.shape}"
            )
        if self.norm > 1.0 + NORM_TOL:
            raise DimensionMismatchError(f"state norm {self.norm:.15f} exceeds 1")

    @staticmethod
    def dimension(basis: Basis, J: int) -> int:
        return 2 * J + 1 if basis is Basis.FULL else J // 2

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def cartesian_to_angles(
    x: float, y: float, z: float, tol: float = INPUT_TOL
) -> SphericalPoint:
    """θ = arccos z, φ = atan2(y, x) ; φ = 0 aux pôles"""
    norm = float(np.sqrt(x * x + y * y + z * z))
    if not np.isfinite(norm) or abs(norm - 1.0) > tol:
        raise InvalidPointError(
            f"({x}, {y}, {z}) is not a unit vector (|v| = {norm:.12f})", key="state"
        )
    theta = float(np.arccos(np.clip(z / norm, -1.0, 1.0)))
    if np.hypot(x, y) < 1e-15:
        return SphericalPoint(theta, 0.0)
    return SphericalPoint(theta, float(np.arctan2(y, x)))


def angles_to_cartesian(point: SphericalPoint) -> ClassicalPoint:
    st = np.sin(point.theta)
    return ClassicalPoint.on_sphere(
        float(st * np.cos(point.phi)), float(st * np.sin(point.phi)), float(np.cos(point.theta))
    )


def coherent_state(J: int, point: SphericalPoint) -> QuantumState:
    """exp(-i φ Jz) exp(-i θ Jy) |J, J>, phase globale telle que l'amplitude m = J soit réelle

    <J, m|ψ> = C(2J, J+m)^{1/2} cos(θ/2)^{J+m} sin(θ/2)^{J-m} e^{i(J-m)φ}
    """
    J = validate_spin(J)
    m = m_values(J)
    up, down = J + m, J - m
    log_binom = 0.5 * (
        scipy.special.gammaln(2 * J + 1)
        - scipy.special.gammaln(up + 1)
        - scipy.special.gammaln(down + 1)
    )
    log_mod = (
        log_binom
        + scipy.special.xlogy(up, np.cos(point.theta / 2))
        + scipy.special.xlogy(down, np.sin(point.theta / 2))
    )
    with np.errstate(divide="ignore"):
        modulus = np.exp(log_mod)
    amplitudes = modulus * np.exp(1j * down * point.phi)
    amplitudes /= np.linalg.norm(amplitudes)
    return QuantumState(Basis.FULL, J, amplitudes)


def coherent_state_at(J: int, p: ClassicalPoint) -> QuantumState:
    return coherent_state(J, cartesian_to_angles(p.x, p.y, p.z))


def expectation_direction(state: QuantumState) -> Tuple[float, float, float]:
    """(<Jx>, <Jy>, <Jz>) / J pour un état de la base complète"""
    if state.basis is not Basis.FULL:
        raise DimensionMismatchError("expectation values need a full-basis state")
    psi = state.amplitudes
    values = [
        float(np.real(np.vdot(psi, op(state.J).entries @ psi))) / state.J
        for op in (jx_matrix, jy_matrix, jz_matrix)
    ]
    return values[0], values[1], values[2]


def project_oo(
    state: QuantumState, decomp: SubspaceDecomposition, renormalize: bool = True
) -> QuantumState:
    """Composantes oo de T†ψ ; poids = norme² retenue avant renormalisation"""
    if state.basis is not Basis.FULL or state.J != decomp.J:
        raise DimensionMismatchError(
            f"projection needs a full-basis state of J={decomp.J}, "
            f"got {state.basis.value} J={state.J}"
        )
    amplitudes = decomp.columns("oo").conj().T @ state.amplitudes
    weight = float(np.vdot(amplitudes, amplitudes).real)
    if weight < EMPTY_WEIGHT:
        raise EmptyProjectionError(
            f"state has no oo component (weight {weight:.3e})", weight
        )
    if renormalize:
        amplitudes = amplitudes / np.sqrt(weight)
    return QuantumState(Basis.OO, decomp.J, amplitudes, weight * state.weight)


def embed_oo(state: QuantumState, decomp: SubspaceDecomposition) -> QuantumState:
    """Réinjecte un état oo dans la base complète"""
    if state.basis is not Basis.OO or state.J != decomp.J:
        raise DimensionMismatchError("embedding needs an oo state of the same J")
    return QuantumState(
        Basis.FULL, state.J, decomp.columns("oo") @ state.amplitudes, state.weight
    )


def footprint_radius(J: int) -> float:
    """Rayon angulaire où |<cs(0)|cs(r)>| = cos(r/2)^{2J} vaut 1/e (≈ 2/√J)"""
    J = validate_spin(J)
    return float(2.0 * np.arccos(np.exp(-1.0 / (2 * J))))


def footprint_outline(J: int, center: ClassicalPoint, n: int = 64) -> List[ClassicalPoint]:
    """Cercle de rayon footprint_radius(J) autour de `center` sur la sphère"""
    radius = footprint_radius(J)
    c = center.as_array()
    reference = np.array([0.0, 0.0, 1.0]) if abs(c[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    u = reference - np.dot(reference, c) * c
    u /= np.linalg.norm(u)
    w = np.cross(c, u)
    outline = []
    for angle in np.linspace(0.0, 2 * np.pi, n, endpoint=False):
        p = np.cos(radius) * c + np.sin(radius) * (np.cos(angle) * u + np.sin(angle) * w)
        outline.append(ClassicalPoint.from_array(p / np.linalg.norm(p)))
    return outline
