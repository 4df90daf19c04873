"""
Algèbre du moment cinétique (ħ = 1)

Base fixe |J, m> avec m décroissant de J à -J ; tous les autres modules
héritent de cet ordre.
"""
from dataclasses import dataclass
from functools import lru_cache
from numbers import Integral, Real
from typing import Tuple

import numpy as np
import scipy.linalg

from .console import console
from .errors import DimensionMismatchError, InvalidSpinError, NumericalError

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10


def validate_spin(J: object) -> int:
    """Retourne J sous forme d'entier, ou lève InvalidSpinError"""
    if isinstance(J, bool):
        raise InvalidSpinError(f"invalid spin J={J!r}", key="J")
    if isinstance(J, Integral):
        value = int(J)
    elif isinstance(J, Real) and float(J).is_integer():
        value = int(J)
    else:
        raise InvalidSpinError(f"invalid spin J={J!r}: integer required", key="J")
    if value < 1:
        raise InvalidSpinError(f"invalid spin J={value}: J >= 1 required", key="J")
    return value


def m_values(J: int) -> np.ndarray:
    J = validate_spin(J)
    return np.arange(J, -J - 1, -1, dtype=float)


@dataclass(frozen=True)
class OperatorMatrix:
    """Opérateur de spin de dimension 2J+1"""

    dim: int
    entries: np.ndarray
    hermitian: bool = False

    def __post_init__(self) -> None:
        if self.entries.shape != (self.dim, self.dim):
            raise DimensionMismatchError(
                f"operator shape {self.entries.shape} != ({self.dim}, {self.dim})"
            )
        if self.dim % 2 != 1:
            raise InvalidSpinError(f"dimension {self.dim} is not 2J+1 for integer J")
        if self.hermitian:
            residual = float(np.max(np.abs(self.entries - self.entries.conj().T)))
            if residual >= HERMITIAN_TOL:
                raise NumericalError("operator flagged hermitian is not", residual)

    @property
    def J(self) -> int:
        return (self.dim - 1) // 2

    def __matmul__(self, other: "OperatorMatrix") -> np.ndarray:
        return self.entries @ other.entries


@dataclass(frozen=True)
class UnitaryMatrix:
    """Matrice unitaire complexe (opérateur d'évolution, changement de base)"""

    dim: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        if self.entries.shape != (self.dim, self.dim):
            raise DimensionMismatchError(
                f"unitary shape {self.entries.shape} != ({self.dim}, {self.dim})"
            )
        residual = self.unitarity_residual()
        if residual >= UNITARY_TOL:
            raise NumericalError(
                f"matrix is not unitary (max |U^dagger U - I| = {residual:.3e})", residual
            )

    def unitarity_residual(self) -> float:
        gram = self.entries.conj().T @ self.entries
        return float(np.max(np.abs(gram - np.eye(self.dim))))

    def __matmul__(self, other: "UnitaryMatrix") -> "UnitaryMatrix":
        if other.dim != self.dim:
            raise DimensionMismatchError(f"cannot compose dims {self.dim} and {other.dim}")
        return UnitaryMatrix(self.dim, self.entries @ other.entries)

    @property
    def dagger(self) -> "UnitaryMatrix":
        return UnitaryMatrix(self.dim, self.entries.conj().T)

    def apply(self, vector: np.ndarray) -> np.ndarray:
        if vector.shape[0] != self.dim:
            raise DimensionMismatchError(
                f"vector length {vector.shape[0]} != operator dim {self.dim}"
            )
        return self.entries @ vector


def jz_matrix(J: int) -> OperatorMatrix:
    J = validate_spin(J)
    return OperatorMatrix(2 * J + 1, np.diag(m_values(J)).astype(complex), hermitian=True)


def ladder_matrices(J: int) -> Tuple[np.ndarray, np.ndarray]:
    """(J+, J-) avec <m+1|J+|m> = sqrt(J(J+1) - m(m+1))"""
    J = validate_spin(J)
    m = m_values(J)[1:]
    # J+ envoie l'indice k (m = J-k) vers k-1 : sur-diagonale
    raising = np.diag(np.sqrt(J * (J + 1) - m * (m + 1)), k=1).astype(complex)
    return raising, raising.T.copy()


def jx_matrix(J: int) -> OperatorMatrix:
    raising, lowering = ladder_matrices(J)
    return OperatorMatrix(raising.shape[0], (raising + lowering) / 2, hermitian=True)


def jy_matrix(J: int) -> OperatorMatrix:
    raising, lowering = ladder_matrices(J)
    return OperatorMatrix(raising.shape[0], (raising - lowering) / 2j, hermitian=True)


@lru_cache(maxsize=16)
def _jy_eigensystem(J: int) -> Tuple[np.ndarray, np.ndarray]:
    try:
        eigenvalues, eigenvectors = scipy.linalg.eigh(jy_matrix(J).entries)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigendecomposition of Jy failed for J={J}: {exc}") from exc
    residual = float(
        np.max(np.abs(eigenvectors.conj().T @ eigenvectors - np.eye(2 * J + 1)))
    )
    console.debug(f"Jy eigensystem J={J}: orthonormality residual {residual:.2e}")
    eigenvalues.setflags(write=False)
    eigenvectors.setflags(write=False)
    return eigenvalues, eigenvectors


def rotation_y(J: int, angle: float) -> UnitaryMatrix:
    """exp(-i angle Jy) par décomposition spectrale hermitienne de Jy"""
    J = validate_spin(J)
    if not np.isfinite(angle):
        raise NumericalError(f"rotation angle must be finite, got {angle}")
    eigenvalues, eigenvectors = _jy_eigensystem(J)
    phases = np.exp(-1j * angle * eigenvalues)
    entries = (eigenvectors * phases) @ eigenvectors.conj().T
    return UnitaryMatrix(2 * J + 1, entries)


def torsion(J: int, strength: float) -> UnitaryMatrix:
    """exp(-i alpha Jz^2 / 2J), diagonale"""
    J = validate_spin(J)
    if not np.isfinite(strength):
        raise NumericalError(f"torsion strength must be finite, got {strength}")
    m = m_values(J)
    return UnitaryMatrix(2 * J + 1, np.diag(np.exp(-1j * strength * m**2 / (2 * J))))
