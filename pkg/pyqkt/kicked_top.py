"""
Toupie pulsée quantique

Opérateur de Floquet U = exp(-i π Jy / 2) exp(-i α Jz² / 2J), son partenaire
perturbé (α + δ), la décomposition en sous-espaces de parité ee / oo / oe pour J
pair et les statistiques de régime de perturbation dans le bloc oo.
"""
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import Dict, Tuple

import numpy as np
import scipy.linalg

from .console import console
from .errors import ConfigError, NotBlockDiagonalError, NumericalError, UnsupportedSpinError
from .spin import UnitaryMatrix, m_values, rotation_y, torsion, validate_spin

BLOCK_LABELS = ("ee", "oo", "oe")
OFF_BLOCK_TOL = 1e-8


@dataclass(frozen=True)
class KickedTopSpec:
    J: int
    alpha: float = 3.0
    delta: float = 0.0

    def __post_init__(self) -> None:
        J = validate_spin(self.J)
        if J % 2:
            raise UnsupportedSpinError(
                f"J={J} is odd; the parity decomposition needs even J", key="J"
            )
        object.__setattr__(self, "J", J)
        if not np.isfinite(self.alpha):
            raise ConfigError(f"kick strength must be finite, got {self.alpha}", key="alpha")
        if not (np.isfinite(self.delta) and self.delta >= 0):
            raise ConfigError(
                f"perturbation strength must be finite and >= 0, got {self.delta}",
                key="delta",
            )

    @property
    def n_oo(self) -> int:
        return self.J // 2

    def perturbed(self) -> "KickedTopSpec":
        return replace(self, alpha=self.alpha + self.delta, delta=0.0)


def build_qkt(spec: KickedTopSpec) -> UnitaryMatrix:
    """Opérateur de Floquet de la toupie ; le partenaire perturbé est build_qkt(spec.perturbed())"""
    return rotation_y(spec.J, np.pi / 2) @ torsion(spec.J, spec.alpha)


@dataclass(frozen=True)
class SubspaceDecomposition:
    J: int
    T: UnitaryMatrix
    block_dims: Tuple[int, int, int]

    @property
    def block_ranges(self) -> Dict[str, slice]:
        ranges, start = {}, 0
        for label, size in zip(BLOCK_LABELS, self.block_dims):
            ranges[label] = slice(start, start + size)
            start += size
        return ranges

    def columns(self, label: str) -> np.ndarray:
        return self.T.entries[:, self.block_ranges[label]]


def _index(J: int, m: int) -> int:
    return J - m


@lru_cache(maxsize=16)
def parity_basis(J: int) -> SubspaceDecomposition:
    """Colonnes de T : bases ee, oo puis oe construites sur les |m>"""
    J = validate_spin(J)
    if J % 2:
        raise UnsupportedSpinError(f"parity subspaces need even J, got J={J}", key="J")
    dim, half = 2 * J + 1, J // 2
    s = 1.0 / np.sqrt(2.0)
    columns = []

    def vector(*terms: Tuple[int, float]) -> np.ndarray:
        v = np.zeros(dim, dtype=complex)
        for m, c in terms:
            v[_index(J, m)] = c
        return v

    # ee
    columns.append(vector((0, 1.0)))
    columns += [vector((2 * m, s), (-2 * m, s)) for m in range(1, half + 1)]
    # oo
    columns += [vector((2 * m - 1, s), (1 - 2 * m, -s)) for m in range(1, half + 1)]
    # oe
    columns += [vector((2 * m, s), (-2 * m, -s)) for m in range(1, half + 1)]
    columns += [vector((2 * m - 1, s), (1 - 2 * m, s)) for m in range(1, half + 1)]

    T = UnitaryMatrix(dim, np.column_stack(columns))
    T.entries.setflags(write=False)
    return SubspaceDecomposition(J, T, (half + 1, half, J))


def block_residual(U: UnitaryMatrix, decomp: SubspaceDecomposition) -> float:
    """max |(T†UT)_ij| hors des trois blocs diagonaux"""
    transformed = decomp.T.entries.conj().T @ U.entries @ decomp.T.entries
    mask = np.ones(transformed.shape, dtype=bool)
    for rng in decomp.block_ranges.values():
        mask[rng, rng] = False
    return float(np.max(np.abs(transformed[mask]))) if mask.any() else 0.0


def oo_block(U: UnitaryMatrix, decomp: SubspaceDecomposition) -> UnitaryMatrix:
    """Bloc N_oo x N_oo de T†UT"""
    if U.dim != decomp.T.dim:
        raise NotBlockDiagonalError(
            f"operator dim {U.dim} does not match decomposition dim {decomp.T.dim}"
        )
    transformed = decomp.T.entries.conj().T @ U.entries @ decomp.T.entries
    oo = decomp.block_ranges["oo"]
    leak_rows = np.delete(transformed[oo, :], np.arange(oo.start, oo.stop), axis=1)
    leak_cols = np.delete(transformed[:, oo], np.arange(oo.start, oo.stop), axis=0)
    leakage = max(
        float(np.max(np.abs(leak_rows), initial=0.0)),
        float(np.max(np.abs(leak_cols), initial=0.0)),
    )
    console.debug(f"oo block J={decomp.J}: off-block leakage {leakage:.2e}")
    if leakage >= OFF_BLOCK_TOL:
        raise NotBlockDiagonalError(
            f"oo subspace is not invariant (leakage {leakage:.3e})", leakage
        )
    return UnitaryMatrix(oo.stop - oo.start, np.ascontiguousarray(transformed[oo, oo]))


@lru_cache(maxsize=32)
def oo_floquet(J: int, alpha: float) -> UnitaryMatrix:
    """Bloc oo de la toupie (J, α), mis en cache et en lecture seule"""
    block = oo_block(build_qkt(KickedTopSpec(J, alpha)), parity_basis(J))
    block.entries.setflags(write=False)
    return block


def perturbation_operator_oo(decomp: SubspaceDecomposition) -> np.ndarray:
    """V = Jz² / 2J exprimé dans la base oo"""
    J = decomp.J
    generator = np.diag(m_values(J) ** 2 / (2 * J)).astype(complex)
    oo = decomp.columns("oo")
    return oo.conj().T @ generator @ oo


class Regime(str, Enum):
    WEAK = "weak"
    FGR = "FGR"


@dataclass(frozen=True)
class PerturbationRegime:
    N: int
    level_spacing: float
    sigma: float
    delta_c: float
    regime: Regime


def critical_perturbation(N: int) -> float:
    return float(np.sqrt(2 * np.pi / N**3))


def perturbation_stats(spec: KickedTopSpec) -> PerturbationRegime:
    """σ typique de δV dans la base propre ordonnée du bloc oo non perturbé"""
    decomp = parity_basis(spec.J)
    floquet = oo_floquet(spec.J, spec.alpha)
    try:
        # Schur complexe : vecteurs propres orthonormés pour une matrice normale
        triangular, vectors = scipy.linalg.schur(floquet.entries, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"Floquet block diagonalisation failed: {exc}") from exc
    off = float(np.max(np.abs(np.triu(triangular, k=1)), initial=0.0))
    if off >= OFF_BLOCK_TOL:
        raise NumericalError("Schur form of a unitary block is not diagonal", off)
    phases = np.angle(np.diag(triangular))
    order = np.argsort(phases, kind="stable")
    vectors = vectors[:, order]

    V = vectors.conj().T @ perturbation_operator_oo(decomp) @ vectors
    N = spec.n_oo
    off_diag = ~np.eye(N, dtype=bool)
    second_moment = float(np.mean(np.abs(V[off_diag]) ** 2)) if N > 1 else 0.0
    sigma = float(np.sqrt(spec.delta**2 * second_moment))
    spacing = 2 * np.pi / N
    regime = Regime.FGR if sigma > spacing else Regime.WEAK
    stats = PerturbationRegime(N, spacing, sigma, critical_perturbation(N), regime)
    console.debug(
        f"perturbation J={spec.J} delta={spec.delta}: sigma={sigma:.4g} "
        f"Delta={spacing:.4g} delta_c={stats.delta_c:.4g} -> {regime.value}"
    )
    return stats
