"""
Propagation d'états et séries de recouvrement O(t) = |<ψ_u(t)|ψ_p(t)>|
"""
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.stats

from .coherent import Basis, QuantumState
from .console import console
from .errors import DimensionMismatchError, InsufficientDataError, NumericalError
from .kicked_top import KickedTopSpec, oo_floquet
from .spin import UnitaryMatrix

SERIES_TOL = 1e-12
MIN_PLATEAU_POINTS = 10
SETTLED_FRACTION = 0.05


@dataclass(frozen=True)
class SeriesMeta:
    J: Optional[int] = None
    alpha: Optional[float] = None
    delta: Optional[float] = None
    point: Optional[Tuple[float, float, float]] = None
    N: Optional[int] = None
    weight: float = 1.0


@dataclass(frozen=True)
class OverlapSeries:
    steps: np.ndarray
    values: np.ndarray
    meta: SeriesMeta = field(default_factory=SeriesMeta)

    def __post_init__(self) -> None:
        steps = np.asarray(self.steps)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "values", values)
        if steps.shape != values.shape or values.ndim != 1 or values.size == 0:
            raise DimensionMismatchError(
                f"steps {steps.shape} and values {values.shape} do not match"
            )
        if abs(values[0] - 1.0) > SERIES_TOL:
            raise NumericalError(f"overlap series must start at 1, got {values[0]!r}")
        if np.any(values < 0) or np.any(values > 1.0 + SERIES_TOL):
            raise NumericalError("overlap values must lie in [0, 1]")

    @classmethod
    def from_values(
        cls, values: Sequence[float], meta: Optional[SeriesMeta] = None
    ) -> "OverlapSeries":
        arr = np.asarray(values, dtype=float)
        return cls(np.arange(arr.size), arr, meta or SeriesMeta())

    def __len__(self) -> int:
        return int(self.values.size)


def _check_dims(U: UnitaryMatrix, state: QuantumState) -> None:
    if U.dim != state.amplitudes.shape[0]:
        raise DimensionMismatchError(
            f"operator dim {U.dim} does not match state dim {state.amplitudes.shape[0]}"
        )


def evolve(U: UnitaryMatrix, state: QuantumState, n: int) -> QuantumState:
    """U^n |ψ> par produits matrice-vecteur successifs"""
    _check_dims(U, state)
    if n < 0:
        raise InsufficientDataError(f"step count must be >= 0, got {n}")
    psi = state.amplitudes
    for _ in range(n):
        psi = U.entries @ psi
    return QuantumState(state.basis, state.J, psi, state.weight)


def overlap(a: QuantumState, b: QuantumState) -> float:
    if a.basis is not b.basis or a.J != b.J:
        raise DimensionMismatchError(
            f"cannot overlap {a.basis.value} J={a.J} with {b.basis.value} J={b.J}"
        )
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)))


def _propagate_pair(
    unperturbed: np.ndarray, perturbed: np.ndarray, initials: np.ndarray, n_steps: int
) -> np.ndarray:
    """Recouvrements (n_steps+1, k) pour k états initiaux en colonnes"""
    psi_u = initials.copy()
    psi_p = initials.copy()
    values = np.empty((n_steps + 1, initials.shape[1]))
    values[0] = np.abs(np.einsum("ij,ij->j", psi_u.conj(), psi_p))
    for t in range(1, n_steps + 1):
        psi_u = unperturbed @ psi_u
        psi_p = perturbed @ psi_p
        values[t] = np.abs(np.einsum("ij,ij->j", psi_u.conj(), psi_p))
    return values


def fidelity_batch(
    spec: KickedTopSpec,
    initials: Sequence[QuantumState],
    n_steps: int,
    points: Optional[Sequence[Optional[Tuple[float, float, float]]]] = None,
) -> List[OverlapSeries]:
    """Séries O(t) de plusieurs états initiaux oo sous U(α) et U(α + δ)"""
    if n_steps < 0:
        raise InsufficientDataError(f"step count must be >= 0, got {n_steps}")
    if not initials:
        return []
    for state in initials:
        if state.basis is not Basis.OO or state.J != spec.J:
            raise DimensionMismatchError(
                f"fidelity runs need oo states of J={spec.J}, "
                f"got {state.basis.value} J={state.J}"
            )
    unperturbed = oo_floquet(spec.J, spec.alpha)
    perturbed = oo_floquet(spec.J, spec.alpha + spec.delta)
    stacked = np.column_stack([s.amplitudes for s in initials])
    norms = np.linalg.norm(stacked, axis=0)
    values = _propagate_pair(unperturbed.entries, perturbed.entries, stacked, n_steps)
    # un état non renormalisé donne O(0) = norme² ; la série est rapportée à O(0)
    values = values / (norms**2)
    points = list(points) if points is not None else [None] * len(initials)
    steps = np.arange(n_steps + 1)
    return [
        OverlapSeries(
            steps,
            np.minimum(values[:, k], 1.0 + SERIES_TOL * 0.5),
            SeriesMeta(
                spec.J, spec.alpha, spec.delta, points[k], spec.n_oo, initials[k].weight
            ),
        )
        for k in range(len(initials))
    ]


def fidelity_series(
    spec: KickedTopSpec,
    initial: QuantumState,
    n_steps: int,
    point: Optional[Tuple[float, float, float]] = None,
) -> OverlapSeries:
    series = fidelity_batch(spec, [initial], n_steps, [point])[0]
    console.debug(
        f"fidelity J={spec.J} alpha={spec.alpha} delta={spec.delta}: "
        f"{n_steps} steps, final O={series.values[-1]:.4g}"
    )
    return series


def plateau(series: OverlapSeries, tail_fraction: float = 0.2) -> float:
    """Moyenne de la dernière fraction `tail_fraction` de la série"""
    if len(series) < MIN_PLATEAU_POINTS:
        raise InsufficientDataError(
            f"plateau needs at least {MIN_PLATEAU_POINTS} points, got {len(series)}"
        )
    if not 0 < tail_fraction <= 1:
        raise InsufficientDataError(f"tail fraction {tail_fraction} outside (0, 1]")
    count = max(1, int(math.ceil(tail_fraction * len(series))))
    return float(np.mean(series.values[-count:]))


def settled_plateau(series: OverlapSeries, tail_fraction: float = 0.2) -> Optional[float]:
    """Plateau de la queue si celle-ci ne décroît plus, None sinon

    La queue est jugée stationnaire quand la baisse de sa tendance linéaire
    reste sous deux écarts-types des résidus ou sous SETTLED_FRACTION du niveau.
    """
    level = plateau(series, tail_fraction)
    count = max(1, int(math.ceil(tail_fraction * len(series))))
    t = series.steps[-count:].astype(float)
    v = series.values[-count:]
    if count < 3 or np.ptp(v) == 0.0:
        return level
    trend = scipy.stats.linregress(t, v)
    drop = -trend.slope * (t[-1] - t[0])
    scatter = float(np.std(v - (trend.intercept + trend.slope * t)))
    if drop <= max(2.0 * scatter, SETTLED_FRACTION * abs(level)):
        return level
    return None


@dataclass(frozen=True)
class SaturationReport:
    plateau: float
    N: int
    inverse_n: float
    inverse_sqrt_n: float
    nearest: str


def saturation_report(
    series: OverlapSeries, N: int, tail_fraction: float = 0.2
) -> SaturationReport:
    """Compare le plateau mesuré à 1/N et à 1/√N (distance logarithmique)"""
    level = plateau(series, tail_fraction)
    inv_n, inv_sqrt = 1.0 / N, 1.0 / math.sqrt(N)
    if level <= 0:
        nearest = "1/N"
    else:
        nearest = (
            "1/N"
            if abs(math.log(level / inv_n)) <= abs(math.log(level / inv_sqrt))
            else "1/sqrt(N)"
        )
    return SaturationReport(level, N, inv_n, inv_sqrt, nearest)


def short_time_exponent(series: OverlapSeries, t_max: int = 10) -> float:
    """Pente log-log de 1 - O(t) sur t = 1..t_max (2 attendu : début quadratique)"""
    t = series.steps.astype(float)
    loss = 1.0 - series.values
    mask = (t >= 1) & (t <= t_max) & (loss > 0)
    if mask.sum() < 3:
        raise InsufficientDataError("not enough decaying points for a short-time exponent")
    return float(scipy.stats.linregress(np.log(t[mask]), np.log(loss[mask])).slope)
