"""
Localisation du bord du chaos quantique

On garde y = y_f du point fixe positif et on fait varier z (x par la racine
positive de la contrainte sphérique) ; le bord est l'état dont la décroissance
q-exponentielle a la plus longue portion linéaire en log-log. Les balayages en
δ donnent q_rel(δ), τ(δ), les plateaux q_rel^c et q_rel^s et la pente de τ.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.stats

from .classical import FIXED_POINTS, ClassicalPoint
from .coherent import coherent_state_at, project_oo
from .console import console
from .errors import (
    ConfigError,
    EdgeNotFoundError,
    FitError,
    InvalidPointError,
    NumericalError,
    PyqktError,
)
from .evolution import OverlapSeries, fidelity_batch, fidelity_series
from .kicked_top import (
    KickedTopSpec,
    critical_perturbation,
    oo_floquet,
    parity_basis,
    perturbation_stats,
)
from .nonextensive import (
    DEFAULT_Q_GRID,
    DecayClass,
    DecayKind,
    QExpFit,
    classify_decay,
    decay_baseline,
    fit_qexp,
    loglog_stretch,
    pre_plateau_region,
)

DEFAULT_BAND = 0.30
DEFAULT_Z_STEP = 0.002
CHUNK_SIZE = 16
PLATEAU_SPREAD = 0.15
PLATEAU_POINTS = 3

# décalages publiés du bord (z_f - z) ; repli quand le balayage ne trouve rien
REFERENCE_EDGE_OFFSETS: Dict[int, float] = {
    120: 0.124,
    150: 0.139,
    180: 0.151,
    210: 0.160,
    240: 0.176,
    280: 0.183,
    360: 0.190,
    480: 0.194,
}


def fixed_point() -> ClassicalPoint:
    return FIXED_POINTS[0]


def scan_point(z: float, y: Optional[float] = None) -> ClassicalPoint:
    """(x(z), y_f, z) avec x = +sqrt(1 - y_f² - z²)"""
    y = fixed_point().y if y is None else y
    radicand = 1.0 - y * y - z * z
    if radicand < 0:
        raise InvalidPointError(
            f"z={z:.4f} is outside the band reachable with y={y:.4f}", key="z_range"
        )
    return ClassicalPoint.on_sphere(float(np.sqrt(radicand)), y, z)


def edge_state_point(J: int) -> ClassicalPoint:
    """Centre de l'état de bord aux décalages publiés pour J (non calculé)"""
    if J not in REFERENCE_EDGE_OFFSETS:
        raise ConfigError(f"no reference edge offset for J={J}", key="J")
    return scan_point(fixed_point().z - REFERENCE_EDGE_OFFSETS[J])


UNCLASSIFIED = "unclassified"


@dataclass(frozen=True)
class EdgeScanPoint:
    """Résultat d'un état du balayage ; decay vaut None si la classification a échoué"""

    z: float
    decay: Optional[DecayClass]
    fit: Optional[QExpFit] = None
    error: Optional[str] = None

    def __post_init__(self) -> None:
        if (self.decay is None) == (self.error is None):
            raise FitError("a scan point carries either a decay class or an error")

    @property
    def classified(self) -> bool:
        return self.decay is not None

    @property
    def stretch_decades(self) -> float:
        return self.decay.stretch_decades if self.decay is not None else 0.0

    def label(self) -> str:
        return self.decay.label() if self.decay is not None else UNCLASSIFIED

    @property
    def kind(self) -> str:
        return self.decay.kind.value if self.decay is not None else UNCLASSIFIED

    @property
    def q_rel(self) -> Optional[float]:
        return self.decay.q_rel if self.decay is not None else None


@dataclass
class EdgeScanResult:
    J: int
    alpha: float
    delta: float
    points: List[EdgeScanPoint]
    edge_z: float
    edge_offset: float

    @property
    def edge(self) -> EdgeScanPoint:
        return next(p for p in self.points if p.z == self.edge_z)

    @property
    def edge_point(self) -> ClassicalPoint:
        return scan_point(self.edge_z)


def scan_grid(
    z_range: Optional[Tuple[float, float]] = None,
    z_step: float = DEFAULT_Z_STEP,
    descending: bool = True,
) -> np.ndarray:
    """z de z_f vers la mer chaotique (décroissant par défaut)"""
    z_f = fixed_point().z
    lo, hi = z_range if z_range is not None else (z_f - DEFAULT_BAND, z_f)
    if z_step <= 0:
        raise ConfigError(f"z_step must be positive, got {z_step}", key="z_step")
    if lo > hi:
        lo, hi = hi, lo
    count = int(np.floor((hi - lo) / z_step + 1e-9)) + 1
    zs = np.round(lo + z_step * np.arange(count), 12)
    return zs[::-1] if descending else zs


def _evaluate_chunk(
    spec: KickedTopSpec,
    zs: Sequence[float],
    n_steps: int,
    tail_fraction: float,
    q_grid: Tuple[float, float, float],
) -> List[Tuple[float, OverlapSeries, EdgeScanPoint]]:
    decomp = parity_basis(spec.J)
    points = [scan_point(z) for z in zs]
    states = [project_oo(coherent_state_at(spec.J, p), decomp) for p in points]
    series = fidelity_batch(spec, states, n_steps, [(p.x, p.y, p.z) for p in points])
    results = []
    for z, s in zip(zs, series):
        try:
            decay = classify_decay(s, tail_fraction, q_grid)
        except NumericalError as exc:
            console.warning(f"z={z:.4f}: classification failed ({exc})")
            point = EdgeScanPoint(float(z), None, error=str(exc))
        else:
            point = EdgeScanPoint(float(z), decay, decay.qexp)
        results.append((float(z), s, point))
    return results


def scan_points(
    J: int,
    alpha: float,
    delta: float,
    zs: Sequence[float],
    n_steps: int = 3000,
    workers: int = 1,
    tail_fraction: float = 0.2,
    q_grid: Tuple[float, float, float] = DEFAULT_Q_GRID,
) -> List[Tuple[float, OverlapSeries, EdgeScanPoint]]:
    """Évalue chaque z ; découpage fixe en blocs, indépendant du nombre de workers"""
    spec = KickedTopSpec(J, alpha, delta)
    chunks = [list(zs[i : i + CHUNK_SIZE]) for i in range(0, len(zs), CHUNK_SIZE)]
    if workers <= 1 or len(chunks) <= 1:
        parts = [_evaluate_chunk(spec, c, n_steps, tail_fraction, q_grid) for c in chunks]
    else:
        # le cache des blocs de Floquet est rempli avant la distribution
        parity_basis(J)
        oo_floquet(J, alpha)
        oo_floquet(J, alpha + delta)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(
                pool.map(
                    lambda c: _evaluate_chunk(spec, c, n_steps, tail_fraction, q_grid),
                    chunks,
                )
            )
    merged = {z: (z, s, d) for part in parts for z, s, d in part}
    return [merged[float(z)] for z in zs]


def scan_edge(
    J: int,
    alpha: float = 3.0,
    delta: float = 0.01,
    z_range: Optional[Tuple[float, float]] = None,
    z_step: float = DEFAULT_Z_STEP,
    n_steps: int = 3000,
    workers: int = 1,
    descending: bool = True,
    tail_fraction: float = 0.2,
    q_grid: Tuple[float, float, float] = DEFAULT_Q_GRID,
) -> EdgeScanResult:
    zs = scan_grid(z_range, z_step, descending)
    for z in (zs[0], zs[-1]):
        scan_point(float(z))
    console.info(
        f"edge scan J={J} alpha={alpha} delta={delta}: {len(zs)} states "
        f"z in [{zs.min():.4f}, {zs.max():.4f}]"
    )
    evaluated = scan_points(J, alpha, delta, zs, n_steps, workers, tail_fraction, q_grid)
    points = [point for _, _, point in evaluated]
    for p in points:
        console.debug(f"  z={p.z:.4f}: {p.label()}")
    failed = sum(not p.classified for p in points)
    if failed:
        console.warning(f"{failed} of {len(points)} states left unclassified")

    candidates = [
        p for p in points if p.decay is not None and p.decay.kind is DecayKind.POWER_LAW
    ]
    if not candidates:
        raise EdgeNotFoundError(
            f"no power-law decay found for J={J} over z in [{zs.min():.4f}, {zs.max():.4f}]",
            [(p.z, p.label()) for p in points],
        )
    z_f = fixed_point().z
    edge = max(candidates, key=lambda p: (round(p.stretch_decades, 9), -abs(z_f - p.z)))
    console.success(
        f"edge J={J}: z={edge.z:.4f} (z_f - {z_f - edge.z:.3f}), q_rel={edge.q_rel:.3f}"
    )
    return EdgeScanResult(J, alpha, delta, points, edge.z, float(z_f - edge.z))


# --- balayage en δ ---------------------------------------------------------


@dataclass(frozen=True)
class DeltaSweepPoint:
    delta: float
    fit: Optional[QExpFit] = None
    error: Optional[str] = None


@dataclass
class DeltaSweepResult:
    J: int
    edge_state: Tuple[float, float, float]
    points: List[DeltaSweepPoint]
    delta_c: float
    q_rel_c: Optional[float]
    q_rel_s: Optional[float]
    delta_s: Optional[float]
    tau_slope: Optional[float]
    series: Dict[float, OverlapSeries] = field(default_factory=dict, repr=False)

    @property
    def deltas(self) -> List[float]:
        return [p.delta for p in self.points]

    @property
    def fitted(self) -> List[DeltaSweepPoint]:
        return [p for p in self.points if p.fit is not None]

    @property
    def q_rel(self) -> List[float]:
        return [p.fit.q_rel for p in self.fitted if p.fit is not None]

    @property
    def tau(self) -> List[float]:
        return [p.fit.tau for p in self.fitted if p.fit is not None]

    @property
    def slope_defined(self) -> bool:
        return self.tau_slope is not None

    @property
    def saturation_detected(self) -> bool:
        return self.q_rel_s is not None


@dataclass(frozen=True)
class SweepSummary:
    q_rel_c: Optional[float]
    q_rel_s: Optional[float]
    delta_s: Optional[float]
    tau_slope: Optional[float]


def summarize_sweep(
    deltas: Sequence[float], fits: Sequence[Optional[QExpFit]], delta_c: float
) -> SweepSummary:
    """q_rel^c (moyenne sous δ_c), plateau terminal q_rel^s, pente log-log de τ(δ)"""
    pairs = [(d, f) for d, f in zip(deltas, fits) if f is not None]
    below = [f.q_rel for d, f in pairs if d < delta_c]
    q_rel_c = float(np.mean(below)) if below else None

    q_rel_s = delta_s = None
    tail = [(d, f) for d, f in pairs if d > delta_c][-PLATEAU_POINTS:]
    if len(tail) == PLATEAU_POINTS:
        values = np.array([f.q_rel for _, f in tail])
        if np.all(np.abs(values - values.mean()) <= PLATEAU_SPREAD):
            q_rel_s, delta_s = float(values.mean()), float(tail[0][0])

    tau_slope = None
    if len(pairs) >= 2:
        log_d = np.log([d for d, _ in pairs])
        log_tau = np.log([f.tau for _, f in pairs])
        if np.ptp(log_d) > 0:
            tau_slope = float(scipy.stats.linregress(log_d, log_tau).slope)
    return SweepSummary(q_rel_c, q_rel_s, delta_s, tau_slope)


def delta_sweep(
    J: int,
    alpha: float,
    edge_state: ClassicalPoint,
    deltas: Sequence[float],
    n_steps: int = 3000,
    windows: Optional[Dict[float, Tuple[float, float]]] = None,
    tail_fraction: float = 0.2,
    q_grid: Tuple[float, float, float] = DEFAULT_Q_GRID,
) -> DeltaSweepResult:
    """q_rel(δ) et τ(δ) pour l'état de bord ; un échec d'ajustement n'arrête pas le balayage"""
    if not deltas:
        raise ConfigError("delta sweep needs at least one perturbation strength", key="deltas")
    ordered = [float(d) for d in deltas]
    if any(b <= a for a, b in zip(ordered, ordered[1:])):
        raise ConfigError("deltas must be strictly increasing", key="deltas")
    windows = windows or {}
    decomp = parity_basis(J)
    initial = project_oo(coherent_state_at(J, edge_state), decomp)
    point = (edge_state.x, edge_state.y, edge_state.z)
    delta_c = critical_perturbation(KickedTopSpec(J, alpha).n_oo)
    console.info(f"delta sweep J={J}: {len(ordered)} perturbations, delta_c={delta_c:.3e}")

    points: List[DeltaSweepPoint] = []
    series_by_delta: Dict[float, OverlapSeries] = {}
    for delta in ordered:
        series = fidelity_series(KickedTopSpec(J, alpha, delta), initial, n_steps, point)
        series_by_delta[delta] = series
        try:
            window = windows.get(delta) or loglog_stretch(
                series,
                pre_plateau_region(series, tail_fraction),
                baseline=decay_baseline(series, tail_fraction),
            )
            if window is None:
                raise FitError("no power-law window found")
            fit = fit_qexp(series, window, 2, q_grid)
        except PyqktError as exc:
            console.warning(f"delta={delta:.4g}: fit failed ({exc})")
            points.append(DeltaSweepPoint(delta, error=str(exc)))
        else:
            console.debug(f"delta={delta:.4g}: q_rel={fit.q_rel:.3f} tau={fit.tau:.4g}")
            points.append(DeltaSweepPoint(delta, fit))

    summary = summarize_sweep(ordered, [p.fit for p in points], delta_c)
    if summary.tau_slope is None:
        console.warning("tau slope undefined (fewer than two fitted perturbations)")
    if summary.q_rel_s is None:
        console.info("no saturation detected in the sweep")
    return DeltaSweepResult(
        J,
        point,
        points,
        delta_c,
        summary.q_rel_c,
        summary.q_rel_s,
        summary.delta_s,
        summary.tau_slope,
        series_by_delta,
    )


# --- tableau récapitulatif -------------------------------------------------


@dataclass(frozen=True)
class Table1Row:
    J: int
    edge_offset: float
    delta_c: float
    q_rel_c: Optional[float]


@dataclass
class Table1Result:
    rows: List[Table1Row]
    failures: Dict[int, str]

    @property
    def q_rel_c_vs_inverse_J(self) -> List[Tuple[float, float]]:
        return [(1.0 / r.J, r.q_rel_c) for r in self.rows if r.q_rel_c is not None]

    @property
    def edge_offset_vs_inverse_J(self) -> List[Tuple[float, float]]:
        return [(r.edge_offset, 1.0 / r.J) for r in self.rows]


def sub_critical_deltas(delta_c: float, count: int = 4) -> List[float]:
    """Perturbations log-espacées nettement sous δ_c"""
    return [float(d) for d in delta_c * np.geomspace(0.15, 0.6, count)]


def table1(
    J_list: Sequence[int],
    alpha: float = 3.0,
    scan_delta: float = 0.01,
    n_steps: int = 3000,
    z_range: Optional[Tuple[float, float]] = None,
    z_step: float = DEFAULT_Z_STEP,
    workers: int = 1,
) -> Table1Result:
    """Bord, δ_c et q_rel^c pour chaque J ; les échecs par J sont consignés"""
    rows: List[Table1Row] = []
    failures: Dict[int, str] = {}
    for J in J_list:
        try:
            spec = KickedTopSpec(J, alpha, scan_delta)
            scan = scan_edge(J, alpha, scan_delta, z_range, z_step, n_steps, workers)
            stats = perturbation_stats(spec)
            sweep = delta_sweep(
                J, alpha, scan.edge_point, sub_critical_deltas(stats.delta_c), n_steps
            )
        except PyqktError as exc:
            console.warning(f"J={J}: row failed ({exc})")
            failures[int(J)] = str(exc)
            continue
        rows.append(Table1Row(int(J), scan.edge_offset, stats.delta_c, sweep.q_rel_c))
    return Table1Result(rows, failures)
