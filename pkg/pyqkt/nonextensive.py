"""
Entropie non extensive, couple ln_q / e_q et ajustements de décroissance

Les ajustements q-exponentiels linéarisent les données : ln_q O contre t^p est
une droite de pente -1/τ^p pour le bon q. On cherche q sur une grille en
maximisant le R² de la régression, puis on raffine par section dorée.

Conventions :
  - 0 ln 0 = 0 dans l'entropie de Shannon ;
  - e_q(x) = 0 quand 1 + (1 - q) x < 0 (coupure q-exponentielle) ; à base
    nulle, e_q vaut 0 pour q < 1 et +inf pour q > 1.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Optional, Sequence, Tuple

import numpy as np
import scipy.optimize
import scipy.special
import scipy.stats

from .console import console
from .errors import DomainError, FitError, InsufficientDataError

if TYPE_CHECKING:
    from .evolution import OverlapSeries

Q_ONE_TOL = 1e-9
DEFAULT_Q_GRID: Tuple[float, float, float] = (1.05, 8.0, 0.05)
DEFAULT_Q_SEN_GRID: Tuple[float, float, float] = (-1.0, 0.95, 0.05)
MIN_FIT_POINTS = 5
MIN_CLASSIFY_POINTS = 50
REGULAR_THRESHOLD = 0.9
REGULAR_PLATEAU = 0.8
ONSET_LEVEL = 0.9
MAX_ELASTICITY = 0.75


@dataclass(frozen=True)
class ProbabilityDistribution:
    probs: np.ndarray
    k: float = 1.0

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", probs)
        if probs.ndim != 1 or probs.size == 0:
            raise DomainError("probabilities must be a non-empty vector")
        if np.any(probs < 0):
            raise DomainError("probabilities must be non-negative")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise DomainError(f"probabilities sum to {probs.sum():.15f}, not 1")
        if self.k <= 0:
            raise DomainError(f"entropy constant k must be positive, got {self.k}")

    @property
    def W(self) -> int:
        return int(self.probs.size)


def product_distribution(
    a: ProbabilityDistribution, b: ProbabilityDistribution
) -> ProbabilityDistribution:
    """Distribution jointe de deux systèmes indépendants"""
    joint = np.outer(a.probs, b.probs).ravel()
    # renormalise l'arrondi du produit
    return ProbabilityDistribution(joint / joint.sum(), k=a.k)


def s_q(dist: ProbabilityDistribution, q: float) -> float:
    """Entropie S_q ; branche de Shannon pour |q - 1| < 1e-9"""
    p = dist.probs
    if abs(q - 1.0) < Q_ONE_TOL:
        return float(-dist.k * np.sum(scipy.special.xlogy(p, p)))
    nonzero = p[p > 0]
    return float(dist.k * (1.0 - np.sum(nonzero**q)) / (q - 1.0))


def ln_q(x: "np.ndarray | float", q: float) -> "np.ndarray | float":
    values = np.asarray(x, dtype=float)
    if np.any(values <= 0):
        raise DomainError("ln_q is only defined for positive arguments")
    if abs(q - 1.0) < Q_ONE_TOL:
        result = np.log(values)
    else:
        result = (values ** (1.0 - q) - 1.0) / (1.0 - q)
    return float(result) if np.ndim(x) == 0 else result


def e_q(x: "np.ndarray | float", q: float) -> "np.ndarray | float":
    values = np.asarray(x, dtype=float)
    if abs(q - 1.0) < Q_ONE_TOL:
        result = np.exp(values)
    else:
        base = 1.0 + (1.0 - q) * values
        # base nulle : 0 pour q < 1, +inf pour q > 1 ; base négative : 0
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            result = np.where(base >= 0, np.abs(base) ** (1.0 / (1.0 - q)), 0.0)
    return float(result) if np.ndim(x) == 0 else result


# --- ajustements -----------------------------------------------------------


@dataclass(frozen=True)
class QExpFit:
    q_rel: float
    tau: float
    window: Tuple[float, float]
    time_power: int
    linearity: float
    intercept: float = 0.0
    growth: bool = False

    def __post_init__(self) -> None:
        if not self.growth and self.q_rel <= 1.0:
            raise FitError(f"relaxation index must exceed 1, got {self.q_rel}")
        if not self.tau > 0:
            raise FitError(f"relaxation time must be positive, got {self.tau}")
        if not self.window[0] < self.window[1]:
            raise FitError(f"empty fit window {self.window}")

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        x = (np.asarray(t, dtype=float) / self.tau) ** self.time_power
        return e_q(x if self.growth else -x, self.q_rel)


@dataclass(frozen=True)
class ExponentialFit:
    rate: float
    window: Tuple[float, float]
    linearity: float


@dataclass(frozen=True)
class GaussianFit:
    width: float
    window: Tuple[float, float]
    linearity: float


def _r_squared(x: np.ndarray, y: np.ndarray) -> Tuple[float, float, float]:
    """(pente, ordonnée, R²) de la régression linéaire de y sur x"""
    if np.ptp(x) == 0:
        raise FitError("regression abscissa is constant")
    result = scipy.stats.linregress(x, y)
    r2 = float(result.rvalue**2) if np.isfinite(result.rvalue) else 0.0
    if np.ptp(y) == 0:
        r2 = 1.0
    return float(result.slope), float(result.intercept), min(max(r2, 0.0), 1.0)


def _select(
    t: np.ndarray, values: np.ndarray, window: Optional[Tuple[float, float]]
) -> Tuple[np.ndarray, np.ndarray, Tuple[float, float]]:
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is None:
        window = (float(t[0]), float(t[-1]))
    lo, hi = float(window[0]), float(window[1])
    if lo >= hi:
        raise FitError(f"fit window {window} is empty")
    mask = (t >= lo) & (t <= hi)
    if mask.sum() < MIN_FIT_POINTS:
        raise FitError(
            f"fit window {window} holds {int(mask.sum())} points, "
            f"at least {MIN_FIT_POINTS} required"
        )
    ts, vs = t[mask], values[mask]
    if np.any(vs <= 0):
        raise FitError("fit window contains non-positive values")
    return ts, vs, (lo, hi)


def fit_at_q(
    t: np.ndarray,
    values: np.ndarray,
    q: float,
    window: Optional[Tuple[float, float]] = None,
    time_power: int = 2,
) -> Tuple[float, float, float]:
    """Régression de ln_q(values) sur t^p à q fixé : (pente, ordonnée, R²)"""
    ts, vs, _ = _select(t, values, window)
    return _r_squared(ts**time_power, ln_q(vs, q))


def _q_candidates(q_grid: Tuple[float, float, float]) -> np.ndarray:
    lo, hi, step = q_grid
    if step <= 0 or hi <= lo:
        raise FitError(f"invalid q grid {q_grid}")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


def _search_q(
    x: np.ndarray, vs: np.ndarray, q_grid: Tuple[float, float, float]
) -> Tuple[float, float]:
    """Meilleur q (R² maximal) : grille puis section dorée autour du maximum"""

    def score(q: float) -> float:
        try:
            return _r_squared(x, ln_q(vs, q))[2]
        except FitError:
            return 0.0

    candidates = _q_candidates(q_grid)
    with np.errstate(over="ignore", invalid="ignore"):
        scores = np.array([score(q) for q in candidates])
    best = int(np.nanargmax(scores))
    q_best, r2_best = float(candidates[best]), float(scores[best])
    if 0 < best < len(candidates) - 1:
        bracket = (candidates[best - 1], candidates[best], candidates[best + 1])
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                refined = scipy.optimize.minimize_scalar(
                    lambda q: -score(q), bracket=bracket, method="golden", tol=1e-6
                )
        except ValueError:
            refined = None
        if refined is not None and refined.success:
            q_ref = float(refined.x)
            if bracket[0] <= q_ref <= bracket[2] and -refined.fun >= r2_best:
                q_best, r2_best = q_ref, float(-refined.fun)
    return q_best, r2_best


def fit_qexp_arrays(
    t: np.ndarray,
    values: np.ndarray,
    window: Optional[Tuple[float, float]] = None,
    time_power: int = 2,
    q_grid: Tuple[float, float, float] = DEFAULT_Q_GRID,
    growth: bool = False,
) -> QExpFit:
    if time_power not in (1, 2):
        raise FitError(f"time_power must be 1 or 2, got {time_power}")
    ts, vs, window = _select(t, values, window)
    x = ts**time_power
    q_best, r2 = _search_q(x, vs, q_grid)
    slope, intercept, r2 = _r_squared(x, ln_q(vs, q_best))
    sign = 1.0 if growth else -1.0
    if not sign * slope > 0:
        raise FitError(
            f"linearised slope {slope:.3e} has the wrong sign for a "
            f"{'growth' if growth else 'decay'} fit"
        )
    tau = float((sign / slope) ** (1.0 / time_power))
    fit = QExpFit(q_best, tau, window, time_power, r2, intercept, growth)
    console.debug(
        f"q-exp fit window={window} p={time_power}: q={q_best:.4f} tau={tau:.4g} R2={r2:.6f}"
    )
    return fit


def fit_qexp(
    series: "OverlapSeries",
    window: Optional[Tuple[float, float]] = None,
    time_power: int = 2,
    q_grid: Tuple[float, float, float] = DEFAULT_Q_GRID,
) -> QExpFit:
    """Ajuste O(t) = e_q(-(t/τ)^p) ; p = 2 pour le recouvrement"""
    return fit_qexp_arrays(series.steps, series.values, window, time_power, q_grid)


def fit_qexp_growth(
    t: np.ndarray,
    values: np.ndarray,
    window: Optional[Tuple[float, float]] = None,
    time_power: int = 1,
    q_grid: Tuple[float, float, float] = DEFAULT_Q_SEN_GRID,
) -> QExpFit:
    """Ajuste une croissance ξ(t) = e_q((t/τ)^p) ; λ_q = 1/τ pour p = 1"""
    return fit_qexp_arrays(t, values, window, time_power, q_grid, growth=True)


def fit_exponential(
    series: "OverlapSeries",
    window: Optional[Tuple[float, float]] = None,
    baseline: float = 0.0,
) -> ExponentialFit:
    """Régression de ln(O - baseline) sur t"""
    ts, vs, window = _select(series.steps, series.values - baseline, window)
    slope, _, r2 = _r_squared(ts, np.log(vs))
    return ExponentialFit(max(-slope, 0.0), window, r2)


def fit_gaussian(
    series: "OverlapSeries",
    window: Optional[Tuple[float, float]] = None,
    baseline: float = 0.0,
) -> GaussianFit:
    """Régression de ln(O - baseline) sur t²"""
    ts, vs, window = _select(series.steps, series.values - baseline, window)
    slope, _, r2 = _r_squared(ts**2, np.log(vs))
    return GaussianFit(max(-slope, 0.0), window, r2)


# --- classification --------------------------------------------------------


class DecayKind(str, Enum):
    REGULAR = "regular"
    GAUSSIAN = "gaussian"
    EXPONENTIAL = "exponential"
    POWER_LAW = "power_law"


@dataclass(frozen=True)
class DecayClass:
    kind: DecayKind
    q_rel: Optional[float] = None
    qexp: Optional[QExpFit] = field(default=None, compare=False)
    gaussian: Optional[GaussianFit] = field(default=None, compare=False)
    exponential: Optional[ExponentialFit] = field(default=None, compare=False)
    stretch: Optional[Tuple[float, float]] = None
    baseline: float = field(default=0.0, compare=False)

    def __post_init__(self) -> None:
        if (self.kind is DecayKind.POWER_LAW) != (self.q_rel is not None):
            raise FitError("q_rel is set exactly for power-law decays")

    @property
    def stretch_decades(self) -> float:
        if self.stretch is None:
            return 0.0
        return float(np.log10(self.stretch[1] / self.stretch[0]))

    def label(self) -> str:
        if self.kind is DecayKind.POWER_LAW:
            return f"power_law({self.q_rel:.3f})"
        return self.kind.value


def decay_baseline(series: "OverlapSeries", tail_fraction: float = 0.2) -> float:
    """Plateau à retrancher avant les ajustements ; 0 tant que la queue décroît"""
    from .evolution import settled_plateau

    level = settled_plateau(series, tail_fraction)
    return max(level, 0.0) if level is not None else 0.0


def pre_plateau_region(
    series: "OverlapSeries", tail_fraction: float = 0.2
) -> Tuple[float, float]:
    """De t = 1 jusqu'à l'entrée dans le plateau

    Sans plateau atteint (queue encore décroissante) la région couvre toute la
    série. Sinon elle s'arrête au premier t où O - P <= min(P, (1 - P)/2), ce
    qui revient à O <= 2P pour les plateaux bas.
    """
    from .evolution import settled_plateau

    level = settled_plateau(series, tail_fraction)
    end = len(series.values)
    if level is not None:
        margin = min(level, 0.5 * (1.0 - level))
        below = np.nonzero(series.values - level <= margin)[0]
        if below.size:
            end = int(below[0])
    end = max(end, MIN_FIT_POINTS + 1)
    return float(series.steps[1]), float(series.steps[min(end, len(series.steps)) - 1])


def _decay_body(series: "OverlapSeries", region: Tuple[float, float]) -> Tuple[float, float]:
    """Partie de la région après le départ (O <= ONSET_LEVEL)"""
    t, v = series.steps, series.values
    started = np.nonzero((t >= region[0]) & (t <= region[1]) & (v <= ONSET_LEVEL))[0]
    if started.size == 0:
        return region
    body = (float(t[started[0]]), region[1])
    if np.count_nonzero((t >= body[0]) & (t <= body[1])) < MIN_FIT_POINTS:
        return region
    return body


class _WindowRegression:
    """Régressions linéaires en O(1) sur des plages d'indices contiguës"""

    def __init__(self, x: np.ndarray, y: np.ndarray) -> None:
        self.x = x
        self._sums = [
            np.concatenate(([0.0], np.cumsum(a))) for a in (x, y, x * x, y * y, x * y)
        ]

    def fit(self, i: int, j: int) -> Tuple[float, float]:
        """(pente, R²) sur les indices i..j inclus"""
        n = j - i + 1
        sx, sy, sxx, syy, sxy = (s[j + 1] - s[i] for s in self._sums)
        cxx = sxx - sx * sx / n
        cyy = syy - sy * sy / n
        cxy = sxy - sx * sy / n
        if cxx <= 0:
            return 0.0, 0.0
        slope = cxy / cxx
        r2 = 1.0 if cyy <= 0 else min(max(cxy * cxy / (cxx * cyy), 0.0), 1.0)
        return float(slope), float(r2)


def loglog_stretch(
    series: "OverlapSeries",
    region: Optional[Tuple[float, float]] = None,
    r2_min: float = 0.98,
    min_decades: float = 0.5,
    max_elasticity: float = MAX_ELASTICITY,
    baseline: float = 0.0,
) -> Optional[Tuple[float, float]]:
    """Plus longue fenêtre où ln(O - baseline) est linéaire en ln t

    Une fenêtre est acceptée si la régression a un R² >= r2_min, si elle couvre
    au moins `min_decades` décades et si la pente locale s varie lentement :
    l'élasticité d ln|s| / d ln t, estimée entre les deux moitiés de la
    fenêtre, reste sous `max_elasticity`. Elle vaut 1 pour une exponentielle,
    2 pour une gaussienne et 2/(1 + (q-1)(t/τ)²) pour une q-exponentielle.
    Les bornes sont prises sur une grille géométrique de 20 points par décade.
    """
    t = np.asarray(series.steps, dtype=float)
    v = np.asarray(series.values, dtype=float) - baseline
    lo, hi = region if region is not None else (1.0, float(t[-1]))
    lo = max(lo, 1.0)
    mask = (t >= lo) & (t <= hi) & (v > 0)
    if mask.sum() < MIN_FIT_POINTS or hi <= lo:
        return None
    ts = t[mask]
    regression = _WindowRegression(np.log10(ts), np.log(v[mask]))
    lt = regression.x
    # indices des bornes sur la grille géométrique
    grid = np.arange(lt[0], lt[-1] + 1e-12, 0.05)
    cuts = np.unique(np.searchsorted(lt, grid))
    best: Optional[Tuple[float, float]] = None
    best_span = 0.0

    def acceptable(i: int, j: int) -> bool:
        if j - i + 1 < MIN_FIT_POINTS:
            return False
        slope, r2 = regression.fit(i, j)
        if r2 < r2_min or slope >= 0:
            return False
        mid = int(np.searchsorted(lt, 0.5 * (lt[i] + lt[j])))
        if mid - i < 3 or j - mid + 1 < 3:
            return False
        s1, _ = regression.fit(i, mid)
        s2, _ = regression.fit(mid, j)
        if s1 >= 0 or s2 >= 0:
            return False
        # centres des moitiés en ln t
        gap = 0.5 * (lt[j] - lt[i]) * np.log(10.0)
        return abs(np.log(s2 / s1)) <= max_elasticity * gap

    last = len(lt) - 1
    ends = [c for c in cuts if c <= last]
    if ends[-1] != last:
        ends.append(last)
    for i in ends:
        if lt[last] - lt[i] <= best_span:
            break
        for j in reversed(ends):
            span = lt[j] - lt[i]
            if span < min_decades or span <= best_span:
                break
            if acceptable(i, j):
                best, best_span = (float(ts[i]), float(ts[j])), span
                break
    return best


def _power_law_fit(
    series: "OverlapSeries",
    stretch: Tuple[float, float],
    baseline: float,
    q_grid: Tuple[float, float, float],
) -> Optional[QExpFit]:
    """q-exponentielle sur la fenêtre, retenue si elle bat exp et gaussienne"""
    try:
        qexp = fit_qexp(series, stretch, 2, q_grid)
        rivals = max(
            fit_exponential(series, stretch, baseline).linearity,
            fit_gaussian(series, stretch, baseline).linearity,
        )
    except FitError as exc:
        console.debug(f"power-law candidate on {stretch} rejected: {exc}")
        return None
    if qexp.q_rel <= q_grid[0] + 0.5 * q_grid[2]:
        console.debug(f"power-law candidate on {stretch} pinned to the q grid floor")
        return None
    if qexp.linearity < rivals:
        console.debug(
            f"power-law candidate on {stretch}: R2={qexp.linearity:.4f} below {rivals:.4f}"
        )
        return None
    return qexp


def classify_decay(
    series: "OverlapSeries",
    tail_fraction: float = 0.2,
    q_grid: Tuple[float, float, float] = DEFAULT_Q_GRID,
    r2_min: float = 0.98,
    min_decades: float = 0.5,
) -> DecayClass:
    """Classe la décroissance : régulière, gaussienne, exponentielle ou loi de puissance

    Régulière si O reste au-dessus de REGULAR_THRESHOLD ou si son plateau ne
    descend pas sous REGULAR_PLATEAU. Sinon le plateau atteint est retranché,
    la loi de puissance exige une fenêtre log-log d'au moins `min_decades`
    décades où la q-exponentielle l'emporte, et à défaut gaussienne et
    exponentielle sont départagées par le R² sur le corps de la décroissance.
    """
    from .evolution import plateau

    if len(series.values) < MIN_CLASSIFY_POINTS:
        raise InsufficientDataError(
            f"classification needs at least {MIN_CLASSIFY_POINTS} points, "
            f"got {len(series.values)}"
        )
    if (
        float(np.min(series.values)) > REGULAR_THRESHOLD
        or plateau(series, tail_fraction) >= REGULAR_PLATEAU
    ):
        return DecayClass(DecayKind.REGULAR)

    baseline = decay_baseline(series, tail_fraction)
    region = pre_plateau_region(series, tail_fraction)
    body = _decay_body(series, region)
    try:
        gaussian = fit_gaussian(series, body, baseline)
        exponential = fit_exponential(series, body, baseline)
    except FitError as exc:
        raise InsufficientDataError(f"decay window {body} unusable: {exc}") from exc

    stretch = loglog_stretch(series, region, r2_min, min_decades, baseline=baseline)
    if stretch is not None:
        qexp = _power_law_fit(series, stretch, baseline, q_grid)
        if qexp is not None:
            return DecayClass(
                DecayKind.POWER_LAW,
                q_rel=qexp.q_rel,
                qexp=qexp,
                gaussian=gaussian,
                exponential=exponential,
                stretch=stretch,
                baseline=baseline,
            )
    kind = (
        DecayKind.GAUSSIAN
        if gaussian.linearity >= exponential.linearity
        else DecayKind.EXPONENTIAL
    )
    return DecayClass(kind, gaussian=gaussian, exponential=exponential, baseline=baseline)
