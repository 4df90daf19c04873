"""
Toupie pulsée classique

Application sur la sphère unité, points fixes, orbites, projection x-z de
l'espace des phases et sensibilité aux conditions initiales à deux trajectoires.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.optimize

from .console import console
from .errors import FitError, InsufficientDataError, InvalidPointError
from .nonextensive import QExpFit, fit_qexp_growth

SPHERE_TOL = 1e-9
# coordonnées de référence données à 7 chiffres
INPUT_TOL = 1e-6
FIXED_POINT_TOL = 1e-10


@dataclass(frozen=True)
class ClassicalPoint:
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        norm = float(np.sqrt(self.x**2 + self.y**2 + self.z**2))
        if not np.isfinite(norm) or abs(norm - 1.0) >= SPHERE_TOL:
            raise InvalidPointError(
                f"point ({self.x}, {self.y}, {self.z}) is not on the unit sphere "
                f"(|p| = {norm:.12f})",
                key="state",
            )

    @classmethod
    def on_sphere(
        cls, x: float, y: float, z: float, tol: float = INPUT_TOL
    ) -> "ClassicalPoint":
        """Normalise des coordonnées fournies à `tol` près"""
        norm = float(np.sqrt(x * x + y * y + z * z))
        if not np.isfinite(norm) or abs(norm - 1.0) > tol:
            raise InvalidPointError(
                f"point ({x}, {y}, {z}) is not on the unit sphere (|p| = {norm:.9f})",
                key="state",
            )
        return cls(x / norm, y / norm, z / norm)

    @classmethod
    def from_array(cls, values: np.ndarray) -> "ClassicalPoint":
        x, y, z = (float(v) for v in values)
        return cls.on_sphere(x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


FIXED_POINT_X = 0.6294126
FIXED_POINT_Y = 0.4557187

FIXED_POINTS: Tuple[ClassicalPoint, ClassicalPoint] = (
    ClassicalPoint.on_sphere(FIXED_POINT_X, FIXED_POINT_Y, FIXED_POINT_X),
    ClassicalPoint.on_sphere(-FIXED_POINT_X, FIXED_POINT_Y, -FIXED_POINT_X),
)

CHAOTIC_SEED = ClassicalPoint.on_sphere(
    0.1, 0.95, float(np.sqrt(1.0 - 0.1**2 - 0.95**2))
)


def _step_array(p: np.ndarray, alpha: float) -> np.ndarray:
    x, y, z = p
    s, c = np.sin(alpha * z), np.cos(alpha * z)
    return np.array([z, x * s + y * c, -x * c + y * s])


def step(p: ClassicalPoint, alpha: float) -> ClassicalPoint:
    x, y, z = _step_array(p.as_array(), alpha)
    return ClassicalPoint(float(x), float(y), float(z))


def orbit_array(p0: ClassicalPoint, alpha: float, n: int) -> np.ndarray:
    """Trajectoire (n+1, 3) sans renormalisation"""
    if n < 1:
        raise InsufficientDataError(f"orbit length must be >= 1, got {n}")
    points = np.empty((n + 1, 3))
    points[0] = p0.as_array()
    for t in range(n):
        points[t + 1] = _step_array(points[t], alpha)
    return points


def orbit(p0: ClassicalPoint, alpha: float, n: int) -> List[ClassicalPoint]:
    return [
        ClassicalPoint(float(x), float(y), float(z))
        for x, y, z in orbit_array(p0, alpha, n)
    ]


def project(p: ClassicalPoint) -> Tuple[float, float]:
    """Projection x-z à aire conservée : facteur R/r = sqrt(2 / (1 + |y|))"""
    scale = np.sqrt(2.0 / (1.0 + abs(p.y)))
    return float(p.x * scale), float(p.z * scale)


def project_many(points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    scale = np.sqrt(2.0 / (1.0 + np.abs(points[:, 1])))
    return points[:, 0] * scale, points[:, 2] * scale


def find_fixed_point(guess: ClassicalPoint, alpha: float) -> ClassicalPoint:
    """Raffine un point fixe d'ordre un à partir d'une estimation

    Accepté sur le résidu complet |f(p) - p| < FIXED_POINT_TOL, quel que soit
    le message de hybr (xtol atteint à la précision machine).
    """

    def point(angles: np.ndarray) -> np.ndarray:
        theta, phi = angles
        return np.array(
            [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
        )

    def residual(angles: np.ndarray) -> np.ndarray:
        p = point(angles)
        return (_step_array(p, alpha) - p)[:2]

    theta0 = float(np.arccos(np.clip(guess.z, -1.0, 1.0)))
    phi0 = float(np.arctan2(guess.y, guess.x))
    solution = scipy.optimize.root(residual, [theta0, phi0], tol=1e-14)
    p = point(solution.x)
    miss = float(np.max(np.abs(_step_array(p, alpha) - p)))
    if not miss < FIXED_POINT_TOL:
        raise FitError(
            f"fixed point search failed: {solution.message} (residual {miss:.2e})"
        )
    return ClassicalPoint.on_sphere(float(p[0]), float(p[1]), float(p[2]))


def _geodesic(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.arctan2(np.linalg.norm(np.cross(a, b)), np.dot(a, b)))


def _tangent(p: np.ndarray) -> np.ndarray:
    reference = np.array([0.0, 0.0, 1.0]) if abs(p[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    t = reference - np.dot(reference, p) * p
    return t / np.linalg.norm(t)


def _displaced(p: np.ndarray, tangent: np.ndarray, d0: float) -> np.ndarray:
    q = np.cos(d0) * p + np.sin(d0) * tangent
    return q / np.linalg.norm(q)


def lyapunov_estimate(
    p0: ClassicalPoint, alpha: float, n: int, d0: float = 1e-9
) -> float:
    """λ1 par renormalisation du voisin à chaque pas (Benettin)"""
    if n < 1:
        raise InsufficientDataError(f"need at least one step, got {n}")
    p = p0.as_array()
    q = _displaced(p, _tangent(p), d0)
    total = 0.0
    for _ in range(n):
        p = _step_array(p, alpha)
        q = _step_array(q, alpha)
        q /= np.linalg.norm(q)
        d = _geodesic(p, q)
        total += np.log(d / d0)
        direction = q - np.dot(q, p) * p
        q = _displaced(p, direction / np.linalg.norm(direction), d0)
    return total / n


@dataclass
class SensitivitySeries:
    steps: np.ndarray
    xi: np.ndarray
    lyapunov: float
    q_sen: Optional[float] = None
    lambda_q_sen: Optional[float] = None
    truncated: bool = False
    growth_fit: Optional[QExpFit] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.xi.size == 0 or abs(self.xi[0] - 1.0) > 1e-9:
            raise InsufficientDataError("sensitivity series must start at xi(0) = 1")
        if np.any(self.xi <= 0):
            raise InsufficientDataError("xi(t) must stay positive")


def sensitivity(
    p0: ClassicalPoint,
    alpha: float,
    n: int,
    d0: float = 1e-9,
    max_separation: float = 0.5,
) -> SensitivitySeries:
    """ξ(t) brut entre deux trajectoires voisines ; tronqué si la séparation dépasse O(1)"""
    if n < 1:
        raise InsufficientDataError(f"need at least one step, got {n}")
    p = p0.as_array()
    q = _displaced(p, _tangent(p), d0)
    xi = [_geodesic(p, q) / d0]
    truncated = False
    for t in range(n):
        p = _step_array(p, alpha)
        q = _step_array(q, alpha)
        q /= np.linalg.norm(q)
        d = _geodesic(p, q)
        if d > max_separation:
            truncated = True
            console.debug(f"sensitivity truncated at t={t + 1}: separation {d:.3f}")
            break
        xi.append(d / d0)
    xi_arr = np.asarray(xi)
    xi_arr[0] = 1.0
    steps = np.arange(xi_arr.size)
    lyapunov = lyapunov_estimate(p0, alpha, n, d0)

    series = SensitivitySeries(steps, xi_arr, lyapunov, truncated=truncated)
    if xi_arr.size >= 5 and xi_arr[-1] > 1.0:
        try:
            fit = fit_qexp_growth(steps, xi_arr, time_power=1)
        except (FitError, InsufficientDataError) as exc:
            console.debug(f"q_sen fit skipped: {exc}")
        else:
            series.growth_fit = fit
            series.q_sen = fit.q_rel
            series.lambda_q_sen = 1.0 / fit.tau
    console.debug(
        f"sensitivity: {xi_arr.size} points, lambda1={lyapunov:.4f}, q_sen={series.q_sen}"
    )
    return series
