"""
Graphiques SVG de contrôle rapide (backend Agg, sans fenêtre)
"""
from pathlib import Path
from typing import Mapping, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .evolution import OverlapSeries  # noqa: E402
from .io import ManifestEntry, PathLike, file_sha256  # noqa: E402

# identifiants SVG stables d'une exécution à l'autre
plt.rcParams["svg.hashsalt"] = "pyqkt"


def _save(fig: "plt.Figure", path: PathLike, rows: int) -> ManifestEntry:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return ManifestEntry(str(path), file_sha256(path), rows)


def plot_series(
    series: Mapping[str, OverlapSeries],
    path: PathLike,
    loglog: bool = False,
    title: Optional[str] = None,
) -> ManifestEntry:
    """O(t) pour chaque série, axes linéaires ou log-log"""
    fig, ax = plt.subplots(figsize=(6, 4))
    rows = 0
    for label, s in series.items():
        t, v = s.steps.astype(float), s.values
        if loglog:
            mask = (t > 0) & (v > 0)
            ax.loglog(t[mask], v[mask], lw=1, label=label)
        else:
            ax.plot(t, v, lw=1, label=label)
        rows += len(s)
    ax.set_xlabel("t")
    ax.set_ylabel("O(t)")
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend(frameon=False)
    fig.tight_layout()
    return _save(fig, path, rows)


def plot_points(
    layers: Mapping[str, Tuple[np.ndarray, np.ndarray]],
    path: PathLike,
    title: Optional[str] = None,
    limits: Sequence[float] = (-1.5, 1.5),
) -> ManifestEntry:
    """Nuages de points projetés (px, pz), une couche par étiquette"""
    fig, ax = plt.subplots(figsize=(5, 5))
    rows = 0
    for label, (px, pz) in layers.items():
        ax.scatter(px, pz, s=1, label=label)
        rows += len(px)
    ax.set_xlim(*limits)
    ax.set_ylim(*limits)
    ax.set_aspect("equal")
    ax.set_xlabel("X")
    ax.set_ylabel("Z")
    if title:
        ax.set_title(title)
    if len(layers) > 1:
        ax.legend(frameon=False, markerscale=6)
    fig.tight_layout()
    return _save(fig, path, rows)
