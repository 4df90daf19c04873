"""
Écriture des résultats : CSV / JSON à 12 chiffres significatifs, manifeste
de fichiers avec empreintes SHA-256 et enregistrement d'exécution.
"""
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .errors import ConfigError, DimensionMismatchError, OutputError
from .evolution import OverlapSeries, SeriesMeta

SIGNIFICANT = 12
FLOAT_FORMAT = f"%.{SIGNIFICANT}g"
SERIES_COLUMNS = ("t", "overlap")
TABLE1_COLUMNS = ("J", "edge_offset", "delta_c", "q_rel_c")

PathLike = Union[str, Path]


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    sha256: str
    rows: int


def file_sha256(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def round_significant(value: Any) -> Any:
    """Arrondi à 12 chiffres significatifs, identique à l'écriture CSV"""
    if isinstance(value, (bool, np.bool_)) or value is None:
        return None if value is None else bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return None if not math.isfinite(v) else float(FLOAT_FORMAT % v)
    return value


def to_json_ready(value: Any) -> Any:
    """Convertit récursivement numpy / dataclasses / enums en types JSON"""
    if hasattr(value, "__dataclass_fields__"):
        return to_json_ready(asdict(value))
    if isinstance(value, Mapping):
        return {str(k): to_json_ready(v) for k, v in value.items()}
    if isinstance(value, np.ndarray):
        return [to_json_ready(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [to_json_ready(v) for v in value]
    if isinstance(value, Enum):
        return value.value
    return round_significant(value)


def write_json(payload: Any, path: PathLike) -> ManifestEntry:
    path = Path(path)
    data = to_json_ready(payload)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            json.dump(data, handle, indent=2, sort_keys=True)
            handle.write("\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    rows = len(data.get("rows", [])) if isinstance(data, dict) else 0
    return ManifestEntry(str(path), file_sha256(path), rows)


def write_frame(frame: pd.DataFrame, path: PathLike) -> ManifestEntry:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return ManifestEntry(str(path), file_sha256(path), len(frame))


def series_frame(series: OverlapSeries) -> pd.DataFrame:
    return pd.DataFrame(
        {SERIES_COLUMNS[0]: series.steps.astype(int), SERIES_COLUMNS[1]: series.values}
    )


def table1_frame(rows: Sequence[Any]) -> pd.DataFrame:
    """Lignes (J, edge_offset, delta_c, q_rel_c) ; q_rel_c manquant laissé vide"""
    return pd.DataFrame(
        {
            "J": pd.array([int(r.J) for r in rows], dtype="int64"),
            "edge_offset": [float(r.edge_offset) for r in rows],
            "delta_c": [float(r.delta_c) for r in rows],
            "q_rel_c": [np.nan if r.q_rel_c is None else float(r.q_rel_c) for r in rows],
        },
        columns=list(TABLE1_COLUMNS),
    )


def columns_frame(columns: Mapping[str, Sequence[Any]]) -> pd.DataFrame:
    lengths = {len(v) for v in columns.values()}
    if len(lengths) > 1:
        raise DimensionMismatchError(f"columns have different lengths {sorted(lengths)}")
    return pd.DataFrame({k: list(v) for k, v in columns.items()})


def _as_frame(data: Any) -> pd.DataFrame:
    if isinstance(data, OverlapSeries):
        return series_frame(data)
    if isinstance(data, pd.DataFrame):
        return data
    if isinstance(data, Mapping):
        return columns_frame(data)
    return table1_frame(list(data))


def emit_series(
    data: Any,
    fmt: str,
    path: PathLike,
    meta: Optional[Mapping[str, Any]] = None,
) -> ManifestEntry:
    """Écrit une série, une table ou des colonnes en CSV ou JSON

    Le JSON reprend les colonnes et lignes du CSV et y ajoute les métadonnées
    (celles de la série si aucune n'est fournie).
    """
    frame = _as_frame(data)
    if fmt == "csv":
        return write_frame(frame, path)
    if fmt == "json":
        if meta is None and isinstance(data, OverlapSeries):
            meta = asdict(data.meta)
        payload = {
            "columns": list(frame.columns),
            "rows": [list(row) for row in frame.itertuples(index=False, name=None)],
            "meta": dict(meta or {}),
        }
        return write_json(payload, path)
    raise ConfigError(f"unknown output format {fmt!r}", key="format")


def read_series_csv(path: PathLike) -> OverlapSeries:
    """Relit un CSV `t,overlap` écrit par emit_series"""
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read series {path}: {exc}", key="input") from exc
    if tuple(frame.columns) != SERIES_COLUMNS:
        raise ConfigError(
            f"{path}: expected header {','.join(SERIES_COLUMNS)}, "
            f"got {','.join(map(str, frame.columns))}",
            key="input",
        )
    return OverlapSeries(
        frame["t"].to_numpy(dtype=int),
        frame["overlap"].to_numpy(dtype=float),
        SeriesMeta(),
    )


@dataclass
class RunRecord:
    config: Dict[str, Any]
    version: str
    wall_time: float
    manifest: List[ManifestEntry] = field(default_factory=list)

    def write(self, path: PathLike) -> Path:
        path = Path(path)
        payload = {
            "config": self.config,
            "version": self.version,
            "wall_time": self.wall_time,
            "manifest": [asdict(entry) for entry in self.manifest],
        }
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(to_json_ready(payload), indent=2, sort_keys=True) + "\n")
        return path

    @classmethod
    def read(cls, path: PathLike) -> "RunRecord":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            data["config"],
            data["version"],
            float(data["wall_time"]),
            [ManifestEntry(**entry) for entry in data["manifest"]],
        )

    def mismatches(self) -> List[str]:
        bad = []
        for entry in self.manifest:
            p = Path(entry.path)
            if not p.is_file() or file_sha256(p) != entry.sha256:
                bad.append(entry.path)
        return bad

    def verify(self) -> bool:
        """Vrai si chaque fichier du manifeste existe avec la même empreinte"""
        return not self.mismatches()
