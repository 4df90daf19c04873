"""
Configuration des expériences

Priorité : valeurs par défaut < fichier JSON plat < options de la ligne de
commande. Les clés inconnues et les types invalides lèvent ConfigError avec la
clé fautive.
"""
import json
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Tuple, Type, Union

from .errors import ConfigError, UnsupportedSpinError
from .nonextensive import DEFAULT_Q_GRID
from .spin import validate_spin


class ExperimentKind(str, Enum):
    BUILD = "build"
    FIDELITY = "fidelity"
    FIT = "fit"
    CLASSIFY = "classify"
    EDGE_SCAN = "edge_scan"
    DELTA_SWEEP = "delta_sweep"
    TABLE1 = "table1"
    CLASSICAL_ORBIT = "classical_orbit"
    SENSITIVITY = "sensitivity"
    PROJECT = "project"
    REPRODUCE = "reproduce"


class ReproduceTarget(str, Enum):
    FIG1 = "fig1"
    FIG2 = "fig2"
    FIG3 = "fig3"
    FIG4 = "fig4"
    FIG5 = "fig5"
    FIG6 = "fig6"
    TABLE1 = "table1"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"
    BOTH = "both"

    @property
    def extensions(self) -> Tuple[str, ...]:
        return ("csv", "json") if self is OutputFormat.BOTH else (self.value,)


QUANTUM_KINDS = frozenset(
    {
        ExperimentKind.BUILD,
        ExperimentKind.FIDELITY,
        ExperimentKind.EDGE_SCAN,
        ExperimentKind.DELTA_SWEEP,
    }
)
CLASSICAL_KINDS = frozenset(
    {ExperimentKind.CLASSICAL_ORBIT, ExperimentKind.SENSITIVITY, ExperimentKind.PROJECT}
)


@dataclass(frozen=True)
class ExperimentConfig:
    kind: ExperimentKind
    target: Optional[ReproduceTarget] = None
    J: Optional[int] = None
    alpha: float = 3.0
    delta: Optional[float] = None
    deltas: Optional[Tuple[float, ...]] = None
    J_list: Optional[Tuple[int, ...]] = None
    state: Optional[Tuple[float, float, float]] = None
    state_z: Optional[float] = None
    steps: int = 3000
    window: Optional[Tuple[float, float]] = None
    q_grid: Tuple[float, float, float] = DEFAULT_Q_GRID
    z_range: Optional[Tuple[float, float]] = None
    z_step: float = 0.002
    tail_fraction: float = 0.2
    scan_delta: float = 0.01
    orbit_points: int = 10000
    renormalize: bool = True
    workers: int = 1
    input: Optional[str] = None
    out: str = "results"
    format: OutputFormat = OutputFormat.CSV
    plot: bool = False

    def snapshot(self) -> Dict[str, Any]:
        """Vue JSON de la configuration (énumérations par valeur, tuples en listes)"""
        out: Dict[str, Any] = {}
        for key, value in asdict(self).items():
            if isinstance(value, Enum):
                value = value.value
            elif isinstance(value, tuple):
                value = list(value)
            out[key] = value
        return out


# --- coercition ------------------------------------------------------------

Coercer = Callable[[str, Any], Any]


def _scalar(kind: Type[Any]) -> Coercer:
    def coerce(key: str, value: Any) -> Any:
        if isinstance(value, bool) and kind is not bool:
            raise ConfigError(f"{key}: expected {kind.__name__}, got bool", key=key)
        if kind is bool:
            if isinstance(value, bool):
                return value
            if isinstance(value, str) and value.lower() in ("true", "1", "yes", "false", "0", "no"):
                return value.lower() in ("true", "1", "yes")
            raise ConfigError(f"{key}: expected bool, got {value!r}", key=key)
        if kind is int:
            if isinstance(value, int):
                return value
            if isinstance(value, float) and value.is_integer():
                return int(value)
            if isinstance(value, str):
                try:
                    return int(value.strip())
                except ValueError:
                    pass
            raise ConfigError(f"{key}: expected int, got {value!r}", key=key)
        if kind is float:
            try:
                return float(value)
            except (TypeError, ValueError):
                raise ConfigError(f"{key}: expected float, got {value!r}", key=key) from None
        if kind is str:
            if isinstance(value, (str, Path)):
                return str(value)
            raise ConfigError(f"{key}: expected str, got {value!r}", key=key)
        if issubclass(kind, Enum):
            if isinstance(value, kind):
                return value
            try:
                return kind(str(value).replace("-", "_") if kind is ExperimentKind else value)
            except ValueError:
                choices = ", ".join(m.value for m in kind)
                raise ConfigError(
                    f"{key}: expected one of {choices}, got {value!r}", key=key
                ) from None
        raise ConfigError(f"{key}: unsupported type", key=key)

    return coerce


def _sequence(item: Type[Any], length: Optional[int] = None) -> Coercer:
    scalar = _scalar(item)

    def coerce(key: str, value: Any) -> Tuple[Any, ...]:
        if isinstance(value, str):
            parts = [p for p in value.replace(" ", "").split(",") if p]
        elif isinstance(value, (list, tuple)):
            parts = list(value)
        else:
            parts = [value]
        items = tuple(scalar(key, p) for p in parts)
        if length is not None and len(items) != length:
            raise ConfigError(
                f"{key}: expected {length} comma-separated {item.__name__} values, "
                f"got {len(items)}",
                key=key,
            )
        return items

    return coerce


FIELD_TYPES: Dict[str, Coercer] = {
    "kind": _scalar(ExperimentKind),
    "target": _scalar(ReproduceTarget),
    "J": _scalar(int),
    "alpha": _scalar(float),
    "delta": _scalar(float),
    "deltas": _sequence(float),
    "J_list": _sequence(int),
    "state": _sequence(float, 3),
    "state_z": _scalar(float),
    "steps": _scalar(int),
    "window": _sequence(float, 2),
    "q_grid": _sequence(float, 3),
    "z_range": _sequence(float, 2),
    "z_step": _scalar(float),
    "tail_fraction": _scalar(float),
    "scan_delta": _scalar(float),
    "orbit_points": _scalar(int),
    "renormalize": _scalar(bool),
    "workers": _scalar(int),
    "input": _scalar(str),
    "out": _scalar(str),
    "format": _scalar(OutputFormat),
    "plot": _scalar(bool),
}


def _normalise(raw: Mapping[str, Any], source: str) -> Dict[str, Any]:
    values = {str(k).replace("-", "_"): v for k, v in raw.items()}
    # `j_list` et `j` acceptés pour J_list et J
    for lower, proper in (("j", "J"), ("j_list", "J_list")):
        if lower in values:
            values[proper] = values.pop(lower)
    unknown = sorted(set(values) - set(FIELD_TYPES))
    if unknown:
        raise ConfigError(
            f"unknown {source} keys: {', '.join(unknown)}", key=unknown[0]
        )
    return values


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Lit un objet JSON plat"""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}", key="config") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}", key="config") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object", key="config")
    nested = sorted(k for k, v in data.items() if isinstance(v, dict))
    if nested:
        raise ConfigError(
            f"config file {path} must be flat; nested keys: {', '.join(nested)}",
            key=nested[0],
        )
    return data


def parse_config(
    flags: Mapping[str, Any], config_file: Optional[Union[str, Path]] = None
) -> ExperimentConfig:
    """Fusionne fichier et options (les options gagnent) puis valide"""
    merged: Dict[str, Any] = {}
    if config_file is not None:
        merged.update(_normalise(load_config_file(config_file), "config file"))
    merged.update(
        {k: v for k, v in _normalise(flags, "flag").items() if v is not None}
    )
    if "kind" not in merged:
        raise ConfigError("experiment kind is required", key="kind")
    coerced = {
        key: FIELD_TYPES[key](key, value)
        for key, value in merged.items()
        if value is not None
    }
    config = ExperimentConfig(**coerced)
    validate_config(config)
    return config


def _require(config: ExperimentConfig, *keys: str) -> None:
    for key in keys:
        if getattr(config, key) is None:
            raise ConfigError(
                f"{config.kind.value} needs '{key.replace('_', '-')}'", key=key
            )


def _even_spin(J: int, key: str = "J") -> None:
    J = validate_spin(J)
    if J % 2:
        raise UnsupportedSpinError(
            f"J={J} is odd; quantum experiments need even J", key=key
        )


def validate_config(config: ExperimentConfig) -> None:
    """Contrôles par type d'expérience"""
    if config.steps < 1:
        raise ConfigError(f"steps must be >= 1, got {config.steps}", key="steps")
    if config.workers < 1:
        raise ConfigError(f"workers must be >= 1, got {config.workers}", key="workers")
    if config.orbit_points < 1:
        raise ConfigError("orbit-points must be >= 1", key="orbit_points")
    if config.z_step <= 0:
        raise ConfigError(f"z-step must be positive, got {config.z_step}", key="z_step")
    if not 0 < config.tail_fraction <= 1:
        raise ConfigError("tail-fraction must lie in (0, 1]", key="tail_fraction")
    if config.window is not None and not 0 <= config.window[0] < config.window[1]:
        raise ConfigError(f"window {config.window} must satisfy 0 <= a < b", key="window")
    lo, hi, step = config.q_grid
    if not (1.0 <= lo < hi and step > 0):
        raise ConfigError(f"q-grid {config.q_grid} must satisfy 1 <= lo < hi, step > 0", key="q_grid")
    for key in ("delta", "scan_delta"):
        value = getattr(config, key)
        if value is not None and value < 0:
            raise ConfigError(f"{key} must be >= 0, got {value}", key=key)
    if config.deltas is not None:
        if not config.deltas or any(d <= 0 for d in config.deltas):
            raise ConfigError("deltas must be positive", key="deltas")
        if any(b <= a for a, b in zip(config.deltas, config.deltas[1:])):
            raise ConfigError("deltas must be strictly increasing", key="deltas")
    if config.state is not None and config.state_z is not None:
        raise ConfigError("give either 'state' or 'state-z', not both", key="state")

    kind = config.kind
    if kind in QUANTUM_KINDS:
        _require(config, "J")
        _even_spin(config.J)  # type: ignore[arg-type]
    if kind is ExperimentKind.FIDELITY:
        _require(config, "delta")
        if config.state is None and config.state_z is None:
            raise ConfigError("fidelity needs 'state' or 'state-z'", key="state")
    elif kind is ExperimentKind.DELTA_SWEEP:
        _require(config, "deltas")
    elif kind in (ExperimentKind.FIT, ExperimentKind.CLASSIFY):
        _require(config, "input")
    elif kind is ExperimentKind.TABLE1 and config.J_list is not None:
        for J in config.J_list:
            _even_spin(J, "J_list")
    elif kind is ExperimentKind.REPRODUCE:
        _require(config, "target")
