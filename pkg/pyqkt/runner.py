"""
Exécution des expériences

run(config) aiguille vers une expérience, écrit ses fichiers de données
(CSV/JSON), un summary.json et un run.json (configuration, version, durée,
manifeste avec empreintes).
"""
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .classical import (
    CHAOTIC_SEED,
    FIXED_POINTS,
    ClassicalPoint,
    lyapunov_estimate,
    orbit_array,
    project_many,
    sensitivity,
)
from .coherent import coherent_state_at, footprint_outline, footprint_radius, project_oo
from .config import ExperimentConfig, ExperimentKind, ReproduceTarget
from .console import console
from .edge import (
    REFERENCE_EDGE_OFFSETS,
    DeltaSweepResult,
    delta_sweep,
    edge_state_point,
    fixed_point,
    scan_edge,
    scan_point,
    sub_critical_deltas,
    table1,
)
from .errors import ConfigError, EdgeNotFoundError, FitError, InsufficientDataError, PyqktError
from .evolution import (
    MIN_PLATEAU_POINTS,
    OverlapSeries,
    fidelity_batch,
    fidelity_series,
    saturation_report,
    short_time_exponent,
)
from .io import ManifestEntry, RunRecord, emit_series, read_series_csv, write_json
from .kicked_top import (
    KickedTopSpec,
    block_residual,
    build_qkt,
    oo_floquet,
    parity_basis,
    perturbation_stats,
)
from .nonextensive import (
    MIN_CLASSIFY_POINTS,
    QExpFit,
    classify_decay,
    fit_at_q,
    fit_qexp,
    ln_q,
)

# paramètres des reproductions
FIG1_PARAMS = {"J": 480, "alpha": 3.0, "delta": 0.005}
FIG1_HOLD_STEPS = 300
FIG3_J = 240
FIG3_FITS: Tuple[Tuple[float, Tuple[float, float]], ...] = (
    (0.0003, (600.0, 2500.0)),
    (0.01, (20.0, 70.0)),
)
# (q_rel, τ) publiés pour les fenêtres ci-dessus
FIG3_REFERENCE: Dict[float, Tuple[float, float]] = {0.0003: (3.3, 1300.0), 0.01: (4.25, 34.0)}
FIG4_J = (120, 240, 360, 480)
FIG4_DELTAS = tuple(float(d) for d in np.geomspace(2e-4, 3e-2, 12))
FIG6_J = (120, 480)
TABLE1_J = tuple(sorted(REFERENCE_EDGE_OFFSETS))


class _Run:
    """Contexte d'une exécution : dossier de sortie, manifeste et résumé"""

    def __init__(self, config: ExperimentConfig) -> None:
        self.config = config
        self.out = Path(config.out)
        self.manifest: List[ManifestEntry] = []
        self.summary: Dict[str, Any] = {"kind": config.kind.value}
        self.edges: Dict[int, "LocatedEdge"] = {}

    def emit(self, name: str, data: Any, meta: Optional[Mapping[str, Any]] = None) -> None:
        for ext in self.config.format.extensions:
            entry = emit_series(data, ext, self.out / f"{name}.{ext}", meta)
            console.debug(f"wrote {entry.path} ({entry.rows} rows)")
            self.manifest.append(entry)

    def plot_series(self, name: str, series: Mapping[str, OverlapSeries], loglog: bool = False) -> None:
        if self.config.plot:
            from .plotting import plot_series

            self.manifest.append(plot_series(series, self.out / f"{name}.svg", loglog, name))

    def plot_points(self, name: str, layers: Mapping[str, Tuple[np.ndarray, np.ndarray]]) -> None:
        if self.config.plot:
            from .plotting import plot_points

            self.manifest.append(plot_points(layers, self.out / f"{name}.svg", name))


def initial_point(config: ExperimentConfig) -> Optional[ClassicalPoint]:
    if config.state is not None:
        return ClassicalPoint.on_sphere(*config.state)
    if config.state_z is not None:
        return scan_point(config.state_z)
    return None


@dataclass(frozen=True)
class LocatedEdge:
    """État de bord retenu pour J ; source vaut "scan" ou "reference" (décalage publié)"""

    J: int
    point: ClassicalPoint
    offset: float
    source: str

    def summary(self) -> Dict[str, Any]:
        return {"offset": self.offset, "source": self.source, "state": _xyz(self.point)}


def locate_edge(run: _Run, J: int) -> LocatedEdge:
    """Bord balayé pour J, mis en cache par exécution

    Sans loi de puissance sur la bande, on retombe sur le décalage publié quand
    il existe, en le signalant comme tel dans le résumé.
    """
    if J in run.edges:
        return run.edges[J]
    config = run.config
    try:
        scan = scan_edge(
            J,
            config.alpha,
            config.scan_delta,
            config.z_range,  # type: ignore[arg-type]
            config.z_step,
            config.steps,
            config.workers,
            tail_fraction=config.tail_fraction,
            q_grid=config.q_grid,
        )
        edge = LocatedEdge(J, scan.edge_point, scan.edge_offset, "scan")
    except EdgeNotFoundError as exc:
        if J not in REFERENCE_EDGE_OFFSETS:
            raise
        console.warning(f"J={J}: {exc}; using the published offset {REFERENCE_EDGE_OFFSETS[J]}")
        edge = LocatedEdge(J, edge_state_point(J), REFERENCE_EDGE_OFFSETS[J], "reference")
    run.edges[J] = edge
    run.summary.setdefault("edges", {})[str(J)] = edge.summary()
    return edge


def _xyz(p: ClassicalPoint) -> Tuple[float, float, float]:
    return (p.x, p.y, p.z)


def _fit_summary(fit: Optional[QExpFit]) -> Optional[Dict[str, Any]]:
    if fit is None:
        return None
    return {
        "q_rel": fit.q_rel,
        "tau": fit.tau,
        "window": list(fit.window),
        "time_power": fit.time_power,
        "linearity": fit.linearity,
    }


def _decay_summary(series: OverlapSeries, run: _Run) -> Optional[Dict[str, Any]]:
    if len(series) < MIN_CLASSIFY_POINTS:
        return None
    try:
        decay = classify_decay(series, run.config.tail_fraction, run.config.q_grid)
    except PyqktError as exc:
        console.warning(f"classification failed: {exc}")
        return {"error": str(exc)}
    return {
        "label": decay.label(),
        "kind": decay.kind.value,
        "q_rel": decay.q_rel,
        "stretch": list(decay.stretch) if decay.stretch else None,
        "stretch_decades": decay.stretch_decades,
        "baseline": decay.baseline,
        "qexp": _fit_summary(decay.qexp),
        "gaussian_linearity": decay.gaussian.linearity if decay.gaussian else None,
        "exponential_linearity": decay.exponential.linearity if decay.exponential else None,
    }


def _series_summary(series: OverlapSeries, run: _Run) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "weight": series.meta.weight,
        "final_overlap": float(series.values[-1]),
        "min_overlap": float(series.values.min()),
        "classification": _decay_summary(series, run),
    }
    if len(series) >= MIN_PLATEAU_POINTS and series.meta.N:
        out["saturation"] = saturation_report(series, series.meta.N, run.config.tail_fraction)
    try:
        out["short_time_exponent"] = short_time_exponent(series)
    except InsufficientDataError:
        out["short_time_exponent"] = None
    return out


def _sweep_columns(result: DeltaSweepResult) -> Dict[str, List[Any]]:
    return {
        "delta": [p.delta for p in result.points],
        "q_rel": [p.fit.q_rel if p.fit else np.nan for p in result.points],
        "tau": [p.fit.tau if p.fit else np.nan for p in result.points],
        "window_lo": [p.fit.window[0] if p.fit else np.nan for p in result.points],
        "window_hi": [p.fit.window[1] if p.fit else np.nan for p in result.points],
    }


def _sweep_summary(result: DeltaSweepResult) -> Dict[str, Any]:
    return {
        "J": result.J,
        "edge_state": list(result.edge_state),
        "delta_c": result.delta_c,
        "q_rel_c": result.q_rel_c,
        "q_rel_s": result.q_rel_s,
        "delta_s": result.delta_s,
        "saturation": "detected" if result.saturation_detected else "no saturation detected",
        "tau_slope": result.tau_slope,
        "slope_defined": result.slope_defined,
        "failures": {str(p.delta): p.error for p in result.points if p.error},
    }


# --- expériences -----------------------------------------------------------


def _spec(config: ExperimentConfig, delta: Optional[float] = None) -> KickedTopSpec:
    return KickedTopSpec(config.J, config.alpha, config.delta if delta is None else delta)  # type: ignore[arg-type]


def _build(run: _Run) -> None:
    config = run.config
    spec = _spec(config, config.delta or 0.0)
    U = build_qkt(spec)
    decomp = parity_basis(spec.J)
    phases = np.sort(np.angle(np.linalg.eigvals(oo_floquet(spec.J, spec.alpha).entries)))
    run.emit("quasienergies", {"k": list(range(phases.size)), "phase": phases})
    run.summary.update(
        {
            "J": spec.J,
            "alpha": spec.alpha,
            "dimension": U.dim,
            "unitarity_residual": U.unitarity_residual(),
            "block_residual": block_residual(U, decomp),
            "block_dims": list(decomp.block_dims),
        }
    )
    if config.delta:
        run.summary["perturbation"] = perturbation_stats(spec)


def _fidelity(run: _Run) -> None:
    config = run.config
    spec = _spec(config)
    point = initial_point(config)
    assert point is not None
    state = project_oo(coherent_state_at(spec.J, point), parity_basis(spec.J), config.renormalize)
    series = fidelity_series(spec, state, config.steps, _xyz(point))
    run.emit("overlap", series)
    run.plot_series("overlap", {f"delta={spec.delta:g}": series})
    run.summary.update(
        {
            "point": _xyz(point),
            "perturbation": perturbation_stats(spec),
            "series": _series_summary(series, run),
        }
    )


def _fit(run: _Run) -> None:
    config = run.config
    series = read_series_csv(config.input)  # type: ignore[arg-type]
    fit = fit_qexp(series, config.window, 2, config.q_grid)
    lo, hi = fit.window
    mask = (series.steps >= lo) & (series.steps <= hi)
    t = series.steps[mask].astype(float)
    run.emit(
        "fit",
        {
            "t": t,
            "overlap": series.values[mask],
            "model": fit.evaluate(t),
            "t_pow": t**fit.time_power,
            "lnq_overlap": ln_q(series.values[mask], fit.q_rel),
        },
    )
    run.summary.update({"input": config.input, "fit": _fit_summary(fit)})


def _classify(run: _Run) -> None:
    config = run.config
    series = read_series_csv(config.input)  # type: ignore[arg-type]
    decay = classify_decay(series, config.tail_fraction, config.q_grid)
    run.summary.update(
        {
            "input": config.input,
            "label": decay.label(),
            "kind": decay.kind.value,
            "q_rel": decay.q_rel,
            "stretch": list(decay.stretch) if decay.stretch else None,
            "qexp": _fit_summary(decay.qexp),
        }
    )


def _edge_scan(run: _Run) -> None:
    config = run.config
    delta = config.delta if config.delta is not None else config.scan_delta
    result = scan_edge(
        config.J,  # type: ignore[arg-type]
        config.alpha,
        delta,
        config.z_range,  # type: ignore[arg-type]
        config.z_step,
        config.steps,
        config.workers,
        tail_fraction=config.tail_fraction,
        q_grid=config.q_grid,
    )
    run.emit(
        "edge_scan",
        {
            "z": [p.z for p in result.points],
            "kind": [p.kind for p in result.points],
            "q_rel": [np.nan if p.q_rel is None else p.q_rel for p in result.points],
            "stretch_decades": [p.stretch_decades for p in result.points],
        },
    )
    run.summary.update(
        {
            "J": result.J,
            "delta": result.delta,
            "edge_z": result.edge_z,
            "edge_offset": result.edge_offset,
            "reference_edge_offset": REFERENCE_EDGE_OFFSETS.get(result.J),
            "edge_fit": _fit_summary(result.edge.fit),
            "unclassified": {f"{p.z:.4f}": p.error for p in result.points if not p.classified},
        }
    )


def _delta_sweep(run: _Run) -> None:
    config = run.config
    J = config.J
    assert J is not None and config.deltas is not None
    point = initial_point(config) or locate_edge(run, J).point
    windows = {d: config.window for d in config.deltas} if config.window else None
    result = delta_sweep(
        J, config.alpha, point, config.deltas, config.steps, windows, config.tail_fraction, config.q_grid
    )
    run.emit("delta_sweep", _sweep_columns(result))
    run.plot_series(
        "delta_sweep", {f"delta={d:g}": s for d, s in result.series.items()}, loglog=True
    )
    run.summary.update(_sweep_summary(result))


def _table1(run: _Run, J_list: Optional[Sequence[int]] = None) -> None:
    config = run.config
    J_list = J_list or config.J_list or TABLE1_J
    result = table1(
        J_list,
        config.alpha,
        config.scan_delta,
        config.steps,
        config.z_range,  # type: ignore[arg-type]
        config.z_step,
        config.workers,
    )
    run.emit("table1", result.rows)
    fig5 = result.q_rel_c_vs_inverse_J
    run.emit("fig5", {"inv_J": [a for a, _ in fig5], "q_rel_c": [b for _, b in fig5]})
    edges = [
        LocatedEdge(r.J, scan_point(fixed_point().z - r.edge_offset), r.edge_offset, "scan")
        for r in result.rows
    ]
    run.emit("fig6_inset", _inset_columns(edges))
    run.summary.update(
        {
            "rows": result.rows,
            "failures": {str(J): msg for J, msg in result.failures.items()},
            "reference_edge_offsets": {str(J): REFERENCE_EDGE_OFFSETS.get(J) for J in J_list},
        }
    )


def _inset_columns(edges: Sequence[LocatedEdge]) -> Dict[str, List[Any]]:
    """Décalage du bord contre 1/J ; la colonne reference_offset reprend les valeurs publiées"""
    return {
        "J": [e.J for e in edges],
        "inv_J": [1.0 / e.J for e in edges],
        "edge_offset": [e.offset for e in edges],
        "source": [e.source for e in edges],
        "reference_offset": [REFERENCE_EDGE_OFFSETS.get(e.J, np.nan) for e in edges],
    }


def _start(config: ExperimentConfig) -> ClassicalPoint:
    return initial_point(config) or CHAOTIC_SEED


def _classical_orbit(run: _Run) -> None:
    config = run.config
    p0 = _start(config)
    orbit = orbit_array(p0, config.alpha, config.orbit_points)
    run.emit(
        "orbit",
        {"t": np.arange(orbit.shape[0]), "x": orbit[:, 0], "y": orbit[:, 1], "z": orbit[:, 2]},
    )
    run.summary.update(
        {
            "start": _xyz(p0),
            "norm_drift": float(np.max(np.abs(np.linalg.norm(orbit, axis=1) - 1.0))),
            "lyapunov": lyapunov_estimate(p0, config.alpha, config.orbit_points),
        }
    )


def _project(run: _Run) -> None:
    config = run.config
    p0 = _start(config)
    px, pz = project_many(orbit_array(p0, config.alpha, config.orbit_points))
    run.emit("projection", {"px": px, "pz": pz})
    run.plot_points("projection", {"orbit": (px, pz)})
    run.summary.update({"start": _xyz(p0), "points": int(px.size)})


def _sensitivity(run: _Run) -> None:
    config = run.config
    p0 = _start(config)
    result = sensitivity(p0, config.alpha, config.steps)
    run.emit("sensitivity", {"t": result.steps, "xi": result.xi})
    run.summary.update(
        {
            "start": _xyz(p0),
            "lyapunov": result.lyapunov,
            "q_sen": result.q_sen,
            "lambda_q_sen": result.lambda_q_sen,
            "truncated": result.truncated,
            "growth_fit": _fit_summary(result.growth_fit),
        }
    )


# --- reproductions ---------------------------------------------------------


def _fig1(run: _Run) -> None:
    config = run.config
    spec = KickedTopSpec(**FIG1_PARAMS)  # type: ignore[arg-type]
    decomp = parity_basis(spec.J)
    points = {"fixed_point": FIXED_POINTS[0], "chaotic": CHAOTIC_SEED}
    states = [project_oo(coherent_state_at(spec.J, p), decomp, config.renormalize) for p in points.values()]
    batch = fidelity_batch(spec, states, config.steps, [_xyz(p) for p in points.values()])
    run.summary.update({"params": FIG1_PARAMS, "perturbation": perturbation_stats(spec)})
    for (name, p), series in zip(points.items(), batch):
        run.emit(f"fig1_{name}", series)
        summary = _series_summary(series, run)
        summary["point"] = _xyz(p)
        summary["min_overlap_first_300"] = float(series.values[: FIG1_HOLD_STEPS + 1].min())
        run.summary[name] = summary
    run.plot_series("fig1", dict(zip(points, batch)))


def _fig2(run: _Run) -> None:
    config = run.config
    orbit = orbit_array(CHAOTIC_SEED, config.alpha, config.orbit_points - 1)
    px, pz = project_many(orbit)
    run.emit("fig2_chaotic_orbit", {"px": px, "pz": pz})
    fx, fz = project_many(np.array([p.as_array() for p in FIXED_POINTS]))
    run.emit("fig2_fixed_points", {"px": fx, "pz": fz})
    run.plot_points("fig2", {"chaotic orbit": (px, pz), "fixed points": (fx, fz)})
    run.summary.update(
        {
            "seed": _xyz(CHAOTIC_SEED),
            "points": int(px.size),
            "lyapunov": lyapunov_estimate(CHAOTIC_SEED, config.alpha, config.orbit_points),
        }
    )


def _fig3(run: _Run) -> None:
    config = run.config
    override = initial_point(config)
    if override is not None:
        point, source = override, "config"
    else:
        edge = locate_edge(run, FIG3_J)
        point, source = edge.point, edge.source
    state = project_oo(coherent_state_at(FIG3_J, point), parity_basis(FIG3_J), config.renormalize)
    steps = max(config.steps, int(max(w[1] for _, w in FIG3_FITS)))
    run.summary.update(
        {
            "J": FIG3_J,
            "edge_state": _xyz(point),
            "edge_offset": fixed_point().z - point.z,
            "edge_source": source,
            "fits": {},
        }
    )
    plotted: Dict[str, OverlapSeries] = {}
    for delta, window in FIG3_FITS:
        series = fidelity_series(KickedTopSpec(FIG3_J, config.alpha, delta), state, steps, _xyz(point))
        name = f"fig3_delta_{delta:g}"
        run.emit(name, series)
        plotted[f"delta={delta:g}"] = series
        q_ref, tau_ref = FIG3_REFERENCE[delta]
        entry: Dict[str, Any] = {
            "reference": {"q_rel": q_ref, "tau": tau_ref, "window": list(window)},
            "classification": _decay_summary(series, run),
        }
        run.summary["fits"][f"{delta:g}"] = entry
        try:
            fit = fit_qexp(series, window, 2, config.q_grid)
            slope, _, r2 = fit_at_q(series.steps, series.values, q_ref, window)
        except (FitError, InsufficientDataError) as exc:
            console.warning(f"fig3 delta={delta:g}: fit failed ({exc})")
            entry["error"] = str(exc)
            continue
        entry["window_fit"] = _fit_summary(fit)
        entry["at_reference_q"] = {"slope": slope, "linearity": r2}
        mask = (series.steps >= window[0]) & (series.steps <= window[1])
        t = series.steps[mask].astype(float)
        run.emit(
            f"{name}_lnq",
            {
                "t2": t**2,
                "lnq_overlap": ln_q(series.values[mask], fit.q_rel),
                "lnq_overlap_reference_q": ln_q(series.values[mask], q_ref),
            },
        )
    run.plot_series("fig3", plotted, loglog=True)


def _fig4(run: _Run) -> None:
    config = run.config
    deltas = config.deltas or FIG4_DELTAS
    run.summary.update({"deltas": list(deltas), "sweeps": {}})
    for J in FIG4_J:
        edge = locate_edge(run, J)
        result = delta_sweep(
            J, config.alpha, edge.point, deltas, config.steps,
            tail_fraction=config.tail_fraction, q_grid=config.q_grid,
        )
        run.emit(f"fig4_J{J}", _sweep_columns(result))
        summary = _sweep_summary(result)
        summary["edge_source"] = edge.source
        run.summary["sweeps"][str(J)] = summary


def _fig5(run: _Run) -> None:
    config = run.config
    rows = []
    for J in TABLE1_J:
        edge = locate_edge(run, J)
        stats = perturbation_stats(KickedTopSpec(J, config.alpha, config.scan_delta))
        result = delta_sweep(
            J, config.alpha, edge.point, sub_critical_deltas(stats.delta_c),
            config.steps, tail_fraction=config.tail_fraction, q_grid=config.q_grid,
        )
        rows.append((J, result.q_rel_c, edge.source))
    run.emit(
        "fig5",
        {
            "J": [J for J, _, _ in rows],
            "inv_J": [1.0 / J for J, _, _ in rows],
            "q_rel_c": [np.nan if q is None else q for _, q, _ in rows],
            "edge_source": [s for _, _, s in rows],
        },
    )
    run.summary["q_rel_c"] = {str(J): q for J, q, _ in rows}


def _fig6(run: _Run) -> None:
    config = run.config
    layers: Dict[str, Tuple[np.ndarray, np.ndarray]] = {}
    radii = {}
    for J in FIG6_J:
        center = locate_edge(run, J).point
        outline = np.array([p.as_array() for p in footprint_outline(J, center, 128)])
        px, pz = project_many(outline)
        run.emit(f"fig6_footprint_J{J}", {"px": px, "pz": pz})
        layers[f"J={J}"] = (px, pz)
        radii[str(J)] = footprint_radius(J)
    ox, oz = project_many(orbit_array(CHAOTIC_SEED, config.alpha, config.orbit_points - 1))
    run.emit("fig6_chaotic_orbit", {"px": ox, "pz": oz})
    layers["chaotic orbit"] = (ox, oz)
    edges = [locate_edge(run, J) for J in TABLE1_J]
    run.emit("fig6_inset", _inset_columns(edges))
    run.plot_points("fig6", layers)
    run.summary.update({"footprint_radius": radii})


REPRODUCTIONS: Dict[ReproduceTarget, Callable[[_Run], None]] = {
    ReproduceTarget.FIG1: _fig1,
    ReproduceTarget.FIG2: _fig2,
    ReproduceTarget.FIG3: _fig3,
    ReproduceTarget.FIG4: _fig4,
    ReproduceTarget.FIG5: _fig5,
    ReproduceTarget.FIG6: _fig6,
    ReproduceTarget.TABLE1: lambda run: _table1(run, TABLE1_J),
}


def _reproduce(run: _Run) -> None:
    target = run.config.target
    if target is None:
        raise ConfigError("reproduce needs a target", key="target")
    run.summary["target"] = target.value
    REPRODUCTIONS[target](run)


EXPERIMENTS: Dict[ExperimentKind, Callable[[_Run], None]] = {
    ExperimentKind.BUILD: _build,
    ExperimentKind.FIDELITY: _fidelity,
    ExperimentKind.FIT: _fit,
    ExperimentKind.CLASSIFY: _classify,
    ExperimentKind.EDGE_SCAN: _edge_scan,
    ExperimentKind.DELTA_SWEEP: _delta_sweep,
    ExperimentKind.TABLE1: _table1,
    ExperimentKind.CLASSICAL_ORBIT: _classical_orbit,
    ExperimentKind.SENSITIVITY: _sensitivity,
    ExperimentKind.PROJECT: _project,
    ExperimentKind.REPRODUCE: _reproduce,
}


def run(config: ExperimentConfig) -> RunRecord:
    """Exécute l'expérience et retourne l'enregistrement d'exécution"""
    from . import __version__

    started = time.perf_counter()
    current = _Run(config)
    label = config.kind.value + (f" {config.target.value}" if config.target else "")
    console.info(f"running {label} -> {current.out}")
    EXPERIMENTS[config.kind](current)
    current.manifest.append(write_json(current.summary, current.out / "summary.json"))
    record = RunRecord(
        config.snapshot(), __version__, time.perf_counter() - started, current.manifest
    )
    record.write(current.out / "run.json")
    console.success(f"{label} done in {record.wall_time:.1f}s, {len(record.manifest)} files")
    return record
