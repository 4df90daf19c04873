"""
Interface en ligne de commande de pyqkt

Codes de sortie : 0 succès, 1 erreur d'usage / de configuration, 2 erreur
numérique ou d'ajustement, 3 bord du chaos introuvable.
"""
import argparse
import sys
from typing import Any, Dict, NoReturn, Optional, Sequence

from .config import ExperimentKind, ReproduceTarget, parse_config
from .console import configure_console, console
from .errors import ConfigError, EdgeNotFoundError, PyqktError


class _Parser(argparse.ArgumentParser):
    """Les erreurs d'usage deviennent des ConfigError (code 1)"""

    def error(self, message: str) -> NoReturn:
        raise ConfigError(f"{self.prog}: {message}")


def _common(parser: argparse.ArgumentParser) -> None:
    # valeurs par défaut à None : seules les options données écrasent le fichier
    add = parser.add_argument
    add("--config", help="flat JSON config file")
    add("--J", dest="J", help="total spin (even for quantum experiments)")
    add("--alpha", help="kick strength (default 3)")
    add("--delta", help="perturbation strength")
    add("--deltas", help="comma-separated perturbation strengths")
    add("--J-list", dest="J_list", help="comma-separated spins")
    add("--state", help="initial state center x,y,z on the unit sphere")
    add("--state-z", dest="state_z", help="initial z with y = y_f and x > 0")
    add("--steps", help="number of map iterations (default 3000)")
    add("--window", help="fit window a,b")
    add("--q-grid", dest="q_grid", help="q search grid lo,hi,step")
    add("--z-range", dest="z_range", help="edge scan band a,b")
    add("--z-step", dest="z_step", help="edge scan step (default 0.002)")
    add("--tail-fraction", dest="tail_fraction", help="plateau tail fraction (default 0.2)")
    add("--scan-delta", dest="scan_delta", help="perturbation used by edge scans")
    add("--orbit-points", dest="orbit_points", help="classical orbit length")
    add("--workers", help="parallel workers for edge scans")
    add("--input", help="series CSV (t,overlap) for fit / classify")
    add("--out", help="output directory (default results)")
    add("--format", choices=["csv", "json", "both"], help="output format")
    add("--no-renormalize", dest="renormalize", action="store_const", const=False)
    add("--plot", action="store_const", const=True, help="also write SVG plots")
    add("--verbose", action="store_true", help="show debug messages")
    add("--quiet", action="store_true", help="hide console output")
    add("--log", help="append console output to this file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pyqkt", description="Quantum kicked top: edge of quantum chaos")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    simple = {
        "build": "Floquet operator checks and oo quasienergies",
        "fidelity": "overlap decay O(t) of a coherent state",
        "fit": "q-exponential fit of a series CSV",
        "classify": "decay classification of a series CSV",
        "edge-scan": "locate the edge of quantum chaos along y = y_f",
        "delta-sweep": "q_rel and tau versus perturbation strength",
        "table1": "edge offset, delta_c and q_rel^c for several J",
    }
    for name, text in simple.items():
        _common(sub.add_parser(name, help=text, description=text))

    classical = sub.add_parser("classical", help="classical kicked top")
    modes = classical.add_subparsers(dest="mode", parser_class=_Parser)
    modes.required = True
    for name, text in (
        ("orbit", "orbit on the unit sphere"),
        ("sensitivity", "sensitivity to initial conditions"),
        ("project", "area-preserving projection of an orbit"),
    ):
        _common(modes.add_parser(name, help=text, description=text))

    reproduce = sub.add_parser("reproduce", help="reference figure and table presets")
    reproduce.add_argument("target", choices=[t.value for t in ReproduceTarget])
    _common(reproduce)
    return parser


CLASSICAL_MODES = {
    "orbit": ExperimentKind.CLASSICAL_ORBIT,
    "sensitivity": ExperimentKind.SENSITIVITY,
    "project": ExperimentKind.PROJECT,
}
CONSOLE_KEYS = ("command", "mode", "config", "verbose", "quiet", "log")


def flags_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    values = vars(args)
    flags = {k: v for k, v in values.items() if k not in CONSOLE_KEYS and v is not None}
    if args.command == "classical":
        flags["kind"] = CLASSICAL_MODES[args.mode]
    else:
        flags["kind"] = args.command.replace("-", "_")
    return flags


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        console.error(str(exc))
        return exc.exit_code
    configure_console(args.verbose, args.quiet, args.log)

    from .runner import run

    try:
        config = parse_config(flags_from_args(args), args.config)
        record = run(config)
    except EdgeNotFoundError as exc:
        console.error(str(exc))
        for z, label in exc.classes:
            console.info(f"  z={z:.4f}: {label}")
        return exc.exit_code
    except PyqktError as exc:
        key = getattr(exc, "key", None)
        console.error(f"{exc}" + (f" [{key}]" if key else ""))
        return exc.exit_code
    if not record.verify():
        console.error("output checksums do not match the manifest")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
