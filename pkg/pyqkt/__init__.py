"""
pyqkt - Quantum kicked top and the edge of quantum chaos

Opérateur de Floquet de la toupie pulsée, états cohérents de spin, décroissance
du recouvrement sous perturbation, ajustements q-exponentiels, toupie
classique et localisation du bord du chaos quantique.
"""

__version__ = "0.1.0"

from .classical import (  # noqa: E402
    CHAOTIC_SEED,
    FIXED_POINTS,
    ClassicalPoint,
    lyapunov_estimate,
    orbit,
    orbit_array,
    project,
    project_many,
    sensitivity,
    step,
)
from .coherent import (  # noqa: E402
    Basis,
    QuantumState,
    SphericalPoint,
    cartesian_to_angles,
    coherent_state,
    coherent_state_at,
    project_oo,
)
from .config import ExperimentConfig, ExperimentKind, ReproduceTarget, parse_config  # noqa: E402
from .console import configure_console, console  # noqa: E402
from .edge import (  # noqa: E402
    REFERENCE_EDGE_OFFSETS,
    delta_sweep,
    scan_edge,
    summarize_sweep,
    table1,
)
from .errors import (  # noqa: E402
    ConfigError,
    EdgeNotFoundError,
    NumericalError,
    PyqktError,
)
from .evolution import OverlapSeries, evolve, fidelity_series, overlap, plateau  # noqa: E402
from .kicked_top import (  # noqa: E402
    KickedTopSpec,
    build_qkt,
    oo_block,
    parity_basis,
    perturbation_stats,
)
from .nonextensive import (  # noqa: E402
    ProbabilityDistribution,
    classify_decay,
    e_q,
    fit_qexp,
    ln_q,
    s_q,
)
from .spin import jy_matrix, jz_matrix, rotation_y, torsion  # noqa: E402

__all__ = [
    "__version__",
    "CHAOTIC_SEED",
    "FIXED_POINTS",
    "ClassicalPoint",
    "lyapunov_estimate",
    "orbit",
    "orbit_array",
    "project",
    "project_many",
    "sensitivity",
    "step",
    "Basis",
    "QuantumState",
    "SphericalPoint",
    "cartesian_to_angles",
    "coherent_state",
    "coherent_state_at",
    "project_oo",
    "ExperimentConfig",
    "ExperimentKind",
    "ReproduceTarget",
    "parse_config",
    "configure_console",
    "console",
    "REFERENCE_EDGE_OFFSETS",
    "delta_sweep",
    "scan_edge",
    "summarize_sweep",
    "table1",
    "ConfigError",
    "EdgeNotFoundError",
    "NumericalError",
    "PyqktError",
    "OverlapSeries",
    "evolve",
    "fidelity_series",
    "overlap",
    "plateau",
    "KickedTopSpec",
    "build_qkt",
    "oo_block",
    "parity_basis",
    "perturbation_stats",
    "ProbabilityDistribution",
    "classify_decay",
    "e_q",
    "fit_qexp",
    "ln_q",
    "s_q",
    "jy_matrix",
    "jz_matrix",
    "rotation_y",
    "torsion",
]
