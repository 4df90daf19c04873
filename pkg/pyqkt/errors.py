"""
Hiérarchie d'exceptions de pyqkt

Chaque classe porte le code de sortie utilisé par la CLI.
"""
from typing import Any, List, Optional, Sequence, Tuple


class PyqktError(Exception):
    """Erreur de base du projet"""

    exit_code = 2


class ConfigError(PyqktError, ValueError):
    """Configuration ou paramètre invalide"""

    exit_code = 1

    def __init__(self, message: str, key: Optional[str] = None) -> None:
        super().__init__(message)
        self.key = key


class InvalidSpinError(ConfigError):
    """J non entier ou non positif"""


class UnsupportedSpinError(InvalidSpinError):
    """J impair là où la décomposition en parités exige J pair"""


class InvalidPointError(ConfigError):
    """Point hors de la sphère unité ou angles hors domaine"""


class NumericalError(PyqktError, ArithmeticError):
    """Échec numérique, avec le résidu mesuré quand il existe"""

    exit_code = 2

    def __init__(self, message: str, residual: Optional[float] = None) -> None:
        super().__init__(message)
        self.residual = residual


class NotBlockDiagonalError(NumericalError):
    pass


class DimensionMismatchError(NumericalError, ValueError):
    pass


class EmptyProjectionError(NumericalError):
    def __init__(self, message: str, weight: float) -> None:
        super().__init__(message, residual=weight)
        self.weight = weight


class DomainError(NumericalError, ValueError):
    pass


class InsufficientDataError(NumericalError):
    pass


class FitError(NumericalError):
    pass


class EdgeNotFoundError(PyqktError):
    """Aucun état du balayage n'a une décroissance en loi de puissance"""

    exit_code = 3

    def __init__(self, message: str, classes: Sequence[Tuple[float, Any]]) -> None:
        super().__init__(message)
        self.classes: List[Tuple[float, Any]] = list(classes)


class OutputError(PyqktError):
    """Écriture ou relecture d'un fichier de résultats impossible"""

    exit_code = 2
