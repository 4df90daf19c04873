"""
Console de pyqkt

Toute la sortie passe par pyfasty.console ; ce module fixe le format du projet
et expose l'objet pour les autres modules.
"""
import os
from typing import Any, Dict, Optional

import pyfasty

console = pyfasty.console

LOG_FORMAT = (
    "<!gray><%Y>-<%m>-<%d> <%H>:<%M>:<%S>.<%F:3> | <!reset><!type><%TYPE> "
    "<%FILE&%FUNC><!reset><!gray> | <!reset><%MESSAGE>"
)

LOG_COLORS = {
    "type": {
        "info": "\033[38;5;75m",
        "success": "\033[38;5;82m",
        "warning": "\033[38;5;220m",
        "error": "\033[38;5;196m",
        "debug": "\033[38;5;198m",
        "critical": "\033[38;5;57m",
        "fatal": "\033[48;5;196m\033[38;5;255m",
    },
    "gray": "\033[38;5;245m",
    "reset": "\033[0m",
}


def configure_console(
    verbose: bool = False, quiet: bool = False, log_file: Optional[str] = None
) -> Dict[str, Any]:
    """Applique la configuration console et la retourne"""
    settings: Dict[str, Any] = {
        "console_view": not quiet,
        "debug_view": verbose and not quiet,
        "format": LOG_FORMAT,
        "colors": LOG_COLORS,
        "save_log": {
            "status": log_file is not None,
            "filename": log_file or "pyqkt.log",
            "filemode": "a",
        },
    }
    console.config = settings
    return settings


configure_console(verbose=os.environ.get("PYQKT_DEBUG", "") == "1")
