"""
Status printing for the solver and the CLI.

Messages go to stderr so that tables and JSON written to stdout stay parseable.
Verbosity comes from ROBUSTFLOW_LOG (quiet, error, warning, info, debug).
"""

import sys
from config import settings

LEVELS = {"quiet": 0, "error": 1, "warning": 2, "info": 3, "debug": 4}

_level = None


def level() -> int:
    global _level
    if _level is None:
        name = settings().log.lower()
        if name not in LEVELS:
            print(f"⚠️  Unknown ROBUSTFLOW_LOG value '{name}', using 'info'", file=sys.stderr)
            name = "info"
        _level = LEVELS[name]
    return _level


def set_level(name: str):
    global _level
    if name not in LEVELS:
        raise ValueError(f"Unknown log level: {name}. Choose from {', '.join(LEVELS)}")
    _level = LEVELS[name]


def _emit(threshold: int, message: str):
    if level() >= threshold:
        print(message, file=sys.stderr, flush=True)


def error(message: str):
    _emit(1, f"❌ {message}")


def warn(message: str):
    _emit(2, f"⚠️  {message}")


def info(message: str):
    _emit(3, message)


def debug(message: str):
    _emit(4, f"   {message}")
