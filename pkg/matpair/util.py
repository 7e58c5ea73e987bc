from enum import Enum, Flag
from dataclasses import asdict, is_dataclass
from pathlib import Path
import os
import sys
import json
import logging
import logging.handlers
from typing import Any

console_level = logging.WARNING


class MatpairError(Exception):
    """Base class of all errors raised by the library."""


def create_logger(name: str, path: Path | None):
    logger = logging.getLogger(name)
    logger.setLevel(logging.DEBUG)
    if path is None or os.environ.get("MATPAIR_ENV") == "CONSOLE":
        handler = logging.StreamHandler(sys.stderr)
        handler.setLevel(console_level)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        handler = logging.handlers.RotatingFileHandler(
            path, encoding="utf-8", maxBytes=10 * 1024 * 1024, backupCount=4
        )
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    logger.addHandler(handler)
    return logger


def _log_path():
    if value := os.environ.get("MATPAIR_LOG"):
        return Path(value)
    return None


logger = create_logger("matpair", _log_path())


def set_console_level(level: int):
    for handler in logger.handlers:
        if isinstance(handler, logging.StreamHandler) and not isinstance(
            handler, logging.FileHandler
        ):
            handler.setLevel(level)


def log_error(error: Exception):
    message = str(error)
    if isinstance(error, AssertionError):
        message = f"Error: Internal assertion failed [{error}]"
    elif isinstance(error, MatpairError):
        message = f"Error: {type(error).__name__}: {message}"
    elif not message.startswith("Error:"):
        message = f"Error: {message}"
    logger.debug(message, exc_info=error)
    return message


def isnumber(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def base_type_match(a, b):
    return type(a) == type(b) or (isnumber(a) and isnumber(b))


def relative(residual: float, scale: float):
    """Residual divided by scale, or the plain residual when the scale vanishes."""
    return residual / scale if scale > 0 else residual


def encode_json(obj: Any):
    if isinstance(obj, Flag):
        return obj.value
    if isinstance(obj, Enum):
        return obj.name
    if isinstance(obj, Path):
        return str(obj.as_posix())
    if is_dataclass(obj):
        assert not isinstance(obj, type)
        return asdict(obj)
    raise TypeError(f"Object of type {obj.__class__.__name__} is not JSON serializable")


def read_json_with_comments(path: Path):
    lines = path.read_text().splitlines()
    return json.loads("\n".join("" if line.strip().startswith("//") else line for line in lines))
