"""Logging for the SBN estimation toolkit.

Every module logs through ``get_logger(__name__)`` with its context (sample
sizes, iteration counts, log-likelihoods) in ``extra``. ``setup_logging``
attaches one handler to the package logger, either a Rich console handler
for interactive runs or a JSON-lines handler for batch jobs and experiment
logs. Both write to standard error; standard output carries command results.
"""

import json
import logging
import math
import sys
from datetime import datetime, timezone
from typing import Any

import numpy as np
from rich.console import Console
from rich.logging import RichHandler

from src.config import LogFormat, get_settings

BASE_LOGGER = "sbn_estimation"
_PACKAGE_PREFIX = "src."

# Attributes of a bare record; everything else on a record came from ``extra``
_STANDARD_ATTRS = frozenset(vars(logging.makeLogRecord({}))) | {"message", "asctime"}


def _plain(value: Any) -> Any:
    """JSON-safe form of an ``extra`` value.

    Numpy scalars and arrays become Python numbers and lists; infinite and
    NaN floats (an unsupported tree gives a log-likelihood of -inf) become
    the strings ``"inf"``, ``"-inf"`` and ``"nan"``.
    """
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    return value


class JSONFormatter(logging.Formatter):
    """One JSON object per record, ``extra`` fields at the top level."""

    def format(self, record: logging.LogRecord) -> str:
        entry: dict[str, Any] = {
            "timestamp": datetime.fromtimestamp(record.created, timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "source": f"{record.module}.{record.funcName}:{record.lineno}",
        }
        if record.exc_info:
            entry["exception"] = self.formatException(record.exc_info)
        entry.update(
            (key, _plain(value))
            for key, value in vars(record).items()
            if key not in _STANDARD_ATTRS
        )
        return json.dumps(entry, default=str, ensure_ascii=False, allow_nan=False)


def _console_handler(level: int) -> logging.Handler:
    verbose = level <= logging.DEBUG
    handler = RichHandler(
        console=Console(stderr=True),
        show_path=verbose,
        rich_tracebacks=True,
        tracebacks_show_locals=verbose,
        markup=False,
    )
    handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
    return handler


def _json_handler() -> logging.Handler:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JSONFormatter())
    return handler


def setup_logging(
    log_level: str | None = None,
    log_format: LogFormat | None = None,
) -> logging.Logger:
    """Configure the package logger and return it.

    Args:
        log_level: Level name; defaults to ``SBN_LOG_LEVEL``.
        log_format: Output format; defaults to ``SBN_LOG_FORMAT``.

    Repeated calls replace the handler, so the CLI can reconfigure per
    command without duplicating output.
    """
    settings = get_settings()
    level = logging.getLevelName((log_level or settings.log_level).upper())
    if not isinstance(level, int):
        level = logging.INFO

    if (log_format or settings.log_format) == LogFormat.JSON:
        handler = _json_handler()
    else:
        handler = _console_handler(level)
    handler.setLevel(level)

    logger = logging.getLogger(BASE_LOGGER)
    logger.setLevel(level)
    logger.handlers.clear()
    logger.addHandler(handler)
    logger.propagate = False
    return logger


def get_logger(name: str | None = None) -> logging.Logger:
    """Child of the package logger; ``src.`` module prefixes are dropped.

    Example:
        >>> logger = get_logger(__name__)
        >>> logger.debug("Counted sample", extra={"unique_trees": 42})
    """
    if not name:
        return logging.getLogger(BASE_LOGGER)
    return logging.getLogger(f"{BASE_LOGGER}.{name.removeprefix(_PACKAGE_PREFIX)}")
