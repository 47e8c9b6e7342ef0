# src/utils/logging.py

import logging
import sys

from config.settings import LOG_LEVEL

_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
_configured = False


def configure_logging(level: str = LOG_LEVEL) -> None:
    """
    Install a single stderr handler on the package root logger.
    Safe to call repeatedly; later calls only change the level.
    """
    global _configured
    root = logging.getLogger("src")

    if not _configured:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(_FORMAT))
        root.addHandler(handler)
        root.propagate = False
        _configured = True

    root.setLevel(level)


def get_logger(name: str) -> logging.Logger:
    configure_logging_once()
    return logging.getLogger(name)


def configure_logging_once() -> None:
    if not _configured:
        configure_logging()
