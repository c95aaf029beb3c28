"""
Process-wide logging configuration: one key=value line per record on stderr.
"""

import logging
import os
import sys
from typing import Optional

LOG_LEVEL_ENV = "CANOPYSIM_LOG_LEVEL"
LOG_FORMAT = "ts=%(asctime)s level=%(levelname)s logger=%(name)s msg=%(message)s"


def configure_logging(level: Optional[str] = None) -> None:
    """Install the key=value formatter on the root logger.

    *level* defaults to $CANOPYSIM_LOG_LEVEL, then INFO. Calling again replaces
    the handler instead of stacking a second one.
    """
    name = (level or os.environ.get(LOG_LEVEL_ENV) or "INFO").upper()
    resolved = logging.getLevelName(name)
    if not isinstance(resolved, int):
        raise ValueError(f"unknown log level {name!r}")
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root = logging.getLogger()
    for existing in list(root.handlers):
        if getattr(existing, "_canopysim", False):
            root.removeHandler(existing)
    handler._canopysim = True  # type: ignore[attr-defined]
    root.addHandler(handler)
    root.setLevel(resolved)
