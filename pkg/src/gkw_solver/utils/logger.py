# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

"""
Process-wide loguru setup: a colourised stderr sink and a JSON-lines file sink.
"""

import os
import sys
from typing import Optional

from loguru import logger

LOG_LEVEL = os.getenv("GKW_LOG_LEVEL", "INFO").upper()
LOG_FILE_PATH = os.getenv("GKW_LOG_FILE", "logs/gkw.log")

STDERR_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
    "<level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - "
    "<level>{message}</level>"
)


def configure(level: Optional[str] = None, log_file: Optional[str] = None) -> None:
    """
    Replaces every sink. An empty `log_file` disables the file sink.
    """
    level = (level or LOG_LEVEL).upper()
    log_file = LOG_FILE_PATH if log_file is None else log_file
    logger.remove()
    logger.add(sys.stderr, level=level, format=STDERR_FORMAT)
    if log_file:
        os.makedirs(os.path.dirname(log_file) or ".", exist_ok=True)
        logger.add(
            log_file,
            level=level,
            rotation="500 MB",
            retention="10 days",
            serialize=True,
            enqueue=True,
        )


configure()

__all__ = ["configure", "logger"]
