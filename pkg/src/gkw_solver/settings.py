# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

"""
Process-level knobs read once from the environment.
"""

import os

from gkw_solver.utils.logger import logger


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer {name}={raw!r}; using {default}")
        return default
    if value < 1:
        logger.warning(f"Ignoring non-positive {name}={value}; using {default}")
        return default
    return value


# Worker count handed to scipy.fft (the only data-parallel kernel with a thread pool).
THREADS = _int_env("GKW_THREADS", 1)

# Upper bound on the number of grid nodes; fields of any component count share it.
MAX_GRID_POINTS = _int_env("GKW_MAX_GRID_POINTS", 2**22)

# Exponents above this raise ExponentOverflow instead of producing inf.
EXPONENT_LIMIT = 700.0

__all__ = ["EXPONENT_LIMIT", "MAX_GRID_POINTS", "THREADS"]
