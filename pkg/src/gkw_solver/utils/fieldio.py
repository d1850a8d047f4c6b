# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

"""
The .gkwf field format: one UTF-8 JSON header line {"m", "N", "L", "n"} followed by the
values as little-endian float64, node-major in row-major order, then component.
"""

import json
import math
from pathlib import Path
from typing import Union

import numpy as np

from gkw_solver.grid import Field, PeriodicGrid
from gkw_solver.utils.logger import logger

FIELD_SUFFIX = ".gkwf"
_DTYPE = np.dtype("<f8")


def write_field(f: Field, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {"m": f.grid.m, "N": list(f.grid.N), "L": list(f.grid.L), "n": f.n}
    with open(path, "wb") as handle:
        handle.write(json.dumps(header, separators=(",", ":")).encode("utf-8") + b"\n")
        handle.write(np.ascontiguousarray(f.values, dtype=_DTYPE).tobytes(order="C"))
    logger.debug(f"Wrote field {f.grid.shape}x{f.n} to {path}")
    return path


def read_field(path: Union[str, Path]) -> Field:
    """
    Raises ValueError when the header is malformed or the payload size does not match it.
    """
    path = Path(path)
    raw = path.read_bytes()
    newline = raw.find(b"\n")
    if newline < 0:
        raise ValueError(f"{path}: missing header line")
    try:
        header = json.loads(raw[:newline].decode("utf-8"))
        grid = PeriodicGrid(m=int(header["m"]), N=tuple(header["N"]), L=tuple(header["L"]))
        n = int(header["n"])
    except (KeyError, TypeError, UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ValueError(f"{path}: malformed header: {e}") from e
    payload = raw[newline + 1 :]
    expected = math.prod(grid.N) * n * _DTYPE.itemsize
    if len(payload) != expected:
        raise ValueError(f"{path}: payload has {len(payload)} bytes, header implies {expected}")
    values = np.frombuffer(payload, dtype=_DTYPE).reshape(grid.shape + (n,))
    return Field(grid, values.astype(np.float64))
