# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

import json
import math
from pathlib import Path

import numpy as np
import pytest

from gkw_solver.grid import Field, PeriodicGrid
from gkw_solver.utils.fieldio import read_field, write_field


def test_layout_is_documented(tmp_path: Path) -> None:
    """Test the header and payload layout of field files."""
    grid = PeriodicGrid(m=2, N=(4, 5), L=(1.0, 2.0))
    values = np.arange(4 * 5 * 3, dtype=np.float64).reshape(4, 5, 3)
    path = write_field(Field(grid, values), tmp_path / "f.gkwf")
    raw = path.read_bytes()
    newline = raw.index(b"\n")
    assert json.loads(raw[:newline]) == {"m": 2, "N": [4, 5], "L": [1.0, 2.0], "n": 3}
    payload = np.frombuffer(raw[newline + 1 :], dtype="<f8")
    # node-major, row-major over nodes, component last
    assert payload[0] == values[0, 0, 0]
    assert payload[1] == values[0, 0, 1]
    assert payload[3] == values[0, 1, 0]
    assert payload[15] == values[1, 0, 0]


def test_read_back_exactly(tmp_path: Path) -> None:
    """Test that fields read back bit for bit."""
    grid = PeriodicGrid(m=1, N=(16,))
    rng = np.random.default_rng(5)
    f = Field(grid, rng.normal(size=(16, 2)))
    g = read_field(write_field(f, tmp_path / "nested" / "f.gkwf"))
    assert g.grid == grid
    assert g.grid.L == (2 * math.pi,)
    assert np.array_equal(g.values, f.values)


def test_rejects_missing_header(tmp_path: Path) -> None:
    """Test a file without a header line."""
    path = tmp_path / "bad.gkwf"
    path.write_bytes(b"no header")
    with pytest.raises(ValueError):
        read_field(path)


def test_rejects_malformed_header(tmp_path: Path) -> None:
    """Test a header that is not valid."""
    path = tmp_path / "bad.gkwf"
    path.write_bytes(b'{"m": 1}\n')
    with pytest.raises(ValueError):
        read_field(path)


def test_rejects_truncated_payload(tmp_path: Path) -> None:
    """Test a payload of the wrong length."""
    grid = PeriodicGrid(m=1, N=(8,))
    path = write_field(Field.zeros(grid), tmp_path / "f.gkwf")
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ValueError) as excinfo:
        read_field(path)
    assert "payload" in str(excinfo.value)
