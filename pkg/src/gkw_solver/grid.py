# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

"""
Periodic uniform grids on flat tori, grid functions, and the second-order
operators built on them.

Fields store their values as an array of shape (N_1, ..., N_m, n): node-major in
row-major order, then component. The Laplacian uses the geometric (positive)
sign convention, Δf = -Σ ∂²f/∂x_i².
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Optional, Tuple

import numpy as np
import scipy.fft
from numpy.typing import NDArray
from pydantic import Field as PydanticField
from pydantic import model_validator

from gkw_solver import settings
from gkw_solver.exceptions import NonFiniteField, ZeroMeanViolation
from gkw_solver.schemas.base import GKWBaseModel
from gkw_solver.utils.logger import logger

FloatArray = NDArray[np.float64]

TWO_PI = 2.0 * math.pi


class PeriodicGrid(GKWBaseModel):
    """
    Uniform tensor grid on the flat torus T^m with periodic wraparound on every axis.
    """

    m: int = PydanticField(..., ge=1, le=4, description="Number of axes")
    N: Tuple[int, ...] = PydanticField(..., description="Points per axis (>= 4)")
    L: Tuple[float, ...] = PydanticField(default=(), description="Period lengths, 2*pi when omitted")
    leaf_volume: float = PydanticField(default=1.0, gt=0.0, description="Volume factor of collapsed leaf axes")

    @model_validator(mode="before")
    @classmethod
    def default_periods(cls, data: Any) -> Any:
        if isinstance(data, dict) and not data.get("L") and "m" in data:
            data = {**data, "L": tuple(TWO_PI for _ in range(int(data["m"])))}
        return data

    @model_validator(mode="after")
    def check_shape(self) -> "PeriodicGrid":
        if len(self.N) != self.m:
            raise ValueError(f"N has {len(self.N)} entries but m = {self.m}")
        if len(self.L) != self.m:
            raise ValueError(f"L has {len(self.L)} entries but m = {self.m}")
        for axis, (points, period) in enumerate(zip(self.N, self.L)):
            if points < 4:
                raise ValueError(f"Axis {axis} has {points} points; at least 4 are required")
            if not period > 0.0 or not math.isfinite(period):
                raise ValueError(f"Axis {axis} has non-positive period {period}")
        if self.size > settings.MAX_GRID_POINTS:
            raise ValueError(f"Grid has {self.size} points, above the budget of {settings.MAX_GRID_POINTS}")
        return self

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.N)

    @property
    def size(self) -> int:
        return math.prod(self.N)

    @property
    def spacings(self) -> Tuple[float, ...]:
        return tuple(period / points for period, points in zip(self.L, self.N))

    @property
    def cell_volume(self) -> float:
        return self.leaf_volume * math.prod(self.spacings)

    @property
    def volume(self) -> float:
        return self.cell_volume * self.size

    @property
    def axes(self) -> Tuple[int, ...]:
        return tuple(range(self.m))


@dataclass(frozen=True)
class Field:
    """
    An n-vector valued grid function. Values are read-only once constructed.
    """

    grid: PeriodicGrid
    values: FloatArray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.shape == self.grid.shape:
            values = values[..., np.newaxis]
        if values.ndim != self.grid.m + 1 or values.shape[:-1] != self.grid.shape:
            raise ValueError(f"Field values of shape {values.shape} do not fit grid shape {self.grid.shape}")
        if values.shape[-1] < 1:
            raise ValueError("Field must have at least one component")
        if not np.all(np.isfinite(values)):
            raise NonFiniteField(f"Field has {int(np.count_nonzero(~np.isfinite(values)))} non-finite entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return int(self.values.shape[-1])

    @property
    def data(self) -> FloatArray:
        """Flat node-major copy of the values."""
        return self.values.reshape(-1).copy()

    def component(self, index: int) -> "Field":
        return Field(self.grid, self.values[..., index : index + 1])

    def with_values(self, values: FloatArray) -> "Field":
        return Field(self.grid, values)

    @classmethod
    def zeros(cls, grid: PeriodicGrid, n: int = 1) -> "Field":
        return cls(grid, np.zeros(grid.shape + (n,)))

    @classmethod
    def constant(cls, grid: PeriodicGrid, value: Any) -> "Field":
        vector = np.atleast_1d(np.asarray(value, dtype=np.float64))
        return cls(grid, np.broadcast_to(vector, grid.shape + vector.shape).copy())


def node_coordinates(grid: PeriodicGrid) -> Tuple[FloatArray, ...]:
    """
    Coordinates x_1, ..., x_m of every node (x_i = k * h_i), each of the grid shape.
    """
    axes = [np.arange(points) * spacing for points, spacing in zip(grid.N, grid.spacings)]
    return tuple(np.meshgrid(*axes, indexing="ij"))


def apply_laplacian(values: FloatArray, grid: PeriodicGrid) -> FloatArray:
    """
    Centered second differences on an array of shape grid.shape + (n,).
    """
    out = np.zeros_like(values)
    for axis, spacing in zip(grid.axes, grid.spacings):
        out += (2.0 * values - np.roll(values, 1, axis=axis) - np.roll(values, -1, axis=axis)) / spacing**2
    return out


def laplacian(f: Field) -> Field:
    """
    Returns Δf componentwise; zero on constants, symmetric positive semidefinite.
    """
    return f.with_values(apply_laplacian(f.values, f.grid))


def forward_differences(values: FloatArray, grid: PeriodicGrid) -> Tuple[FloatArray, ...]:
    return tuple(
        (np.roll(values, -1, axis=axis) - values) / spacing for axis, spacing in zip(grid.axes, grid.spacings)
    )


def dirichlet_array(values: FloatArray, grid: PeriodicGrid) -> float:
    total = 0.0
    for diff in forward_differences(values, grid):
        total += float(np.sum(diff * diff))
    return 0.5 * total * grid.cell_volume


def dirichlet_energy(f: Field) -> float:
    """
    Half the sum over axes and nodes of squared forward differences, times cell volume.
    Equals half of the volume-weighted pairing <Δf, f> exactly (summation by parts).
    """
    return dirichlet_array(f.values, f.grid)


def integrate(f: Field) -> FloatArray:
    """
    Periodic trapezoid rule per component: nodewise sum times cell volume.
    """
    return np.sum(f.values.reshape(-1, f.n), axis=0) * f.grid.cell_volume


def inner(f: Field, g: Field) -> float:
    """
    Volume-weighted inner product Σ_nodes <f, g> * cell_volume.
    """
    if f.values.shape != g.values.shape:
        raise ValueError(f"Cannot pair fields of shapes {f.values.shape} and {g.values.shape}")
    return float(np.sum(f.values * g.values)) * f.grid.cell_volume


def sup_norm(f: Field) -> float:
    return float(np.max(np.abs(f.values)))


@lru_cache(maxsize=32)
def stencil_eigenvalues(grid: PeriodicGrid) -> FloatArray:
    """
    Eigenvalues of the discrete Laplacian in the DFT basis, Σ_i (2 - 2cos(2πk_i/N_i)) / h_i².
    """
    total = np.zeros(grid.shape)
    for axis, (points, spacing) in enumerate(zip(grid.N, grid.spacings)):
        k = np.arange(points)
        eig = (2.0 - 2.0 * np.cos(TWO_PI * k / points)) / spacing**2
        view = [1] * grid.m
        view[axis] = points
        total = total + eig.reshape(view)
    total.setflags(write=False)
    return total


def invert_laplacian(values: FloatArray, grid: PeriodicGrid, shift: float = 0.0) -> FloatArray:
    """
    Solves (Δ + shift) f = values mode by mode. With shift == 0 the zero mode is set to zero,
    so the caller is responsible for the mean of `values`.
    """
    axes = grid.axes
    spectrum = scipy.fft.fftn(values, axes=axes, workers=settings.THREADS)
    eig = stencil_eigenvalues(grid)[..., np.newaxis] + shift
    if shift == 0.0:
        eig = eig.copy()
        eig[(0,) * grid.m] = 1.0
        spectrum[(0,) * grid.m] = 0.0
    solution = scipy.fft.ifftn(spectrum / eig, axes=axes, workers=settings.THREADS)
    return np.ascontiguousarray(solution.real)


def poisson_solve(
    rhs: Field,
    shift: float = 0.0,
    strict: bool = False,
    tau_mean: Optional[float] = None,
) -> Field:
    """
    Returns the unique zero-mean f with Δf = rhs (or (Δ + shift) f = rhs when shift > 0).

    A nonzero mean of rhs is projected out and logged; in strict mode a mean above
    tau_mean (default 1e-10 * (1 + ||rhs||_inf)) raises ZeroMeanViolation.
    """
    if shift < 0.0:
        raise ValueError(f"Shift must be nonnegative, got {shift}")
    values = rhs.values
    if shift == 0.0:
        tolerance = tau_mean if tau_mean is not None else 1e-10 * (1.0 + sup_norm(rhs))
        means = integrate(rhs) / rhs.grid.volume
        worst = float(np.max(np.abs(means)))
        if worst > tolerance:
            if strict:
                logger.error(f"Poisson right-hand side has mean {worst:.3e} above {tolerance:.3e}")
                raise ZeroMeanViolation([float(x) for x in means], tolerance)
            logger.warning(f"Projecting out right-hand side mean {worst:.3e} before Poisson solve")
        values = values - means
    return rhs.with_values(invert_laplacian(values, rhs.grid, shift))
