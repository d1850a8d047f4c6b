# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

"""
Cyclic Higgs data: the transverse Hitchin equation

    Δξ + Σ_j 4 k_j e^{<v_j, ξ>} v_j = rhs

with the cyclic weights v_j = e_{j+1} - e_j (j < r) and v_r = e_1 - e_r. Symmetric data
(k_j = k_{r-j}) keeps solutions in V = {x : x_j = -x_{r+1-j}, Σ x_j = 0}.
"""

import math
from dataclasses import dataclass
from typing import Literal, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from gkw_solver.cone import WeightSystem
from gkw_solver.exceptions import AsymmetricData, NegativeCoefficient
from gkw_solver.functional import ProblemInstance
from gkw_solver.grid import Field, PeriodicGrid, node_coordinates
from gkw_solver.utils.logger import logger

FloatArray = NDArray[np.float64]

Coordinates = Literal["V", "trace-zero", "full"]


def cyclic_weights(r: int) -> WeightSystem:
    if r < 2:
        raise ValueError(f"Rank must be at least 2, got {r}")
    v = np.zeros((r, r), dtype=np.int64)
    for j in range(r - 1):
        v[j, j + 1] = 1
        v[j, j] = -1
    v[r - 1, 0] = 1
    v[r - 1, r - 1] = -1
    return WeightSystem(v.astype(np.float64), tuple(f"v{j + 1}" for j in range(r)))


@dataclass(frozen=True)
class SymmetricSubspace:
    r: int
    basis: FloatArray

    @property
    def dim(self) -> int:
        return int(self.basis.shape[1])

    def constraint_defect(self) -> float:
        """Largest violation of x_j = -x_{r+1-j} and Σ x_j = 0 over the basis vectors."""
        antisymmetry = np.max(np.abs(self.basis + self.basis[::-1]), initial=0.0)
        trace = np.max(np.abs(np.sum(self.basis, axis=0)), initial=0.0)
        return float(max(antisymmetry, trace))


def symmetric_subspace(r: int) -> SymmetricSubspace:
    """
    Orthonormal basis (e_{r+1-j} - e_j) / sqrt(2), j = 1, ..., floor(r/2).
    """
    if r < 2:
        raise ValueError(f"Rank must be at least 2, got {r}")
    basis = np.zeros((r, r // 2))
    for j in range(r // 2):
        basis[r - 1 - j, j] = 1.0 / math.sqrt(2.0)
        basis[j, j] = -1.0 / math.sqrt(2.0)
    basis.setflags(write=False)
    return SymmetricSubspace(r, basis)


def trace_zero_basis(r: int) -> FloatArray:
    """Orthonormal basis of {x in R^r : Σ x_j = 0}, shape (r, r - 1)."""
    if r < 2:
        raise ValueError(f"Rank must be at least 2, got {r}")
    return np.asarray(scipy.linalg.null_space(np.ones((1, r))), dtype=np.float64)


def squared_modulus(grid: PeriodicGrid, terms: Sequence[Tuple[Sequence[int], complex]]) -> Field:
    """
    |q|^2 on the grid for the trigonometric polynomial q = Σ amplitude * exp(i 2π <k, x / L>).
    """
    coords = node_coordinates(grid)
    q = np.zeros(grid.shape, dtype=np.complex128)
    for frequency, amplitude in terms:
        if len(frequency) != grid.m:
            raise ValueError(f"Frequency {list(frequency)} has {len(frequency)} entries, grid has m = {grid.m}")
        phase = np.zeros(grid.shape)
        for axis, k in enumerate(frequency):
            phase += 2.0 * math.pi * k * coords[axis] / grid.L[axis]
        q += complex(amplitude) * np.exp(1j * phase)
    return Field(grid, np.abs(q) ** 2)


@dataclass(frozen=True)
class CyclicHiggsSpec:
    """
    Coefficients k_1..k_r (k_r = |q|^2) and the right-hand side, all supplied as fields.
    """

    r: int
    k: Tuple[Field, ...]
    rhs: Field
    symmetric: bool = True
    tau_sym: float = 1e-10

    def __post_init__(self) -> None:
        object.__setattr__(self, "k", tuple(self.k))
        if self.r < 2:
            raise ValueError(f"Rank must be at least 2, got {self.r}")
        if len(self.k) != self.r:
            raise ValueError(f"Expected {self.r} coefficients k_j, got {len(self.k)}")
        if self.rhs.n != self.r:
            raise ValueError(f"Right-hand side has {self.rhs.n} components, expected {self.r}")
        for j, coefficient in enumerate(self.k):
            if coefficient.n != 1:
                raise ValueError(f"k[{j + 1}] must be scalar")
            minimum = float(np.min(coefficient.values))
            if minimum < 0.0:
                raise NegativeCoefficient(j, minimum)
        if self.symmetric:
            defect = self.symmetry_defect()
            if defect > self.tau_sym:
                logger.error(f"Cyclic data flagged symmetric has k_j - k_(r-j) defect {defect:.3e}")
                raise AsymmetricData(f"k_j != k_(r-j): defect {defect:.3e} exceeds {self.tau_sym:.1e}")

    @property
    def grid(self) -> PeriodicGrid:
        return self.rhs.grid

    def symmetry_defect(self) -> float:
        worst = 0.0
        for j in range(1, self.r):
            mirror = self.r - j
            diff = self.k[j - 1].values - self.k[mirror - 1].values
            worst = max(worst, float(np.max(np.abs(diff))))
        return worst


def build_instance(spec: CyclicHiggsSpec, coordinates: Optional[Coordinates] = None) -> ProblemInstance:
    """
    Instance with weights v_j, coefficients a_j = 4 k_j and w = rhs.

    Symmetric data defaults to coordinates on V; otherwise the full R^r is used, where the
    trace direction is the only kernel direction. "trace-zero" restricts to Σ ξ_j = 0.
    """
    chosen: Coordinates = coordinates or ("V" if spec.symmetric else "full")
    values = spec.rhs.values.reshape(-1, spec.r)
    scale = 1.0 + float(np.max(np.abs(values)))
    subspace: Optional[FloatArray] = None
    if chosen == "V":
        if not spec.symmetric:
            raise AsymmetricData("Coordinates on V require symmetric data")
        subspace = symmetric_subspace(spec.r).basis
    elif chosen == "trace-zero":
        subspace = trace_zero_basis(spec.r)
    if subspace is not None:
        outside = values - (values @ subspace) @ subspace.T
        leak = float(np.max(np.abs(outside)))
        if leak > spec.tau_sym * scale:
            logger.error(f"Right-hand side leaves the {chosen} subspace by {leak:.3e}")
            raise AsymmetricData(f"Right-hand side has a component of size {leak:.3e} outside {chosen}")
    a = tuple(coefficient.with_values(4.0 * coefficient.values) for coefficient in spec.k)
    logger.debug(f"Cyclic Higgs instance r={spec.r} in {chosen} coordinates")
    return ProblemInstance(spec.grid, cyclic_weights(spec.r), a, spec.rhs, subspace, name="cyclic-higgs")


def check_symmetry(xi: Field, r: int) -> float:
    """max over nodes and j of |ξ_j + ξ_{r+1-j}|."""
    if xi.n != r:
        raise ValueError(f"Field has {xi.n} components, expected {r}")
    return float(np.max(np.abs(xi.values + xi.values[..., ::-1])))
