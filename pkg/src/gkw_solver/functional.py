# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

"""
The discretized generalized Kazdan-Warner operator

    R(ξ) = Δξ + Σ_j a_j e^{<u_j, ξ>} u_j - w,

its energy E (whose volume-weighted gradient is R) and the Hessian action.

Array-level helpers (`*_array`) take raw values of shape grid.shape + (n,) and are what
the solver calls in its inner loop; the public functions wrap them for Fields.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from gkw_solver import settings
from gkw_solver.cone import ActiveSet, WeightSystem, active_set, cone_membership, kernel_basis
from gkw_solver.exceptions import ExponentOverflow, NegativeCoefficient
from gkw_solver.grid import (
    Field,
    PeriodicGrid,
    apply_laplacian,
    dirichlet_array,
    integrate,
)
from gkw_solver.schemas.reports import ValidationReport
from gkw_solver.utils.logger import logger

FloatArray = NDArray[np.float64]


@dataclass(frozen=True)
class ProblemInstance:
    """
    Data of one equation on a periodic grid.

    `subspace`, when given, is an orthonormal basis Q (n x p, as columns) of the value space
    the unknown is restricted to: ξ = Q η. It is the identity when absent.
    """

    grid: PeriodicGrid
    ws: WeightSystem
    a: Tuple[Field, ...]
    w: Field
    subspace: Optional[FloatArray] = None
    tau_active: float = 0.0
    name: str = "explicit"

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", tuple(self.a))
        if len(self.a) != self.ws.d:
            raise ValueError(f"Got {len(self.a)} coefficients for {self.ws.d} weights")
        for j, coefficient in enumerate(self.a):
            if coefficient.grid != self.grid:
                raise ValueError(f"Coefficient a[{j}] lives on a different grid")
            if coefficient.n != 1:
                raise ValueError(f"Coefficient a[{j}] must be scalar, got {coefficient.n} components")
        if self.w.grid != self.grid:
            raise ValueError("Right-hand side lives on a different grid")
        if self.w.n != self.ws.n:
            raise ValueError(f"Right-hand side has {self.w.n} components but weights live in R^{self.ws.n}")
        if self.subspace is not None:
            basis = np.array(self.subspace, dtype=np.float64)
            if basis.ndim != 2 or basis.shape[0] != self.ws.n or basis.shape[1] < 1:
                raise ValueError(f"Subspace basis of shape {basis.shape} does not fit R^{self.ws.n}")
            if not np.allclose(basis.T @ basis, np.eye(basis.shape[1]), atol=1e-12):
                raise ValueError("Subspace basis must be orthonormal")
            basis.setflags(write=False)
            object.__setattr__(self, "subspace", basis)

    @property
    def n(self) -> int:
        return self.ws.n

    @property
    def d(self) -> int:
        return self.ws.d

    @cached_property
    def W(self) -> FloatArray:
        """Integrated right-hand side ∫ w vol."""
        return integrate(self.w)

    @cached_property
    def coefficients(self) -> FloatArray:
        """All a_j stacked along the last axis, shape grid.shape + (d,)."""
        if not self.a:
            return np.zeros(self.grid.shape + (0,))
        return np.concatenate([coefficient.values for coefficient in self.a], axis=-1)

    @cached_property
    def support(self) -> Tuple[int, ...]:
        """Indices j with a_j not identically zero; only these exponentials are evaluated."""
        if not self.a:
            return ()
        peaks = np.max(np.abs(self.coefficients.reshape(-1, self.d)), axis=0)
        return tuple(int(j) for j in np.flatnonzero(peaks > 0.0))

    @cached_property
    def active(self) -> ActiveSet:
        return active_set(self.a, self.tau_active)

    @property
    def basis(self) -> FloatArray:
        return self.subspace if self.subspace is not None else np.eye(self.n)

    @cached_property
    def reduced_weights(self) -> WeightSystem:
        """Weights in subspace coordinates, Q^T u_j."""
        return self.ws if self.subspace is None else self.ws.project(self.subspace)

    @cached_property
    def reduced_W(self) -> FloatArray:
        return self.W if self.subspace is None else self.subspace.T @ self.W

    def make_field(self, values: FloatArray) -> Field:
        return Field(self.grid, values)


def coefficient_terms(inst: ProblemInstance, values: FloatArray) -> FloatArray:
    """
    Nodewise b_j = a_j e^{<u_j, ξ>}, shape grid.shape + (d,). Terms with a_j ≡ 0 are zero.
    """
    out = np.zeros(inst.grid.shape + (inst.d,))
    support = list(inst.support)
    if not support:
        return out
    exponents = values @ inst.ws.u[support].T
    peak = float(np.max(exponents))
    if peak > settings.EXPONENT_LIMIT:
        worst = support[int(np.argmax(np.max(exponents.reshape(-1, len(support)), axis=0)))]
        logger.debug(f"Exponent guard tripped for weight {worst}: {peak:.3e}")
        raise ExponentOverflow(worst, peak, settings.EXPONENT_LIMIT)
    out[..., support] = inst.coefficients[..., support] * np.exp(exponents)
    return out


def residual_array(inst: ProblemInstance, values: FloatArray) -> FloatArray:
    terms = coefficient_terms(inst, values)
    return apply_laplacian(values, inst.grid) + terms @ inst.ws.u - inst.w.values


def energy_array(inst: ProblemInstance, values: FloatArray) -> float:
    terms = coefficient_terms(inst, values)
    bulk = float(np.sum(terms)) - float(np.sum(inst.w.values * values))
    return dirichlet_array(values, inst.grid) + bulk * inst.grid.cell_volume


def hessian_array(inst: ProblemInstance, terms: FloatArray, direction: FloatArray) -> FloatArray:
    """
    H η = Δη + Σ_j b_j <u_j, η> u_j for precomputed b_j = a_j e^{<u_j, ξ>}.
    """
    u = inst.ws.u
    return apply_laplacian(direction, inst.grid) + (terms * (direction @ u.T)) @ u


def residual(inst: ProblemInstance, xi: Field) -> Field:
    """
    R(ξ) = Δξ + Σ_j a_j e^{<u_j, ξ>} u_j - w, nodewise.
    """
    _check_compatible(inst, xi)
    return inst.make_field(residual_array(inst, xi.values))


def energy(inst: ProblemInstance, xi: Field) -> float:
    """
    E(ξ) = dirichlet_energy(ξ) + Σ_j ∫ a_j e^{<u_j, ξ>} vol - ∫ <w, ξ> vol.

    Convex; its first variation in the volume-weighted inner product is `residual`.
    """
    _check_compatible(inst, xi)
    return energy_array(inst, xi.values)


def hessian_apply(inst: ProblemInstance, xi: Field, eta: Field) -> Field:
    _check_compatible(inst, xi)
    _check_compatible(inst, eta)
    terms = coefficient_terms(inst, xi.values)
    return inst.make_field(hessian_array(inst, terms, eta.values))


def integrated_weights(inst: ProblemInstance, xi: Field) -> FloatArray:
    """
    c_j = ∫ a_j e^{<u_j, ξ>} vol. A solution satisfies Σ_j c_j u_j = W.
    """
    _check_compatible(inst, xi)
    terms = coefficient_terms(inst, xi.values)
    return np.sum(terms.reshape(-1, inst.d), axis=0) * inst.grid.cell_volume


def validate(
    inst: ProblemInstance,
    strict: bool = True,
    tau_cone: Optional[float] = None,
    tau_rank: float = 1e-10,
) -> ValidationReport:
    """
    Checks coefficient signs, measures degeneracy, and certifies the cone condition for W.

    In strict mode a negative coefficient raises NegativeCoefficient; otherwise the report
    lists the failing verdicts and carries no certificate. With a subspace the cone test runs
    in subspace coordinates.
    """
    minima = [float(np.min(coefficient.values)) for coefficient in inst.a]
    nonnegative = [minimum >= 0.0 for minimum in minima]
    integral_w = [float(x) for x in inst.W]
    if not all(nonnegative):
        index = nonnegative.index(False)
        if strict:
            logger.error(f"Validation failed: coefficient a[{index}] is negative")
            raise NegativeCoefficient(index, minima[index])
        failing = [i for i, ok in enumerate(nonnegative) if not ok]
        logger.warning(f"Validation found negative coefficients at indices {failing}")
        return ValidationReport(
            nonnegative=nonnegative,
            coefficient_minimum=minima,
            degeneracy_fraction=[],
            active=[],
            tau_active=inst.tau_active,
            integral_w=integral_w,
            certificate=None,
        )

    active = inst.active
    certificate = cone_membership(inst.reduced_W, inst.reduced_weights, active, tau_cone, tau_rank)
    logger.info(f"Validated '{inst.name}': active {list(active.indices)}, verdict {certificate.verdict.value}")
    return ValidationReport(
        nonnegative=nonnegative,
        coefficient_minimum=minima,
        degeneracy_fraction=list(active.degeneracy),
        active=list(active.indices),
        tau_active=inst.tau_active,
        integral_w=integral_w,
        certificate=certificate,
    )


def instance_kernel(inst: ProblemInstance, tau_rank: float = 1e-10) -> FloatArray:
    """Kernel directions in subspace coordinates (p x q)."""
    return kernel_basis(inst.reduced_weights, inst.active, tau_rank)


def kazdan_warner_instance(grid: PeriodicGrid, h: Field, c: Field) -> ProblemInstance:
    """
    The scalar equation Δξ + h e^ξ = c (n = d = 1, u = 1).
    """
    return ProblemInstance(grid, WeightSystem(np.ones((1, 1)), ("u1",)), (h,), c, name="kazdan-warner")


def explicit_instance(
    grid: PeriodicGrid,
    weights: Sequence[Sequence[float]],
    a: Sequence[Field],
    w: Field,
    tau_active: float = 0.0,
) -> ProblemInstance:
    return ProblemInstance(grid, WeightSystem(np.asarray(weights, dtype=np.float64)), tuple(a), w, None, tau_active)


def _check_compatible(inst: ProblemInstance, xi: Field) -> None:
    if xi.grid != inst.grid:
        raise ValueError("Field lives on a different grid than the instance")
    if xi.n != inst.n:
        raise ValueError(f"Field has {xi.n} components, instance expects {inst.n}")
