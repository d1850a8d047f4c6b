# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

"""
Projected Newton-Krylov minimization of the convex energy.

Each step solves H(ξ) δ = -R(ξ) with preconditioned conjugate gradients on the complement of
the kernel constants, then backtracks on the energy (Armijo). Existence is decided up front by
the cone certificate; the iteration never guesses it from failure.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray
from pydantic import Field as PydanticField
from pydantic import model_validator
from scipy.sparse.linalg import LinearOperator, cg

from gkw_solver.cone import ActiveSet, WeightSystem, kernel_basis
from gkw_solver.exceptions import ExponentOverflow, InconsistencyDetected, NearBoundary
from gkw_solver.functional import (
    ProblemInstance,
    coefficient_terms,
    energy_array,
    hessian_array,
    instance_kernel,
    integrated_weights,
    residual_array,
    validate,
)
from gkw_solver.grid import Field, PeriodicGrid, invert_laplacian, node_coordinates, sup_norm
from gkw_solver.schemas.base import GKWBaseModel
from gkw_solver.schemas.reports import (
    ConeCertificate,
    IterationRecord,
    SolveStatus,
    SolveSummary,
    Verdict,
    VerificationReport,
)
from gkw_solver.utils.logger import logger

FloatArray = NDArray[np.float64]


class SolveOptions(GKWBaseModel):
    """
    Newton-Krylov controls. `tol_residual` defaults to 1e-10 * (1 + ||w||_inf).
    """

    tol_residual: Optional[float] = PydanticField(default=None, gt=0.0)
    max_newton: int = PydanticField(default=100, ge=1)
    cg_maxiter: int = PydanticField(default=500, ge=1)
    armijo_c1: float = PydanticField(default=1e-4, gt=0.0, lt=1.0)
    backtrack: float = PydanticField(default=0.5, gt=0.0, lt=1.0)
    max_backtracks: int = PydanticField(default=40, ge=1)
    divergence_norm: float = PydanticField(default=1e3, gt=0.0)
    seed: Optional[int] = PydanticField(default=None, ge=0)
    audit: bool = False

    @model_validator(mode="after")
    def check_audit_budget(self) -> "SolveOptions":
        if self.audit and self.max_newton < 2:
            raise ValueError("Audit mode needs at least two iterations to exhibit divergence")
        return self

    def tolerance(self, inst: ProblemInstance) -> float:
        if self.tol_residual is not None:
            return self.tol_residual
        return 1e-10 * (1.0 + sup_norm(inst.w))


@dataclass(frozen=True)
class SolveOutcome:
    """
    Result of `solve`. `xi` is in normal form; `raw` is the iterate before normalization.
    """

    status: SolveStatus
    certificate: ConeCertificate
    tolerance: float
    xi: Optional[Field] = None
    raw: Optional[Field] = None
    residual_inf: Optional[float] = None
    diagnostics: List[IterationRecord] = field(default_factory=list)
    audit: bool = False
    audit_confirmed: Optional[bool] = None

    @property
    def iterations(self) -> int:
        return max(len(self.diagnostics) - 1, 0)

    def summary(self) -> SolveSummary:
        return SolveSummary(
            status=self.status,
            iterations=self.iterations,
            residual_inf=self.residual_inf,
            tolerance=self.tolerance,
            audit=self.audit,
            audit_confirmed=self.audit_confirmed,
            certificate=self.certificate,
            diagnostics=list(self.diagnostics),
        )


def random_initial_field(grid: PeriodicGrid, n: int, seed: int, scale: float = 1.0) -> Field:
    """
    Seeded random start: a few low Fourier modes per component with amplitude `scale`.
    """
    rng = np.random.default_rng(seed)

    coords = node_coordinates(grid)
    values = np.zeros(grid.shape + (n,))
    for component in range(n):
        values[..., component] = rng.normal() * scale
        for axis, x in enumerate(coords):
            wave = 2.0 * np.pi * x / grid.L[axis]
            for k in (1, 2):
                values[..., component] += scale * (rng.normal() * np.cos(k * wave) + rng.normal() * np.sin(k * wave))
    return Field(grid, values)


def normalize(xi: Field, ws: WeightSystem, active: ActiveSet, tau_rank: float = 1e-10) -> Field:
    """
    Subtracts the volume mean of ξ along every kernel direction, so the kernel component is zero.
    """
    kernel = kernel_basis(ws, active, tau_rank)
    if kernel.shape[1] == 0:
        return xi
    means = np.mean(xi.values.reshape(-1, xi.n), axis=0)
    return xi.with_values(xi.values - kernel @ (kernel.T @ means))


def verify_solution(inst: ProblemInstance, xi: Field, tol_residual: Optional[float] = None) -> VerificationReport:
    """
    Residual size plus the integrated identity Σ_j c_j u_j = W with c_j = ∫ a_j e^{<u_j, ξ>} vol.
    """
    tolerance = tol_residual if tol_residual is not None else 1e-10 * (1.0 + sup_norm(inst.w))
    residual_inf = float(np.max(np.abs(residual_array(inst, xi.values))))
    c = integrated_weights(inst, xi)
    identity_defect = float(np.max(np.abs(c @ inst.ws.u - inst.W), initial=0.0))
    kernel = kernel_basis(inst.ws, inst.active)
    means = np.mean(xi.values.reshape(-1, xi.n), axis=0)
    kernel_component = float(np.max(np.abs(kernel.T @ means), initial=0.0))
    report = VerificationReport(
        residual_inf=residual_inf,
        tolerance=tolerance,
        integrated_weights=[float(x) for x in c],
        identity_defect=identity_defect,
        positive=[bool(c[j] > 0.0) for j in inst.active.indices],
        kernel_component=kernel_component,
        integral_w=[float(x) for x in inst.W],
    )
    if not report.is_solution:
        logger.warning(f"Verification: residual {residual_inf:.3e} above tolerance {tolerance:.3e}")
    return report


class _ReducedProblem:
    """
    The instance in subspace coordinates η (ξ = Q η), flattened for scipy.
    """

    def __init__(self, inst: ProblemInstance, tau_rank: float) -> None:
        self.inst = inst
        self.grid = inst.grid
        self.Q = inst.subspace
        self.p = inst.n if self.Q is None else self.Q.shape[1]
        self.kernel = instance_kernel(inst, tau_rank)
        self.shape = self.grid.shape + (self.p,)
        self.size = self.grid.size * self.p

    def full(self, eta: FloatArray) -> FloatArray:
        return eta if self.Q is None else eta @ self.Q.T

    def reduced(self, values: FloatArray) -> FloatArray:
        return values if self.Q is None else values @ self.Q

    def project(self, eta: FloatArray) -> FloatArray:
        """Removes the mean along kernel directions."""
        if self.kernel.shape[1] == 0:
            return eta
        means = np.mean(eta.reshape(-1, self.p), axis=0)
        return eta - self.kernel @ (self.kernel.T @ means)

    def kernel_gradient(self, gradient: FloatArray) -> FloatArray:
        """Constant field along kernel directions carrying the mean of the gradient there."""
        if self.kernel.shape[1] == 0:
            return np.zeros_like(gradient)
        means = np.mean(gradient.reshape(-1, self.p), axis=0)
        return np.broadcast_to(self.kernel @ (self.kernel.T @ means), gradient.shape).copy()

    def energy(self, eta: FloatArray) -> float:
        return energy_array(self.inst, self.full(eta))

    def gradient(self, eta: FloatArray) -> Tuple[FloatArray, FloatArray]:
        """Returns (full residual, residual in subspace coordinates)."""
        full_residual = residual_array(self.inst, self.full(eta))
        return full_residual, self.reduced(full_residual)

    def newton_direction(
        self, eta: FloatArray, gradient: FloatArray, rtol: float, maxiter: int
    ) -> Tuple[FloatArray, int]:
        terms = coefficient_terms(self.inst, self.full(eta))
        u = self.inst.reduced_weights.u
        sigma = float(np.mean(terms @ np.sum(u * u, axis=1))) / self.p

        def operator(v: FloatArray) -> FloatArray:
            direction = self.project(v.reshape(self.shape))
            applied = self.reduced(hessian_array(self.inst, terms, self.full(direction)))
            return self.project(applied).reshape(-1)

        def preconditioner(v: FloatArray) -> FloatArray:
            values = self.project(v.reshape(self.shape))
            return self.project(invert_laplacian(values, self.grid, sigma)).reshape(-1)

        A = LinearOperator((self.size, self.size), matvec=operator, rmatvec=operator, dtype=float)
        M = LinearOperator((self.size, self.size), matvec=preconditioner, rmatvec=preconditioner, dtype=float)
        rhs = -self.project(gradient).reshape(-1)
        count = [0]

        def callback(_: FloatArray) -> None:
            count[0] += 1

        step, info = cg(A, rhs, rtol=rtol, atol=0.0, maxiter=maxiter, M=M, callback=callback)
        if info > 0:
            logger.debug(f"CG stopped after {info} iterations without reaching rtol {rtol:.2e}")
        step = self.project(np.asarray(step).reshape(self.shape))
        if float(np.sum(step * gradient)) >= 0.0:
            logger.debug("CG direction is not a descent direction; using the preconditioned gradient")
            step = -self.project(invert_laplacian(self.project(gradient), self.grid, sigma))
        return step, count[0]


def _inf(values: FloatArray) -> float:
    return float(np.max(np.abs(values)))


def _line_search(
    problem: _ReducedProblem,
    eta: FloatArray,
    direction: FloatArray,
    energy0: float,
    slope: float,
    gradient: FloatArray,
    opts: SolveOptions,
) -> Tuple[Optional[FloatArray], float]:
    """
    Backtracking on the energy. A trial whose exponent overflows counts as +inf.

    While the predicted decrease t·|slope| is above rounding, a step needs strict energy
    decrease and the Armijo condition. Below rounding the energy cannot tell steps apart, so a
    step is accepted when its energy stays within rounding of energy0 and the Euclidean norm of
    the gradient drops. A trial that leaves the iterate unchanged is never accepted.
    """
    noise = 1e3 * np.finfo(float).eps * (1.0 + abs(energy0))
    gradient_l2 = float(np.linalg.norm(gradient))
    t = 1.0
    for _ in range(opts.max_backtracks):
        trial = eta + t * direction
        if np.array_equal(trial, eta):
            break
        try:
            trial_energy = problem.energy(trial)
        except ExponentOverflow:
            trial_energy = np.inf
        if abs(t * slope) > noise:
            if trial_energy < energy0 and trial_energy <= energy0 + opts.armijo_c1 * t * slope:
                return trial, t
        elif np.isfinite(trial_energy) and trial_energy <= energy0 + noise:
            try:
                _, trial_gradient = problem.gradient(trial)
            except ExponentOverflow:
                trial_gradient = None
            if trial_gradient is not None and float(np.linalg.norm(trial_gradient)) < gradient_l2:
                logger.debug(f"Energy at rounding level; accepting residual-decreasing step {t:.3e}")
                return trial, t
        t *= opts.backtrack
    return None, 0.0


def solve(
    inst: ProblemInstance,
    opts: Optional[SolveOptions] = None,
    xi0: Optional[Field] = None,
    certificate: Optional[ConeCertificate] = None,
    tau_rank: float = 1e-10,
) -> SolveOutcome:
    """
    Minimizes the energy of `inst` and returns the normalized solution when the cone
    certificate says Inside.

    Outside instances return NoSolutionCertified immediately unless `opts.audit` is set,
    in which case the minimizer runs until the iterate norm exceeds `divergence_norm`.
    """
    opts = opts or SolveOptions()
    if certificate is None:
        report = validate(inst, strict=True, tau_rank=tau_rank)
        assert report.certificate is not None
        certificate = report.certificate
    tolerance = opts.tolerance(inst)
    outside = certificate.verdict is Verdict.OUTSIDE

    if outside and not opts.audit:
        logger.info(f"Solve '{inst.name}': certificate Outside, no solution exists")
        return SolveOutcome(SolveStatus.NO_SOLUTION_CERTIFIED, certificate, tolerance)
    if not outside and certificate.margin is not None and certificate.margin <= 10.0 * certificate.tau_cone:
        if not opts.audit:
            logger.error(f"Cone margin {certificate.margin:.3e} is near the boundary; strict mode refuses")
            raise NearBoundary(certificate.margin, 10.0 * certificate.tau_cone)
        logger.warning(f"Cone margin {certificate.margin:.3e} is near the boundary; solving in audit mode")

    problem = _ReducedProblem(inst, tau_rank)
    if xi0 is not None:
        if xi0.grid != inst.grid or xi0.n != inst.n:
            raise ValueError("Initial field does not match the instance")
        eta = problem.reduced(np.array(xi0.values))
    else:
        eta = np.zeros(problem.shape)

    diagnostics: List[IterationRecord] = []
    step_length = 0.0
    cg_iters = 0
    kernel_step = 1.0
    energy_start: Optional[float] = None
    logger.info(f"Solve '{inst.name}' on grid {inst.grid.shape}: tol {tolerance:.3e}, audit={opts.audit}")

    for iteration in range(opts.max_newton + 1):
        try:
            full_residual, gradient = problem.gradient(eta)
            current_energy = problem.energy(eta)
        except ExponentOverflow as exc:
            logger.error(f"Iterate overflowed at iteration {iteration}: {exc}")
            return SolveOutcome(
                SolveStatus.DIVERGED, certificate, tolerance, diagnostics=diagnostics, audit=opts.audit
            )
        residual_inf = _inf(full_residual)
        norm = _inf(problem.full(eta))
        if energy_start is None:
            energy_start = current_energy
        diagnostics.append(IterationRecord(
            iteration=iteration,
            energy=current_energy,
            residual_inf=residual_inf,
            step_length=step_length,
            cg_iters=cg_iters,
            sup_norm=norm,
        ))
        logger.info(f"Newton {iteration}: E={current_energy:.12e} |R|={residual_inf:.3e} step={step_length:.3e}")

        if outside:
            if norm > opts.divergence_norm:
                energies = [record.energy for record in diagnostics]
                decreasing = all(b <= a for a, b in zip(energies, energies[1:]))
                confirmed = decreasing and current_energy < energy_start
                logger.info(f"Audit: |xi| = {norm:.3e} crossed {opts.divergence_norm:.1e}; confirmed={confirmed}")
                return SolveOutcome(
                    SolveStatus.NO_SOLUTION_CERTIFIED,
                    certificate,
                    tolerance,
                    raw=Field(inst.grid, problem.full(eta)),
                    residual_inf=residual_inf,
                    diagnostics=diagnostics,
                    audit=True,
                    audit_confirmed=confirmed,
                )
            if residual_inf <= tolerance:
                logger.error("Audit run converged although the certificate says Outside")
                raise InconsistencyDetected(
                    "Minimizer converged on an Outside instance",
                    {"residual_inf": residual_inf, "certificate": certificate.model_dump(mode="json")},
                )
        else:
            if residual_inf <= tolerance:
                raw = Field(inst.grid, problem.full(eta))
                xi = Field(inst.grid, problem.full(problem.project(eta)))
                logger.info(f"Solve '{inst.name}' converged in {iteration} Newton steps")
                return SolveOutcome(
                    SolveStatus.SOLUTION,
                    certificate,
                    tolerance,
                    xi=xi,
                    raw=raw,
                    residual_inf=residual_inf,
                    diagnostics=diagnostics,
                    audit=opts.audit,
                )
            if norm > opts.divergence_norm:
                logger.error(f"Iterate norm {norm:.3e} exploded despite an Inside certificate")
                return SolveOutcome(
                    SolveStatus.DIVERGED,
                    certificate,
                    tolerance,
                    raw=Field(inst.grid, problem.full(eta)),
                    residual_inf=residual_inf,
                    diagnostics=diagnostics,
                    audit=opts.audit,
                )
        if iteration == opts.max_newton:
            break

        gradient_norm = _inf(gradient)
        rtol = min(0.5, float(np.sqrt(gradient_norm)))
        try:
            direction, cg_iters = problem.newton_direction(eta, gradient, rtol, opts.cg_maxiter)
        except ExponentOverflow:
            return SolveOutcome(
                SolveStatus.DIVERGED, certificate, tolerance, diagnostics=diagnostics, audit=opts.audit
            )
        if outside:
            direction = direction - kernel_step * problem.kernel_gradient(gradient)
            kernel_step *= 2.0
        slope = float(np.sum(direction * gradient)) * inst.grid.cell_volume
        accepted, step_length = _line_search(problem, eta, direction, current_energy, slope, gradient, opts)
        if accepted is None:
            logger.warning(f"Line search failed at iteration {iteration} (|R| = {residual_inf:.3e})")
            break
        eta = accepted

    logger.warning(f"Solve '{inst.name}' stopped without convergence after {len(diagnostics) - 1} iterations")
    final = diagnostics[-1]
    return SolveOutcome(
        SolveStatus.NO_SOLUTION_CERTIFIED if outside else SolveStatus.MAX_ITERATIONS,
        certificate,
        tolerance,
        raw=Field(inst.grid, problem.full(eta)),
        residual_inf=final.residual_inf,
        diagnostics=diagnostics,
        audit=opts.audit,
        audit_confirmed=False if outside else None,
    )
