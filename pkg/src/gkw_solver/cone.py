# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

"""
Weight systems and the solvability certificate.

The equation is solvable exactly when the integrated right-hand side W lies in the
open cone Σ_{j active} R_{>0} u_j. `cone_membership` decides this with the linear program

    max t   subject to   Σ c_j u_j = W,   c_j >= t,   t <= 1,

returning a positive witness (Inside) or a separating functional read off the LP dual (Outside).
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from gkw_solver.exceptions import LPNumericalFailure, NegativeCoefficient
from gkw_solver.grid import Field
from gkw_solver.schemas.reports import ConeCertificate, Verdict
from gkw_solver.simplex import solve_standard_form
from gkw_solver.utils.logger import logger

FloatArray = NDArray[np.float64]


@dataclass(frozen=True)
class WeightSystem:
    """
    The vectors u_1, ..., u_d in R^n coupling the exponential terms. Duplicates are allowed.
    """

    u: FloatArray
    labels: Tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        u = np.array(self.u, dtype=np.float64)
        if u.ndim == 1:
            u = u[:, np.newaxis]
        if u.ndim != 2 or u.shape[1] < 1:
            raise ValueError(f"Weights must form a (d, n) array with n >= 1, got shape {u.shape}")
        if not np.all(np.isfinite(u)):
            raise ValueError("Weights must be finite")
        labels = tuple(self.labels) if self.labels else tuple(f"u{j + 1}" for j in range(u.shape[0]))
        if len(labels) != u.shape[0]:
            raise ValueError(f"Got {len(labels)} labels for {u.shape[0]} weights")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "labels", labels)

    @property
    def d(self) -> int:
        return int(self.u.shape[0])

    @property
    def n(self) -> int:
        return int(self.u.shape[1])

    @classmethod
    def empty(cls, n: int) -> "WeightSystem":
        return cls(np.zeros((0, n)))

    def project(self, basis: FloatArray) -> "WeightSystem":
        """Coordinates of the weights in an orthonormal basis (columns) of a subspace."""
        return WeightSystem(self.u @ basis, self.labels)


@dataclass(frozen=True)
class ActiveSet:
    """
    Indices j whose coefficient a_j is not identically zero on the grid.
    """

    indices: Tuple[int, ...]
    evidence: Tuple[float, ...]
    degeneracy: Tuple[float, ...] = ()
    tau_active: float = 0.0

    @classmethod
    def all(cls, d: int) -> "ActiveSet":
        return cls(tuple(range(d)), tuple(1.0 for _ in range(d)), tuple(0.0 for _ in range(d)))

    def __contains__(self, index: object) -> bool:
        return index in self.indices

    def __len__(self) -> int:
        return len(self.indices)


def active_set(a: Sequence[Field], tau_active: float = 0.0) -> ActiveSet:
    """
    J_a = {j : max over nodes of a_j > tau_active}. Rejects negative coefficients.
    """
    indices: List[int] = []
    evidence: List[float] = []
    degeneracy: List[float] = []
    for j, coefficient in enumerate(a):
        if coefficient.n != 1:
            raise ValueError(f"Coefficient a[{j}] must be scalar, got {coefficient.n} components")
        values = coefficient.values
        minimum = float(np.min(values))
        if minimum < 0.0:
            logger.error(f"Coefficient a[{j}] is negative somewhere (min {minimum:.3e})")
            raise NegativeCoefficient(j, minimum)
        peak = float(np.max(np.abs(values)))
        evidence.append(peak)
        degeneracy.append(float(np.count_nonzero(values <= tau_active)) / values.size)
        if float(np.max(values)) > tau_active:
            indices.append(j)
    logger.debug(f"Active set {indices} of {len(evidence)} weights (tau_active={tau_active})")
    return ActiveSet(tuple(indices), tuple(evidence), tuple(degeneracy), tau_active)


def kernel_basis(ws: WeightSystem, active: ActiveSet, tau_rank: float = 1e-10) -> FloatArray:
    """
    Orthonormal basis (as columns, shape (n, q)) of the orthogonal complement of span{u_j : j active}.
    """
    if len(active) == 0:
        return np.eye(ws.n)
    U = ws.u[list(active.indices)]
    return np.asarray(scipy.linalg.null_space(U, rcond=tau_rank), dtype=np.float64)


def default_tau_cone(W: FloatArray) -> float:
    return 1e-9 * (1.0 + float(np.max(np.abs(W), initial=0.0)))


def _certificate(
    verdict: Verdict,
    W: FloatArray,
    active: ActiveSet,
    tau: float,
    margin: Optional[float],
    witness: Optional[FloatArray] = None,
    separator: Optional[FloatArray] = None,
    strict: Optional[bool] = None,
) -> ConeCertificate:
    return ConeCertificate(
        verdict=verdict,
        witness_c=None if witness is None else [float(x) for x in witness],
        separator_lambda=None if separator is None else [float(x) for x in separator],
        margin=margin,
        tau_cone=tau,
        target=[float(x) for x in W],
        active=list(active.indices),
        strict_separation=strict,
    )


def _check_separator(lam: FloatArray, U: FloatArray, W: FloatArray, tau: float) -> Optional[bool]:
    """
    Returns whether lam separates strictly, or None when it is not a valid certificate at all.
    """
    pairings = U @ lam if U.shape[0] else np.zeros(0)
    on_target = float(lam @ W)
    if pairings.size and float(np.max(pairings)) > tau:
        return None
    if on_target < -tau:
        return None
    gap = max(on_target, -float(np.min(pairings)) if pairings.size else -np.inf)
    if gap <= tau:
        return None
    return on_target > tau


def cone_membership(
    W: FloatArray,
    ws: WeightSystem,
    active: ActiveSet,
    tau_cone: Optional[float] = None,
    tau_rank: float = 1e-10,
) -> ConeCertificate:
    """
    Decides W ∈ Σ_{j∈J_a} R_{>0} u_j.

    Margins at or below tau_cone are classified Outside, so boundary points of the
    closed cone are rejected. Targets with ||W||_inf > 1 are divided by ||W||_inf before the
    LP and rescaled afterwards; smaller targets are used as given, so the cap t <= 1 never
    shrinks the margin of a small W below its unscaled value.
    """
    W = np.asarray(W, dtype=np.float64).reshape(-1)
    if W.shape != (ws.n,):
        raise ValueError(f"W has {W.size} entries but weights live in R^{ws.n}")
    norm = float(np.max(np.abs(W), initial=0.0))
    tau = tau_cone if tau_cone is not None else default_tau_cone(W)
    indices = list(active.indices)

    if not indices:
        if norm <= tau:
            return _certificate(Verdict.INSIDE, W, active, tau, None, witness=np.zeros(0))
        lam = W / norm
        return _certificate(Verdict.OUTSIDE, W, active, tau, None, separator=lam, strict=True)

    U = ws.u[indices]
    k = len(indices)
    scale = max(1.0, norm)
    column_sum = U.sum(axis=0)
    A = np.hstack([U.T, -column_sum[:, np.newaxis]])
    b = W / scale - column_sum
    cost = np.zeros(k + 1)
    cost[k] = 1.0
    result = solve_standard_form(cost, A, b)

    if result.status == "infeasible":
        kernel = kernel_basis(ws, active, tau_rank)
        lam = kernel @ (kernel.T @ W)
        peak = float(np.max(np.abs(lam), initial=0.0))
        if peak > 0.0:
            lam = lam / peak
        strict = _check_separator(lam, U, W, tau)
        if strict is None:
            logger.error("Cone LP infeasible but the projected separator does not verify")
            raise LPNumericalFailure("W leaves the weight span numerically but no separator verifies", None, None)
        logger.info(f"W lies outside span of active weights; verdict Outside (|<lambda,W>| = {float(lam @ W):.3e})")
        return _certificate(Verdict.OUTSIDE, W, active, tau, None, separator=lam, strict=strict)

    if result.status != "optimal" or result.x is None or result.dual is None:
        raise LPNumericalFailure(f"Cone LP ended with status {result.status}", None, None)

    t = 1.0 - float(result.x[k])
    witness = (t + result.x[:k]) * scale
    margin = t * scale
    dual = result.dual
    peak = float(np.max(np.abs(dual), initial=0.0))
    lam = dual / peak if peak > 0.0 else dual

    if margin > tau:
        defect = float(np.max(np.abs(U.T @ witness - W), initial=0.0))
        if defect < 1e-9 * (1.0 + norm) and float(np.min(witness)) > tau:
            logger.debug(f"Cone verdict Inside with margin {margin:.6e}")
            return _certificate(Verdict.INSIDE, W, active, tau, margin, witness=witness)
        logger.error(f"Cone witness fails verification (defect {defect:.3e})")
        raise LPNumericalFailure(
            f"Witness defect {defect:.3e} exceeds tolerance", [float(x) for x in witness], [float(x) for x in lam]
        )

    strict = _check_separator(lam, U, W, tau)
    if strict is None:
        logger.error(f"Cone margin {margin:.3e} <= tau but the dual separator does not verify")
        raise LPNumericalFailure(
            "Neither witness nor separator verifies", [float(x) for x in witness], [float(x) for x in lam]
        )
    logger.debug(f"Cone verdict Outside with margin {margin:.6e} (strict separation: {strict})")
    return _certificate(Verdict.OUTSIDE, W, active, tau, margin, separator=lam, strict=strict)
