# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.


from enum import Enum
from typing import Any, Dict, List, Literal, Optional

from pydantic import Field, model_validator

from gkw_solver.schemas.base import GKWBaseModel


class Verdict(str, Enum):
    """Outcome of the cone membership test."""

    INSIDE = "Inside"
    OUTSIDE = "Outside"


class SolveStatus(str, Enum):
    SOLUTION = "Solution"
    NO_SOLUTION_CERTIFIED = "NoSolutionCertified"
    MAX_ITERATIONS = "MaxIterations"
    DIVERGED = "Diverged"


class ConeCertificate(GKWBaseModel):
    """
    Verdict on whether the integrated right-hand side lies in the open cone spanned by the active weights.
    Inside carries a strictly positive witness, Outside a separating functional.
    """

    verdict: Verdict
    witness_c: Optional[List[float]] = Field(default=None, description="Positive coefficients with sum c_j u_j = W")
    separator_lambda: Optional[List[float]] = Field(default=None, description="Separating functional (Outside)")
    margin: Optional[float] = Field(default=None, description="LP optimum t*, null when W leaves the weight span")
    tau_cone: float = Field(..., ge=0.0)
    target: List[float] = Field(..., description="The integrated right-hand side W")
    active: List[int] = Field(default_factory=list, description="Zero-based active weight indices")
    strict_separation: Optional[bool] = Field(
        default=None, description="True when <lambda, W> > tau_cone; False for boundary points of the closed cone"
    )

    @model_validator(mode="after")
    def check_exclusive(self) -> "ConeCertificate":
        if self.verdict is Verdict.INSIDE:
            if self.witness_c is None or self.separator_lambda is not None:
                raise ValueError("Inside certificates carry a witness and no separator")
        else:
            if self.separator_lambda is None or self.witness_c is not None:
                raise ValueError("Outside certificates carry a separator and no witness")
        return self


class ValidationReport(GKWBaseModel):
    """
    Pre-solve checks of a problem instance: coefficient signs, degeneracy, active set and the cone verdict.
    """

    nonnegative: List[bool]
    coefficient_minimum: List[float]
    degeneracy_fraction: List[float] = Field(..., description="Fraction of nodes with a_j <= tau_active")
    active: List[int]
    tau_active: float
    integral_w: List[float]
    certificate: Optional[ConeCertificate] = None

    @property
    def passed(self) -> bool:
        return all(self.nonnegative) and self.certificate is not None


class VerificationReport(GKWBaseModel):
    """
    Post-solve checks: residual size and the integrated-weight identity sum c_j u_j = W.
    """

    residual_inf: float
    tolerance: float
    integrated_weights: List[float] = Field(..., description="c_j = integral of a_j exp(<u_j, xi>)")
    identity_defect: float
    positive: List[bool] = Field(..., description="c_j > 0 for each active j")
    kernel_component: float
    integral_w: List[float]

    @property
    def is_solution(self) -> bool:
        return self.residual_inf <= self.tolerance


class IterationRecord(GKWBaseModel):
    iteration: int
    energy: float
    residual_inf: float
    step_length: float
    cg_iters: int
    sup_norm: float


class SolveSummary(GKWBaseModel):
    """
    Serializable part of a solve outcome (the field itself goes to a .gkwf file).
    """

    status: SolveStatus
    iterations: int
    residual_inf: Optional[float] = None
    tolerance: float
    audit: bool = False
    audit_confirmed: Optional[bool] = None
    certificate: ConeCertificate
    diagnostics: List[IterationRecord] = Field(default_factory=list)


ClauseState = Literal["pass", "fail", "not_applicable"]


class EquivalenceReport(GKWBaseModel):
    """
    Numerical check that the four equivalent clauses of the basic-solution theorem agree.
    """

    leaf_axes: List[int]
    verdict: Verdict
    full: SolveSummary
    transverse: Optional[SolveSummary] = None
    data_basic_defect: float
    solution_basic_defect: Optional[float] = None
    cross_defect: Optional[float] = None
    tau_basic: float
    clauses: Dict[str, ClauseState]
    consistent: bool


class RunReport(GKWBaseModel):
    """
    Everything a CLI run writes to report.json.
    """

    schema_version: Literal["1.0"] = "1.0"
    mode: str
    status: str
    exit_code: int
    metadata: Dict[str, Any] = Field(default_factory=dict)
    validation: Optional[ValidationReport] = None
    outcome: Optional[SolveSummary] = None
    verification: Optional[VerificationReport] = None
    equivalence: Optional[EquivalenceReport] = None
    errors: List[Dict[str, Any]] = Field(default_factory=list)
