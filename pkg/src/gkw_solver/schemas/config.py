# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.


from typing import Annotated, List, Literal, Optional, Union

from pydantic import Field, StrictStr, model_validator

from gkw_solver.grid import PeriodicGrid
from gkw_solver.schemas.base import GKWBaseModel
from gkw_solver.solver import SolveOptions

# A coefficient expression: source text over x_1..x_m, or a plain number.
Expr = Union[StrictStr, float]

Mode = Literal["check", "solve", "harness", "verify"]


class GridSpec(GKWBaseModel):
    """
    Periodic grid: m axes, N points per axis, periods L (2*pi when omitted).
    """

    m: int = Field(..., ge=1, le=4)
    N: List[int] = Field(..., min_length=1, max_length=4)
    L: Optional[List[float]] = Field(default=None, min_length=1, max_length=4)

    @model_validator(mode="after")
    def check_lengths(self) -> "GridSpec":
        if len(self.N) != self.m:
            raise ValueError(f"N has {len(self.N)} entries but m = {self.m}")
        if self.L is not None and len(self.L) != self.m:
            raise ValueError(f"L has {len(self.L)} entries but m = {self.m}")
        return self

    def to_grid(self) -> PeriodicGrid:
        if self.L is None:
            return PeriodicGrid(m=self.m, N=tuple(self.N))
        return PeriodicGrid(m=self.m, N=tuple(self.N), L=tuple(self.L))


class FoliationSpec(GKWBaseModel):
    leaf_axes: List[int] = Field(default_factory=list, description="One-based grid axes spanning the leaves")


class ExplicitProblem(GKWBaseModel):
    """
    Arbitrary weight system u_1..u_d in R^n with coefficient and right-hand side expressions.
    """

    kind: Literal["explicit"] = "explicit"
    weights: List[List[float]] = Field(..., min_length=1)
    a: List[Expr] = Field(..., min_length=1, description="One scalar expression per weight")
    w: List[Expr] = Field(..., min_length=1, description="One expression per component")
    labels: Optional[List[str]] = None

    @model_validator(mode="after")
    def check_dimensions(self) -> "ExplicitProblem":
        n = len(self.weights[0])
        if n < 1 or any(len(u) != n for u in self.weights):
            raise ValueError("All weights must have the same positive length")
        if len(self.a) != len(self.weights):
            raise ValueError(f"Got {len(self.a)} coefficients for {len(self.weights)} weights")
        if len(self.w) != n:
            raise ValueError(f"Right-hand side needs {n} components, got {len(self.w)}")
        if self.labels is not None and len(self.labels) != len(self.weights):
            raise ValueError("One label per weight is required")
        return self


class KazdanWarnerProblem(GKWBaseModel):
    """
    Δξ + h e^ξ = c.
    """

    kind: Literal["kazdan-warner"] = "kazdan-warner"
    h: Expr
    c: Expr


class FourierTerm(GKWBaseModel):
    """One term amplitude * exp(i 2π <k, x / L>) of the trigonometric polynomial q."""

    k: List[int] = Field(..., min_length=1, max_length=4)
    re: float = 0.0
    im: float = 0.0

    @property
    def amplitude(self) -> complex:
        return complex(self.re, self.im)


class CyclicHiggsProblem(GKWBaseModel):
    """
    Transverse Hitchin data: k_1..k_r (or k_1..k_{r-1} plus q with k_r = |q|^2) and rhs.
    """

    kind: Literal["cyclic-higgs"] = "cyclic-higgs"
    r: int = Field(..., ge=2, le=64)
    k: List[Expr] = Field(..., min_length=1)
    q: Optional[List[FourierTerm]] = None
    rhs: Optional[List[Expr]] = Field(default=None, description="r expressions; zero when omitted")
    symmetric: bool = True
    coordinates: Optional[Literal["V", "trace-zero", "full"]] = None

    @model_validator(mode="after")
    def check_counts(self) -> "CyclicHiggsProblem":
        expected = self.r - 1 if self.q is not None else self.r
        if len(self.k) != expected:
            raise ValueError(f"Expected {expected} k expressions for r = {self.r}, got {len(self.k)}")
        if self.rhs is not None and len(self.rhs) != self.r:
            raise ValueError(f"rhs needs {self.r} components, got {len(self.rhs)}")
        return self


Problem = Annotated[
    Union[ExplicitProblem, KazdanWarnerProblem, CyclicHiggsProblem],
    Field(discriminator="kind"),
]


class Tolerances(GKWBaseModel):
    tau_active: float = Field(default=0.0, ge=0.0)
    tau_cone: Optional[float] = Field(default=None, gt=0.0, description="Default 1e-9 * (1 + ||W||_inf)")
    tau_rank: float = Field(default=1e-10, gt=0.0)
    tau_basic: Optional[float] = Field(default=None, gt=0.0, description="Default 10 * tol_residual")
    tau_sym: float = Field(default=1e-10, gt=0.0)


class RunConfig(GKWBaseModel):
    """
    One run of the workbench: grid, optional foliation, problem data, solver controls.
    """

    grid: GridSpec
    foliation: FoliationSpec = Field(default_factory=FoliationSpec)
    problem: Problem
    solver: SolveOptions = Field(default_factory=SolveOptions)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    output_dir: str = "gkw-out"
    mode: Mode = "solve"
