# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

"""
Coordinate foliations of the flat torus.

The leaves are the coordinate subtori spanned by `leaf_axes`. A grid function is basic when it
is constant along those axes; `leaf_average` is the projector onto basic functions, and
`reduce` / `lift` move between the full grid and the transverse torus.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from gkw_solver.exceptions import InconsistencyDetected, NotBasicData
from gkw_solver.functional import ProblemInstance, validate
from gkw_solver.grid import Field, PeriodicGrid, sup_norm
from gkw_solver.schemas.reports import ClauseState, EquivalenceReport, SolveStatus, Verdict
from gkw_solver.solver import SolveOptions, SolveOutcome, solve
from gkw_solver.utils.logger import logger

FloatArray = NDArray[np.float64]

CROSS_DEFECT_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Foliation:
    """
    Leaf axes are zero-based here; configuration files count axes from one.
    """

    grid: PeriodicGrid
    leaf_axes: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        axes = tuple(sorted(set(int(axis) for axis in self.leaf_axes)))
        if len(axes) != len(tuple(self.leaf_axes)):
            raise ValueError(f"Leaf axes {list(self.leaf_axes)} contain duplicates")
        for axis in axes:
            if not 0 <= axis < self.grid.m:
                raise ValueError(f"Leaf axis {axis} is out of range for a grid with m = {self.grid.m}")
        if len(axes) >= self.grid.m:
            raise ValueError("Leaf axes must be a proper subset of the grid axes")
        object.__setattr__(self, "leaf_axes", axes)

    @property
    def transverse_axes(self) -> Tuple[int, ...]:
        return tuple(axis for axis in self.grid.axes if axis not in self.leaf_axes)

    @property
    def is_trivial(self) -> bool:
        return not self.leaf_axes

    @property
    def transverse_grid(self) -> PeriodicGrid:
        """The transverse torus; its leaf_volume makes transverse integrals equal full ones."""
        if self.is_trivial:
            return self.grid
        keep = self.transverse_axes
        return PeriodicGrid(
            m=len(keep),
            N=tuple(self.grid.N[axis] for axis in keep),
            L=tuple(self.grid.L[axis] for axis in keep),
            leaf_volume=self.grid.leaf_volume * math.prod(self.grid.L[axis] for axis in self.leaf_axes),
        )


def leaf_average(f: Field, fol: Foliation) -> Field:
    """
    Projector onto basic functions: every node gets the mean over its leaf.
    """
    if fol.is_trivial:
        return f
    means = np.mean(f.values, axis=fol.leaf_axes, keepdims=True)
    return f.with_values(np.broadcast_to(means, f.values.shape).copy())


def basic_defect(f: Field, fol: Foliation) -> float:
    """||f - P_B f||_inf; zero exactly for basic f."""
    if fol.is_trivial:
        return 0.0
    means = np.mean(f.values, axis=fol.leaf_axes, keepdims=True)
    return float(np.max(np.abs(f.values - means)))


def restrict(f: Field, fol: Foliation) -> Field:
    """Leaf means as a field on the transverse grid."""
    if fol.is_trivial:
        return f
    return Field(fol.transverse_grid, np.mean(f.values, axis=fol.leaf_axes))


def lift(f: Field, fol: Foliation) -> Field:
    """
    Extends a transverse field constantly along the leaves.
    """
    transverse = fol.transverse_grid
    if f.grid.shape != transverse.shape:
        raise ValueError(f"Field of grid shape {f.grid.shape} is not on the transverse grid {transverse.shape}")
    if fol.is_trivial:
        return Field(fol.grid, f.values)
    values = f.values
    for axis in fol.leaf_axes:
        values = np.expand_dims(values, axis)
    return Field(fol.grid, np.broadcast_to(values, fol.grid.shape + (f.n,)).copy())


def _default_tau_basic(inst: ProblemInstance) -> float:
    return 1e-9 * (1.0 + sup_norm(inst.w))


def data_defects(inst: ProblemInstance, fol: Foliation) -> Dict[str, float]:
    defects = {f"a[{j}]": basic_defect(coefficient, fol) for j, coefficient in enumerate(inst.a)}
    defects["w"] = basic_defect(inst.w, fol)
    return defects


def reduce(inst: ProblemInstance, fol: Foliation, tau_basic: Optional[float] = None) -> ProblemInstance:
    """
    The same equation on the transverse torus. Requires basic coefficients and right-hand side.
    """
    if fol.grid != inst.grid:
        raise ValueError("Foliation and instance live on different grids")
    tolerance = tau_basic if tau_basic is not None else _default_tau_basic(inst)
    for name, defect in data_defects(inst, fol).items():
        if defect > tolerance:
            logger.error(f"Cannot reduce: {name} has basic defect {defect:.3e}")
            raise NotBasicData(name, defect, tolerance)
    reduced = ProblemInstance(
        fol.transverse_grid,
        inst.ws,
        tuple(restrict(coefficient, fol) for coefficient in inst.a),
        restrict(inst.w, fol),
        inst.subspace,
        inst.tau_active,
        f"{inst.name}/transverse",
    )
    logger.debug(f"Reduced '{inst.name}' from grid {inst.grid.shape} to {reduced.grid.shape}")
    return reduced


@dataclass(frozen=True)
class HarnessResult:
    report: EquivalenceReport
    full: SolveOutcome
    transverse: Optional[SolveOutcome] = None


def _state(ok: bool) -> ClauseState:
    return "pass" if ok else "fail"


def harness_run(
    inst: ProblemInstance,
    fol: Foliation,
    opts: Optional[SolveOptions] = None,
    strict_basic: bool = False,
    tau_basic: Optional[float] = None,
    tau_cone: Optional[float] = None,
    tau_rank: float = 1e-10,
) -> HarnessResult:
    """
    Runs the cone test, the full-grid solve and the transverse solve, and checks that the
    four clauses (existence, cone condition, basic existence, transverse existence) agree.
    """
    opts = opts or SolveOptions()
    tolerance = opts.tolerance(inst)
    tau_b = tau_basic if tau_basic is not None else 10.0 * tolerance
    defects = data_defects(inst, fol)
    worst_name, data_defect = max(defects.items(), key=lambda item: item[1])
    basic_data = data_defect <= tau_b
    if not basic_data and strict_basic:
        logger.error(f"Harness requires basic data; {worst_name} has defect {data_defect:.3e}")
        raise NotBasicData(worst_name, data_defect, tau_b)

    validation = validate(inst, strict=True, tau_cone=tau_cone, tau_rank=tau_rank)
    assert validation.certificate is not None
    certificate = validation.certificate
    full = solve(inst, opts, certificate=certificate, tau_rank=tau_rank)
    solved = full.status is SolveStatus.SOLUTION

    clauses: Dict[str, ClauseState] = {
        "i": _state(solved),
        "ii": _state(certificate.verdict is Verdict.INSIDE),
    }
    solution_defect: Optional[float] = None
    cross_defect: Optional[float] = None
    transverse: Optional[SolveOutcome] = None
    if solved and full.xi is not None:
        solution_defect = basic_defect(full.xi, fol)

    if fol.is_trivial:
        clauses["iii"] = clauses["i"]
        clauses["iv"] = clauses["i"]
        cross_defect = 0.0 if solved else None
    elif basic_data:
        reduced = reduce(inst, fol, tau_b)
        reduced_validation = validate(reduced, strict=True, tau_cone=tau_cone, tau_rank=tau_rank)
        assert reduced_validation.certificate is not None
        transverse = solve(reduced, opts, certificate=reduced_validation.certificate, tau_rank=tau_rank)
        clauses["iii"] = _state(solution_defect is not None and solution_defect <= max(1e-8, tau_b))
        transverse_solved = transverse.status is SolveStatus.SOLUTION and transverse.xi is not None
        if solved and transverse_solved:
            assert full.xi is not None and transverse.xi is not None
            cross_defect = sup_norm(full.xi.with_values(full.xi.values - lift(transverse.xi, fol).values))
            clauses["iv"] = _state(cross_defect <= CROSS_DEFECT_TOLERANCE)
        else:
            clauses["iv"] = _state(transverse_solved)
    else:
        logger.info(f"Data not basic (defect {data_defect:.3e}); clauses iii and iv do not apply")
        clauses["iii"] = "not_applicable"
        clauses["iv"] = "not_applicable"

    applicable = [state for state in clauses.values() if state != "not_applicable"]
    consistent = len(set(applicable)) == 1
    report = EquivalenceReport(
        leaf_axes=[axis + 1 for axis in fol.leaf_axes],
        verdict=certificate.verdict,
        full=full.summary(),
        transverse=None if transverse is None else transverse.summary(),
        data_basic_defect=data_defect,
        solution_basic_defect=solution_defect,
        cross_defect=cross_defect,
        tau_basic=tau_b,
        clauses=clauses,
        consistent=consistent,
    )
    if not consistent:
        logger.error(f"Equivalence harness found disagreeing clauses: {clauses}")
        raise InconsistencyDetected(
            "Clauses of the equivalence disagree",
            {
                "clauses": clauses,
                "solution_basic_defect": solution_defect,
                "cross_defect": cross_defect,
                "full_status": full.status.value,
                "transverse_status": None if transverse is None else transverse.status.value,
            },
        )
    logger.info(f"Harness consistent: clauses {clauses}, cross defect {cross_defect}")
    return HarnessResult(report, full, transverse)


def theorem_harness(
    inst: ProblemInstance,
    fol: Foliation,
    opts: Optional[SolveOptions] = None,
    strict_basic: bool = False,
) -> EquivalenceReport:
    return harness_run(inst, fol, opts, strict_basic).report


def leaf_axes_from_config(axes: List[int]) -> Tuple[int, ...]:
    """Converts one-based configuration axes to zero-based."""
    return tuple(axis - 1 for axis in axes)
