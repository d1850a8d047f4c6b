# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

"""
Manufactured solutions and grid-refinement studies.
"""

import math
from dataclasses import dataclass
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from gkw_solver.cone import WeightSystem
from gkw_solver.exceptions import GKWError
from gkw_solver.expressions import evaluate_on_grid
from gkw_solver.functional import ProblemInstance
from gkw_solver.grid import Field, PeriodicGrid, apply_laplacian, node_coordinates, sup_norm
from gkw_solver.schemas.reports import SolveStatus
from gkw_solver.solver import SolveOptions, normalize, solve
from gkw_solver.utils.logger import logger

FloatArray = NDArray[np.float64]


def manufactured_instance(
    grid: PeriodicGrid,
    ws: WeightSystem,
    a: Sequence[Any],
    v: Sequence[float],
) -> Tuple[ProblemInstance, Field]:
    """
    Builds w from the exact solution ξ*(x) = sin(2π x_1 / L_1) v using the continuous
    Laplacian, so the discrete solution approaches ξ* at second order.

    `a` holds coefficient expressions (strings or numbers) evaluated on `grid`.
    """
    direction = np.asarray(v, dtype=np.float64)
    if direction.shape != (ws.n,):
        raise ValueError(f"v must have {ws.n} entries")
    wavenumber = 2.0 * math.pi / grid.L[0]
    profile = np.sin(wavenumber * node_coordinates(grid)[0])
    exact = profile[..., np.newaxis] * direction
    coefficients = tuple(evaluate_on_grid(source, grid, f"/a/{j}") for j, source in enumerate(a))
    terms = np.zeros(grid.shape + (ws.n,))
    for coefficient, u in zip(coefficients, ws.u):
        terms += coefficient.values * np.exp(exact @ u)[..., np.newaxis] * u
    w = wavenumber**2 * exact + terms
    inst = ProblemInstance(grid, ws, coefficients, Field(grid, w), name="manufactured")
    return inst, Field(grid, exact)


@dataclass(frozen=True)
class RefinementLevel:
    N: Tuple[int, ...]
    error: float
    iterations: int


def refinement_study(
    ws: WeightSystem,
    a: Sequence[Any],
    v: Sequence[float],
    base_N: Sequence[int],
    levels: int = 4,
    opts: Optional[SolveOptions] = None,
) -> List[RefinementLevel]:
    """
    Solves the manufactured problem on successively doubled grids and records the
    sup-norm error after aligning kernel components.
    """
    results: List[RefinementLevel] = []
    for level in range(levels):
        N = tuple(points * 2**level for points in base_N)
        grid = PeriodicGrid(m=len(N), N=N)
        inst, exact = manufactured_instance(grid, ws, a, v)
        outcome = solve(inst, opts)
        if outcome.status is not SolveStatus.SOLUTION or outcome.xi is None:
            raise GKWError(f"Manufactured problem on {N} ended with {outcome.status.value}")
        aligned = normalize(exact, ws, inst.active)
        error = sup_norm(outcome.xi.with_values(outcome.xi.values - aligned.values))
        logger.info(f"Refinement level {level}: N={N} error={error:.3e}")
        results.append(RefinementLevel(N, error, outcome.iterations))
    return results


def observed_orders(errors: Sequence[float], ratio: float = 2.0) -> List[float]:
    """log(e_k / e_{k+1}) / log(ratio) for consecutive refinements."""
    return [math.log(coarse / fine) / math.log(ratio) for coarse, fine in zip(errors, errors[1:])]


def smooth_modes(
    grid: PeriodicGrid, count: int, rng: np.random.Generator, leaf_axes: Sequence[int] = ()
) -> FloatArray:
    """
    `count` random trigonometric fields of unit scale built from the first two modes of every
    axis outside `leaf_axes`, shape grid.shape + (count,).
    """
    coords = node_coordinates(grid)
    axes = [axis for axis in grid.axes if axis not in leaf_axes]
    out = np.zeros(grid.shape + (count,))
    for component in range(count):
        for axis in axes:
            wave = 2.0 * math.pi * coords[axis] / grid.L[axis]
            for k in (1, 2):
                out[..., component] += rng.normal() * np.cos(k * wave + rng.uniform(0.0, 2.0 * math.pi)) / k
        out[..., component] /= math.sqrt(2.0 * max(1, len(axes)))
    return out


def random_instance(
    grid: PeriodicGrid,
    n: int,
    d: int,
    seed: int,
    outside: bool = False,
    amplitude: float = 0.5,
    leaf_axes: Sequence[int] = (),
) -> Tuple[ProblemInstance, Optional[Field]]:
    """
    Seeded random instance with smooth coefficients a_j in (0.5, 1.5).

    Inside instances are built forward from a smooth exact solution ξ*, which is returned
    with the instance. Outside instances pick a direction λ, weights with <λ, u_j> < 0 and
    W = 5λ, so the certificate separates strictly; no exact solution is returned. Data
    depends only on the axes outside `leaf_axes`, so it is basic for that foliation.
    """
    rng = np.random.default_rng(seed)
    a_values = 1.0 + 0.5 * np.tanh(smooth_modes(grid, d, rng, leaf_axes))
    coefficients = tuple(Field(grid, a_values[..., j]) for j in range(d))
    if not outside:
        u = rng.normal(size=(d, n))
        exact = amplitude * smooth_modes(grid, n, rng, leaf_axes)
        terms = a_values * np.exp(exact @ u.T)
        w = apply_laplacian(exact, grid) + terms @ u
        inst = ProblemInstance(grid, WeightSystem(u), coefficients, Field(grid, w), name=f"random-{seed}")
        return inst, Field(grid, exact)
    direction = rng.normal(size=n)
    direction /= float(np.linalg.norm(direction))
    raw = rng.normal(size=(d, n))
    pairings = raw @ direction
    u = raw - (pairings + 0.2 + 0.3 * np.abs(rng.normal(size=d)))[:, np.newaxis] * direction
    background = apply_laplacian(amplitude * smooth_modes(grid, n, rng, leaf_axes), grid)
    w = background + 5.0 * direction / grid.volume
    inst = ProblemInstance(grid, WeightSystem(u), coefficients, Field(grid, w), name=f"random-outside-{seed}")
    return inst, None
