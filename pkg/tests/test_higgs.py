# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

import math

import numpy as np
import pytest
from scipy.optimize import newton_krylov

from gkw_solver.cone import ActiveSet, cone_membership, kernel_basis
from gkw_solver.exceptions import AsymmetricData, NegativeCoefficient
from gkw_solver.functional import validate
from gkw_solver.grid import Field, PeriodicGrid, apply_laplacian, node_coordinates, sup_norm
from gkw_solver.higgs import (
    CyclicHiggsSpec,
    build_instance,
    check_symmetry,
    cyclic_weights,
    squared_modulus,
    symmetric_subspace,
    trace_zero_basis,
)
from gkw_solver.schemas.reports import SolveStatus, Verdict
from gkw_solver.solver import random_initial_field, solve, verify_solution


@pytest.fixture
def grid() -> PeriodicGrid:
    return PeriodicGrid(m=1, N=(32,))


def test_cyclic_weights_small_ranks() -> None:
    """Test cyclic weights for r = 2 and r = 3."""
    assert np.array_equal(cyclic_weights(2).u, [[-1.0, 1.0], [1.0, -1.0]])
    assert np.array_equal(cyclic_weights(3).u, [[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0], [1.0, 0.0, -1.0]])
    with pytest.raises(ValueError):
        cyclic_weights(1)


@pytest.mark.parametrize("r", [2, 3, 7, 64])
def test_cyclic_weights_sum_to_zero(r: int) -> None:
    """Test that cyclic weights sum to zero."""
    ws = cyclic_weights(r)
    assert np.array_equal(ws.u.sum(axis=0), np.zeros(r))
    cert = cone_membership(np.zeros(r), ws, ActiveSet.all(r))
    assert cert.verdict is Verdict.INSIDE


def test_symmetric_subspace_dimensions() -> None:
    """Test the symmetric subspace basis for small ranks."""
    two = symmetric_subspace(2)
    assert two.dim == 1
    assert np.allclose(two.basis[:, 0], np.array([-1.0, 1.0]) / math.sqrt(2))
    three = symmetric_subspace(3)
    assert three.dim == 1
    assert np.allclose(three.basis[:, 0], np.array([-1.0, 0.0, 1.0]) / math.sqrt(2))
    assert symmetric_subspace(4).dim == 2
    for r in (2, 3, 4, 5, 8):
        sub = symmetric_subspace(r)
        assert sub.constraint_defect() == 0.0
        assert np.allclose(sub.basis.T @ sub.basis, np.eye(sub.dim))


def test_trace_zero_basis() -> None:
    """Test the orthonormal trace-zero basis."""
    basis = trace_zero_basis(4)
    assert basis.shape == (4, 3)
    assert np.allclose(basis.sum(axis=0), 0.0)
    assert np.allclose(basis.T @ basis, np.eye(3))


@pytest.mark.parametrize("r", [2, 3, 5])
def test_cyclic_weights_span_subspaces(r: int) -> None:
    """Test that cyclic weights span the trace-zero plane."""
    ws = cyclic_weights(r)
    assert kernel_basis(ws.project(trace_zero_basis(r)), ActiveSet.all(r)).shape[1] == 0
    assert kernel_basis(ws.project(symmetric_subspace(r).basis), ActiveSet.all(r)).shape[1] == 0


def test_squared_modulus(grid: PeriodicGrid) -> None:
    """Test |q|^2 of a trigonometric polynomial."""
    (x,) = node_coordinates(grid)
    single = squared_modulus(grid, [((1,), 1.0)])
    assert np.allclose(single.values, 1.0)
    mixed = squared_modulus(grid, [((1,), 1.0), ((0,), 0.5)])
    assert np.allclose(mixed.values[:, 0], 1.25 + np.cos(x))
    with pytest.raises(ValueError):
        squared_modulus(grid, [((1, 0), 1.0)])


def test_check_symmetry(grid: PeriodicGrid) -> None:
    """Test the symmetry defect."""
    assert check_symmetry(Field.zeros(grid, 3), 3) == 0.0
    assert check_symmetry(Field.constant(grid, [1.0, 1.0]), 2) == 2.0
    v = symmetric_subspace(4).basis @ np.array([0.3, -1.2])
    assert check_symmetry(Field.constant(grid, v), 4) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        check_symmetry(Field.zeros(grid, 2), 3)


def test_spec_validation(grid: PeriodicGrid) -> None:
    """Test validation of cyclic Higgs data."""
    (x,) = node_coordinates(grid)
    one = Field.constant(grid, 1.0)
    with pytest.raises(NegativeCoefficient):
        CyclicHiggsSpec(2, (one, Field(grid, np.sin(x))), Field.zeros(grid, 2))
    with pytest.raises(AsymmetricData):
        CyclicHiggsSpec(3, (one, Field(grid, 2.0 + np.sin(x)), one), Field.zeros(grid, 3))
    spec = CyclicHiggsSpec(3, (one, Field(grid, 2.0 + np.sin(x)), one), Field.zeros(grid, 3), symmetric=False)
    assert spec.symmetry_defect() > 0.0
    with pytest.raises(ValueError):
        CyclicHiggsSpec(3, (one, one), Field.zeros(grid, 3))


def test_rhs_must_lie_in_v(grid: PeriodicGrid) -> None:
    """Test that the right-hand side must lie in the chosen subspace."""
    one = Field.constant(grid, 1.0)
    spec = CyclicHiggsSpec(3, (one, one, one), Field.constant(grid, [1.0, 0.0, 0.0]))
    with pytest.raises(AsymmetricData):
        build_instance(spec)
    with pytest.raises(AsymmetricData):
        build_instance(spec, "trace-zero")
    inst = build_instance(spec, "full")
    assert inst.subspace is None


def test_r2_trivial_solution(grid: PeriodicGrid) -> None:
    """Test the zero solution for constant data."""
    one = Field.constant(grid, 1.0)
    inst = build_instance(CyclicHiggsSpec(2, (one, one), Field.zeros(grid, 2)))
    assert inst.subspace is not None and inst.subspace.shape == (2, 1)
    outcome = solve(inst)
    assert outcome.status is SolveStatus.SOLUTION
    assert outcome.xi is not None
    assert np.allclose(outcome.xi.values, 0.0, atol=1e-10)


def test_r2_matches_scalar_sinh_gordon(grid: PeriodicGrid) -> None:
    """
    For r = 2 on V, ξ = (-f, f) and the system reduces to Δf + 4 k_1 e^{2f} - 4 k_2 e^{-2f} = 0.
    """
    (x,) = node_coordinates(grid)
    k1 = np.ones(grid.shape)
    k2 = np.sin(x) ** 2 + 0.1
    inst = build_instance(CyclicHiggsSpec(2, (Field(grid, k1), Field(grid, k2)), Field.zeros(grid, 2)))
    outcome = solve(inst)
    assert outcome.status is SolveStatus.SOLUTION
    assert outcome.xi is not None

    def scalar(f: np.ndarray) -> np.ndarray:
        lap = apply_laplacian(f[:, np.newaxis], grid)[:, 0]
        return lap + 4.0 * k1 * np.exp(2.0 * f) - 4.0 * k2 * np.exp(-2.0 * f)

    f = newton_krylov(scalar, np.zeros(grid.shape), f_tol=1e-10)
    assert np.max(np.abs(outcome.xi.values[:, 1] - f)) < 1e-8
    assert np.max(np.abs(outcome.xi.values[:, 0] + f)) < 1e-8


def test_r3_symmetric_solution() -> None:
    """Test that V and trace-zero coordinates give the same symmetric solution."""
    grid = PeriodicGrid(m=2, N=(16, 16))
    x, y = node_coordinates(grid)
    k_side = Field(grid, 1.0 + 0.5 * np.cos(x))
    k_last = squared_modulus(grid, [((1, 0), 1.0), ((0, 1), 0.5)])
    rhs = np.stack([-0.3 * np.cos(y), np.zeros(grid.shape), 0.3 * np.cos(y)], axis=-1)
    spec = CyclicHiggsSpec(3, (k_side, k_side, k_last), Field(grid, rhs))
    on_v = build_instance(spec)
    assert validate(on_v).passed
    v_solution = solve(on_v)
    assert v_solution.status is SolveStatus.SOLUTION and v_solution.xi is not None
    assert check_symmetry(v_solution.xi, 3) <= max(1e-8, 10 * v_solution.tolerance)

    trace_zero = build_instance(spec, "trace-zero")
    tz_solution = solve(trace_zero)
    assert tz_solution.status is SolveStatus.SOLUTION and tz_solution.xi is not None
    assert check_symmetry(tz_solution.xi, 3) < 1e-8
    assert sup_norm(v_solution.xi.with_values(v_solution.xi.values - tz_solution.xi.values)) < 1e-6

    report = verify_solution(on_v, v_solution.xi, v_solution.tolerance)
    assert report.identity_defect < 1e-8 * (1.0 + max(abs(w) for w in report.integral_w))


def test_unique_without_gauge() -> None:
    """Test uniqueness of the raw solution from two starts."""
    grid = PeriodicGrid(m=1, N=(24,))
    (x,) = node_coordinates(grid)
    k = Field(grid, 1.0 + 0.3 * np.sin(x))
    inst = build_instance(CyclicHiggsSpec(4, (k, Field.constant(grid, 2.0), k, k), Field.zeros(grid, 4)))
    first = solve(inst, xi0=random_initial_field(grid, 4, seed=10, scale=0.3))
    second = solve(inst, xi0=random_initial_field(grid, 4, seed=11, scale=0.3))
    assert first.raw is not None and second.raw is not None
    assert sup_norm(first.raw.with_values(first.raw.values - second.raw.values)) < 1e-6


@pytest.mark.parametrize("r", [2, 3, 4])
@pytest.mark.parametrize("coordinates", ["V", "trace-zero", "full"])
def test_zero_rhs_is_certified_and_solved(r: int, coordinates: str) -> None:
    """Test that rhs = 0 keeps the full cone margin in every coordinate choice and solves symmetrically."""
    grid = PeriodicGrid(m=2, N=(12, 10))
    x, y = node_coordinates(grid)
    sides = [Field(grid, 1.0 + 0.4 * np.cos(x + j)) for j in range(1, r)]
    k = tuple(sides[min(j, r - 2 - j)] for j in range(r - 1)) + (Field(grid, 1.0 + 0.5 * np.sin(y) ** 2),)
    inst = build_instance(CyclicHiggsSpec(r, k, Field.zeros(grid, r)), coordinates)  # type: ignore[arg-type]
    report = validate(inst)
    assert report.certificate is not None
    assert report.certificate.verdict is Verdict.INSIDE
    assert report.certificate.margin is not None
    assert report.certificate.margin > 10 * report.certificate.tau_cone
    outcome = solve(inst, certificate=report.certificate)
    assert outcome.status is SolveStatus.SOLUTION and outcome.xi is not None
    assert check_symmetry(outcome.xi, r) <= max(1e-8, 10 * outcome.tolerance)
