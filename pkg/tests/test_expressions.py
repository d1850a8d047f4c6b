# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

import math

import numpy as np
import pytest

from gkw_solver.exceptions import ExpressionParseError
from gkw_solver.expressions import evaluate_on_grid, parse_expression
from gkw_solver.grid import PeriodicGrid, node_coordinates


@pytest.fixture
def grid() -> PeriodicGrid:
    return PeriodicGrid(m=1, N=(32,))


@pytest.fixture
def grid2() -> PeriodicGrid:
    return PeriodicGrid(m=2, N=(8, 6), L=(1.0, 2.0))


def test_evaluates_trigonometric_polynomial(grid: PeriodicGrid) -> None:
    """Test evaluating a trigonometric polynomial on the grid."""
    (x,) = node_coordinates(grid)
    values = parse_expression("1 + 0.5*cos(x_1)", 1).evaluate(grid)
    assert values.shape == grid.shape
    assert np.allclose(values, 1.0 + 0.5 * np.cos(x))


def test_x_is_an_alias_of_first_coordinate(grid: PeriodicGrid) -> None:
    """Test that x means x_1."""
    assert np.array_equal(evaluate_on_grid("sin(x)", grid).values, evaluate_on_grid("sin(x_1)", grid).values)


def test_two_coordinates(grid2: PeriodicGrid) -> None:
    """Test expressions in x_1 and x_2."""
    x, y = node_coordinates(grid2)
    values = parse_expression("x_1 + 2*x_2^2", 2).evaluate(grid2)
    assert np.allclose(values, x + 2 * y**2)


def test_constants_and_powers(grid: PeriodicGrid) -> None:
    """Test pi, exp, scientific notation and both power operators."""
    assert np.allclose(parse_expression("2^3", 1).evaluate(grid), 8.0)
    assert np.allclose(parse_expression("2**3", 1).evaluate(grid), 8.0)
    assert np.allclose(parse_expression("sin(pi/2)", 1).evaluate(grid), 1.0)
    assert np.allclose(parse_expression("exp(0)", 1).evaluate(grid), 1.0)
    assert np.allclose(parse_expression("1e-3*x", 1).evaluate(grid), 1e-3 * node_coordinates(grid)[0])


def test_plain_numbers(grid: PeriodicGrid) -> None:
    """Test that numbers are accepted directly."""
    assert np.allclose(parse_expression(2, 1).evaluate(grid), 2.0)
    assert np.allclose(parse_expression(-0.25, 1).evaluate(grid), -0.25)
    field = evaluate_on_grid(math.pi, grid)
    assert field.n == 1
    assert np.allclose(field.values, math.pi)


@pytest.mark.parametrize("source", [True, False])
def test_booleans_rejected(source: bool) -> None:
    """Test that booleans are rejected."""
    with pytest.raises(ExpressionParseError):
        parse_expression(source, 1)


@pytest.mark.parametrize("source", ["", "   ", None])
def test_empty_rejected(source: object) -> None:
    """Test that empty input is rejected."""
    with pytest.raises(ExpressionParseError):
        parse_expression(source, 1)


@pytest.mark.parametrize(
    "source, position",
    [
        ("1 + y", 4),
        ("x_2 * 3", 0),
        ("foo(x)", 0),
        ("Symbol(x)", 0),
        ("__import__", 0),
        ("2 * log(x)", 4),
    ],
)
def test_unknown_names_report_position(source: str, position: int) -> None:
    """Test the character position of unknown names."""
    with pytest.raises(ExpressionParseError) as excinfo:
        parse_expression(source, 1)
    assert excinfo.value.position == position


def test_unexpected_character() -> None:
    """Test rejecting characters outside the grammar."""
    with pytest.raises(ExpressionParseError) as excinfo:
        parse_expression("1 ; 2", 1)
    assert excinfo.value.position == 2
    with pytest.raises(ExpressionParseError):
        parse_expression("x[0]", 1)


def test_attribute_access_rejected() -> None:
    """Test that attribute access is rejected."""
    with pytest.raises(ExpressionParseError) as excinfo:
        parse_expression("x.real", 1)
    assert excinfo.value.position == 1


@pytest.mark.parametrize("source", ["1 + * 2", "(1 + x", "sin(x", "1 2 +"])
def test_syntax_errors(source: str) -> None:
    """Test malformed expressions."""
    with pytest.raises(ExpressionParseError):
        parse_expression(source, 1)


def test_vanishing_denominator_rejected(grid: PeriodicGrid) -> None:
    """Test that a denominator vanishing on the grid is rejected."""
    with pytest.raises(ExpressionParseError) as excinfo:
        evaluate_on_grid("1/sin(x)", grid, "/problem/h")
    assert "denominator" in str(excinfo.value)
    assert excinfo.value.pointer == "/problem/h"
    field = evaluate_on_grid("1/(2 + cos(x))", grid)
    assert np.min(field.values) == pytest.approx(1.0 / 3.0)


def test_non_finite_values_rejected(grid: PeriodicGrid) -> None:
    """Test that overflowing expressions are rejected."""
    with pytest.raises(ExpressionParseError):
        evaluate_on_grid("exp(1000)", grid)


def test_dimension_mismatch(grid: PeriodicGrid, grid2: PeriodicGrid) -> None:
    """Test coordinates beyond the grid dimension."""
    expr = parse_expression("x_1", 1)
    with pytest.raises(ExpressionParseError):
        expr.evaluate(grid2)
    assert expr.to_field(grid).n == 1


def test_error_context_carries_pointer() -> None:
    """Test the error context of expression failures."""
    with pytest.raises(ExpressionParseError) as excinfo:
        parse_expression("1 + y", 1, "/problem/a/0")
    context = excinfo.value.context()
    assert context["type"] == "ExpressionParseError"
    assert context["expression"] == "1 + y"
    assert context["position"] == 4
    assert context["pointer"] == "/problem/a/0"
    assert isinstance(excinfo.value, ValueError)
