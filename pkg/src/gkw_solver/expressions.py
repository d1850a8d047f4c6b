# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

"""
Coefficient expression language.

Arithmetic over the node coordinates x_1, ..., x_m (x is an alias of x_1) with sin, cos, exp,
pi, numeric constants, + - * / and ^ (or **). Expressions are parsed with sympy after a
whitelist pass over the identifiers, and evaluated on grids through numpy.
"""

import re
from dataclasses import dataclass
from functools import cached_property
from tokenize import TokenError
from typing import Any, Callable, Dict, Tuple

import numpy as np
import sympy
from numpy.typing import NDArray
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from gkw_solver.exceptions import ExpressionParseError
from gkw_solver.grid import Field, PeriodicGrid, node_coordinates
from gkw_solver.utils.logger import logger

FloatArray = NDArray[np.float64]

FUNCTIONS: Dict[str, Any] = {"sin": sympy.sin, "cos": sympy.cos, "exp": sympy.exp}
CONSTANTS: Dict[str, Any] = {"pi": sympy.pi}
MIN_DENOMINATOR = 1e-300

_ALLOWED_CHARACTERS = re.compile(r"[0-9A-Za-z_.+\-*/^()\s]")
_IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_ATTRIBUTE = re.compile(r"\.\s*[A-Za-z_]")
_TRANSFORMATIONS = standard_transformations + (convert_xor,)
_GLOBALS: Dict[str, Any] = {
    "__builtins__": {},
    "Integer": sympy.Integer,
    "Float": sympy.Float,
    "Rational": sympy.Rational,
    "Symbol": sympy.Symbol,
    "Function": sympy.Function,
}


def coordinate_symbols(m: int) -> Tuple[sympy.Symbol, ...]:
    return tuple(sympy.Symbol(f"x_{i}", real=True) for i in range(1, m + 1))


@dataclass(frozen=True)
class Expression:
    """A parsed expression bound to a number of coordinates."""

    source: str
    expr: sympy.Expr
    m: int

    @cached_property
    def _function(self) -> Callable[..., Any]:
        return sympy.lambdify(coordinate_symbols(self.m), self.expr, modules="numpy")

    def evaluate(self, grid: PeriodicGrid, pointer: str = "") -> FloatArray:
        """
        Values at every node, shape grid.shape. Rejects denominators below 1e-300 in magnitude
        and non-finite results.
        """
        if grid.m != self.m:
            raise ExpressionParseError(self.source, f"bound to m = {self.m}, grid has m = {grid.m}", pointer=pointer)
        coords = node_coordinates(grid)
        symbols = coordinate_symbols(self.m)
        for node in sympy.preorder_traversal(self.expr):
            if isinstance(node, sympy.Pow) and node.exp.is_negative:
                base = sympy.lambdify(symbols, node.base, modules="numpy")
                values = np.broadcast_to(np.asarray(base(*coords), dtype=np.float64), grid.shape)
                smallest = float(np.min(np.abs(values)))
                if smallest < MIN_DENOMINATOR:
                    logger.error(f"Expression '{self.source}' divides by {smallest:.3e} on the grid")
                    raise ExpressionParseError(
                        self.source, f"denominator '{node.base}' vanishes on the grid", pointer=pointer
                    )
        with np.errstate(all="ignore"):
            result = np.asarray(self._function(*coords), dtype=np.float64)
        result = np.broadcast_to(result, grid.shape).copy()
        if not np.all(np.isfinite(result)):
            raise ExpressionParseError(self.source, "evaluation produced non-finite values", pointer=pointer)
        return result

    def to_field(self, grid: PeriodicGrid, pointer: str = "") -> Field:
        return Field(grid, self.evaluate(grid, pointer))


def _check_tokens(source: str, m: int, pointer: str) -> Dict[str, Any]:
    for position, char in enumerate(source):
        if not _ALLOWED_CHARACTERS.fullmatch(char):
            raise ExpressionParseError(source, f"unexpected character {char!r}", position, pointer)
    attribute = _ATTRIBUTE.search(source)
    if attribute:
        raise ExpressionParseError(source, "attribute access is not allowed", attribute.start(), pointer)
    symbols = coordinate_symbols(m)
    names: Dict[str, Any] = {f"x_{i}": symbol for i, symbol in enumerate(symbols, start=1)}
    names["x"] = symbols[0]
    names.update(FUNCTIONS)
    names.update(CONSTANTS)
    for match in _IDENTIFIER.finditer(source):
        start = match.start()
        if start > 0 and (source[start - 1].isdigit() or source[start - 1] == "."):
            # exponent or suffix of a number literal such as 1e-3
            if re.fullmatch(r"[eE]\d*", match.group()):
                continue
        if match.group() not in names:
            raise ExpressionParseError(source, f"unknown name '{match.group()}'", start, pointer)
    return names


def parse_expression(source: Any, m: int, pointer: str = "") -> Expression:
    """
    Parses `source` (a string or a number) into an Expression over x_1..x_m.
    """
    if isinstance(source, bool):
        raise ExpressionParseError(str(source), "booleans are not expressions", pointer=pointer)
    if isinstance(source, (int, float)):
        return Expression(repr(source), sympy.Float(source) if isinstance(source, float) else sympy.Integer(source), m)
    if not isinstance(source, str) or not source.strip():
        raise ExpressionParseError(str(source), "expected a non-empty string", pointer=pointer)
    names = _check_tokens(source, m, pointer)
    try:
        expr = parse_expr(source, local_dict=names, global_dict=dict(_GLOBALS), transformations=_TRANSFORMATIONS)
    except SyntaxError as exc:
        position = exc.offset - 1 if exc.offset else None
        raise ExpressionParseError(source, f"syntax error: {exc.msg}", position, pointer) from exc
    except (TypeError, ValueError, TokenError, sympy.SympifyError) as exc:
        raise ExpressionParseError(source, str(exc), pointer=pointer) from exc
    if not isinstance(expr, sympy.Expr):
        raise ExpressionParseError(source, "not an arithmetic expression", pointer=pointer)
    allowed = set(coordinate_symbols(m))
    stray = expr.free_symbols - allowed
    if stray:
        raise ExpressionParseError(source, f"unknown symbols {sorted(str(s) for s in stray)}", pointer=pointer)
    if expr.has(sympy.I) or expr.has(sympy.zoo) or expr.has(sympy.nan):
        raise ExpressionParseError(source, "expression is not real and finite", pointer=pointer)
    return Expression(source, expr, m)


def evaluate_on_grid(source: Any, grid: PeriodicGrid, pointer: str = "") -> Field:
    return parse_expression(source, grid.m, pointer).to_field(grid, pointer)
