# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

"""
Reading run configurations.

Documents go through three gates: the published JSON Schema (jsonschema), the pydantic
models, and a reference check that needs the grid (axis ranges, expressions). Every failure
surfaces as SchemaError or ExpressionParseError carrying a JSON pointer.
"""

import json
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional, Union

import jsonschema
import yaml
from jsonschema.exceptions import best_match
from pydantic import ValidationError

from gkw_solver.exceptions import SchemaError
from gkw_solver.expressions import parse_expression
from gkw_solver.registry import registry
from gkw_solver.schemas.config import CyclicHiggsProblem, ExplicitProblem, KazdanWarnerProblem, RunConfig
from gkw_solver.utils.logger import logger


@lru_cache(maxsize=1)
def run_config_schema() -> Dict[str, Any]:
    return RunConfig.model_json_schema()


def _pointer(path: Any) -> str:
    parts = [str(part) for part in path]
    return "/" + "/".join(parts) if parts else ""


def _load_document(text: str, fmt: Optional[str]) -> Any:
    """
    Parses JSON or YAML; with no format given, tries JSON first, then YAML.
    """
    try:
        if fmt == "json":
            return json.loads(text)
        if fmt == "yaml":
            return yaml.safe_load(text)
        try:
            return json.loads(text)
        except json.JSONDecodeError:
            return yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        logger.error(f"Parse error in configuration: {e}")
        raise SchemaError("", f"Parse error: {e}") from e


def _with_kind(data: Dict[str, Any]) -> Dict[str, Any]:
    problem = data.get("problem")
    if not isinstance(problem, dict) or "kind" in problem:
        return data
    kind = registry.infer_kind(problem)
    if kind is None:
        raise SchemaError("/problem", "Could not infer the problem kind from content; set 'kind'")
    logger.debug(f"Inferred problem kind '{kind}'")
    return {**data, "problem": {**problem, "kind": kind}}


def _check_schema(data: Dict[str, Any]) -> None:
    validator = jsonschema.Draft202012Validator(run_config_schema())
    error = best_match(validator.iter_errors(data))
    if error is not None:
        pointer = _pointer(error.absolute_path)
        logger.error(f"Configuration does not match the schema at [{pointer or '/'}]: {error.message}")
        raise SchemaError(pointer, error.message)


def _check_references(cfg: RunConfig) -> None:
    m = cfg.grid.m
    try:
        cfg.grid.to_grid()
    except ValidationError as e:
        raise SchemaError("/grid", e.errors()[0]["msg"]) from e

    axes = cfg.foliation.leaf_axes
    for index, axis in enumerate(axes):
        if not 1 <= axis <= m:
            raise SchemaError(f"/foliation/leaf_axes/{index}", f"Axis {axis} is out of range 1..{m}")
    if len(set(axes)) != len(axes):
        raise SchemaError("/foliation/leaf_axes", "Leaf axes must be distinct")
    if len(axes) >= m:
        raise SchemaError("/foliation/leaf_axes", "Leaf axes must be a proper subset of the grid axes")

    problem = cfg.problem
    expressions: Dict[str, Any] = {}
    if isinstance(problem, ExplicitProblem):
        expressions.update({f"/problem/a/{j}": source for j, source in enumerate(problem.a)})
        expressions.update({f"/problem/w/{i}": source for i, source in enumerate(problem.w)})
    elif isinstance(problem, KazdanWarnerProblem):
        expressions.update({"/problem/h": problem.h, "/problem/c": problem.c})
    elif isinstance(problem, CyclicHiggsProblem):
        expressions.update({f"/problem/k/{j}": source for j, source in enumerate(problem.k)})
        expressions.update({f"/problem/rhs/{i}": source for i, source in enumerate(problem.rhs or [])})
        for index, term in enumerate(problem.q or []):
            if len(term.k) != m:
                raise SchemaError(f"/problem/q/{index}/k", f"Frequency needs {m} entries, got {len(term.k)}")
    for pointer, source in expressions.items():
        parse_expression(source, m, pointer)


def config_from_dict(data: Any) -> RunConfig:
    if not isinstance(data, dict):
        raise SchemaError("", "Configuration must be an object")
    data = _with_kind(data)
    _check_schema(data)
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        loc = list(first["loc"])
        if len(loc) > 1 and loc[0] == "problem" and registry.get(str(loc[1])) is not None:
            del loc[1]
        pointer = _pointer(loc)
        logger.error(f"Configuration rejected at [{pointer or '/'}]: {first['msg']}")
        raise SchemaError(pointer, first["msg"]) from e
    _check_references(cfg)
    return cfg


def parse_config(text: str, fmt: Optional[str] = None) -> RunConfig:
    """
    Parses a UTF-8 JSON (or YAML) document into a validated RunConfig.

    Raises:
        SchemaError: the document is malformed or violates the schema; carries a JSON pointer.
        ExpressionParseError: a coefficient expression does not parse; carries position and pointer.
    """
    return config_from_dict(_load_document(text, fmt))


def load_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    logger.info(f"Loading configuration: {path}")
    if not path.exists():
        logger.error(f"File not found: {path}")
        raise SchemaError("", f"File not found: {path}")
    suffix = path.suffix.lower()
    fmt = "yaml" if suffix in (".yaml", ".yml") else "json" if suffix == ".json" else None
    return parse_config(path.read_text(encoding="utf-8"), fmt)
