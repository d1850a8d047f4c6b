# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, List, Optional, Type

import numpy as np

from gkw_solver.cone import WeightSystem
from gkw_solver.expressions import evaluate_on_grid
from gkw_solver.functional import ProblemInstance, kazdan_warner_instance
from gkw_solver.grid import Field, PeriodicGrid
from gkw_solver.higgs import CyclicHiggsSpec, build_instance, squared_modulus
from gkw_solver.schemas.base import GKWBaseModel
from gkw_solver.schemas.config import CyclicHiggsProblem, ExplicitProblem, KazdanWarnerProblem, Tolerances
from gkw_solver.utils.logger import logger

Builder = Callable[[Any, PeriodicGrid, Tolerances], ProblemInstance]
Detector = Callable[[Dict[str, Any]], bool]
ExampleFactory = Callable[[Dict[str, str]], Dict[str, Any]]


@dataclass(frozen=True)
class ProblemKind:
    kind: str
    spec_cls: Type[GKWBaseModel]
    builder: Builder


class ProblemRegistry:
    """
    Registry of problem kinds.
    Handles lookup by kind, inference of the kind from content, and example configurations.
    """

    def __init__(self) -> None:
        self._kinds: Dict[str, ProblemKind] = {}
        self._detectors: Dict[str, Detector] = {}
        self._examples: Dict[str, ExampleFactory] = {}

    def register(
        self,
        kind: str,
        spec_cls: Type[GKWBaseModel],
        builder: Builder,
        detector: Optional[Detector] = None,
    ) -> None:
        """
        Registers a problem kind with its problem model, instance builder and an optional detector.

        Args:
            kind: The discriminator value (case-insensitive).
            spec_cls: The pydantic model describing the problem block.
            builder: Turns a validated problem block into a ProblemInstance on a grid.
            detector: Returns True if a raw problem block looks like this kind.
        """
        key = kind.lower()
        self._kinds[key] = ProblemKind(key, spec_cls, builder)
        if detector:
            self._detectors[key] = detector

    def register_example(self, name: str, factory: ExampleFactory) -> None:
        self._examples[name.lower()] = factory

    def get(self, kind: str) -> Optional[ProblemKind]:
        return self._kinds.get(kind.lower())

    def kinds(self) -> List[str]:
        return sorted(self._kinds)

    def examples(self) -> List[str]:
        return sorted(self._examples)

    def infer_kind(self, data: Dict[str, Any]) -> Optional[str]:
        """
        Infers the problem kind from the keys of a raw problem block.
        """
        for kind, detector in self._detectors.items():
            if detector(data):
                return kind
        return None

    def build(self, problem: Any, grid: PeriodicGrid, tolerances: Optional[Tolerances] = None) -> ProblemInstance:
        entry = self.get(problem.kind)
        if entry is None:
            raise ValueError(f"Unknown problem kind: '{problem.kind}'")
        tolerances = tolerances or Tolerances()
        logger.debug(f"Building '{entry.kind}' instance on grid {grid.shape}")
        inst = entry.builder(problem, grid, tolerances)
        if tolerances.tau_active != inst.tau_active:
            inst = replace(inst, tau_active=tolerances.tau_active)
        return inst

    def example(self, name: str, params: Optional[Dict[str, str]] = None) -> Dict[str, Any]:
        factory = self._examples.get(name.lower())
        if factory is None:
            raise ValueError(f"Unknown example '{name}'. Available: {', '.join(self.examples())}")
        return factory(params or {})


def _components(sources: List[Any], grid: PeriodicGrid, pointer: str) -> Field:
    columns = [evaluate_on_grid(source, grid, f"{pointer}/{i}").values for i, source in enumerate(sources)]
    return Field(grid, np.concatenate(columns, axis=-1))


def _build_explicit(problem: ExplicitProblem, grid: PeriodicGrid, tolerances: Tolerances) -> ProblemInstance:
    labels = tuple(problem.labels) if problem.labels else ()
    ws = WeightSystem(np.asarray(problem.weights, dtype=np.float64), labels)
    a = tuple(evaluate_on_grid(source, grid, f"/problem/a/{j}") for j, source in enumerate(problem.a))
    w = _components(problem.w, grid, "/problem/w")
    return ProblemInstance(grid, ws, a, w, tau_active=tolerances.tau_active)


def _build_kazdan_warner(problem: KazdanWarnerProblem, grid: PeriodicGrid, tolerances: Tolerances) -> ProblemInstance:
    h = evaluate_on_grid(problem.h, grid, "/problem/h")
    c = evaluate_on_grid(problem.c, grid, "/problem/c")
    return kazdan_warner_instance(grid, h, c)


def _build_cyclic_higgs(problem: CyclicHiggsProblem, grid: PeriodicGrid, tolerances: Tolerances) -> ProblemInstance:
    k = [evaluate_on_grid(source, grid, f"/problem/k/{j}") for j, source in enumerate(problem.k)]
    if problem.q is not None:
        k.append(squared_modulus(grid, [(term.k, term.amplitude) for term in problem.q]))
    if problem.rhs is not None:
        rhs = _components(problem.rhs, grid, "/problem/rhs")
    else:
        rhs = Field.zeros(grid, problem.r)
    spec = CyclicHiggsSpec(problem.r, tuple(k), rhs, problem.symmetric, tolerances.tau_sym)
    return build_instance(spec, problem.coordinates)


def _int_param(params: Dict[str, str], key: str, default: int) -> int:
    try:
        return int(params.get(key, default))
    except ValueError as e:
        raise ValueError(f"Parameter '{key}' must be an integer, got {params[key]!r}") from e


def _kazdan_warner_example(params: Dict[str, str]) -> Dict[str, Any]:
    return {
        "grid": {"m": 1, "N": [_int_param(params, "N", 64)]},
        "problem": {"kind": "kazdan-warner", "h": params.get("h", "1"), "c": params.get("c", "1")},
        "mode": "solve",
    }


def _outside_example(params: Dict[str, str]) -> Dict[str, Any]:
    return {
        "grid": {"m": 1, "N": [_int_param(params, "N", 64)]},
        "problem": {"kind": "kazdan-warner", "h": "1", "c": params.get("c", "-1")},
        "mode": "solve",
    }


def _cyclic_higgs_example(params: Dict[str, str]) -> Dict[str, Any]:
    r = _int_param(params, "r", 3)
    N = _int_param(params, "N", 32)
    k = ["1 + 0.5*cos(x_1)" for _ in range(r - 1)]
    return {
        "grid": {"m": 2, "N": [N, N]},
        "problem": {
            "kind": "cyclic-higgs",
            "r": r,
            "k": k,
            "q": [{"k": [1, 0], "re": 1.0}, {"k": [0, 0], "re": 0.5}],
            "symmetric": True,
        },
        "mode": "solve",
    }


def _harness_example(params: Dict[str, str]) -> Dict[str, Any]:
    N = _int_param(params, "N", 32)
    return {
        "grid": {"m": 2, "N": [N, N]},
        "foliation": {"leaf_axes": [2]},
        "problem": {"kind": "kazdan-warner", "h": "1 + 0.5*sin(x_1)", "c": "1 + 0.3*cos(x_1)"},
        "mode": "harness",
    }


# Global Registry Instance
registry = ProblemRegistry()

# Register known problem kinds
registry.register("explicit", ExplicitProblem, _build_explicit, lambda d: "weights" in d)
registry.register("kazdan-warner", KazdanWarnerProblem, _build_kazdan_warner, lambda d: "h" in d or "c" in d)
registry.register("cyclic-higgs", CyclicHiggsProblem, _build_cyclic_higgs, lambda d: "r" in d)

registry.register_example("kazdan-warner", _kazdan_warner_example)
registry.register_example("outside", _outside_example)
registry.register_example("cyclic-higgs", _cyclic_higgs_example)
registry.register_example("harness-2d", _harness_example)
