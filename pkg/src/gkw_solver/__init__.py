# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

"""
Certified existence checks and Newton-Krylov solves for generalized Kazdan-Warner systems on flat tori
"""

__version__ = "0.1.0"

from .cone import WeightSystem, active_set, cone_membership, kernel_basis  # noqa: E402
from .foliate import Foliation, lift, reduce, theorem_harness  # noqa: E402
from .functional import (  # noqa: E402
    ProblemInstance,
    energy,
    explicit_instance,
    hessian_apply,
    kazdan_warner_instance,
    residual,
    validate,
)
from .grid import Field, PeriodicGrid, laplacian  # noqa: E402
from .higgs import CyclicHiggsSpec, build_instance, check_symmetry, cyclic_weights  # noqa: E402
from .solver import SolveOptions, solve, verify_solution  # noqa: E402

__all__ = [
    "CyclicHiggsSpec",
    "Field",
    "Foliation",
    "PeriodicGrid",
    "ProblemInstance",
    "SolveOptions",
    "WeightSystem",
    "active_set",
    "build_instance",
    "check_symmetry",
    "cone_membership",
    "cyclic_weights",
    "energy",
    "explicit_instance",
    "hessian_apply",
    "kazdan_warner_instance",
    "kernel_basis",
    "laplacian",
    "lift",
    "reduce",
    "residual",
    "solve",
    "theorem_harness",
    "validate",
    "verify_solution",
]
