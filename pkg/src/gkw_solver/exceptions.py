# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

"""
Error hierarchy for gkw-solver.

Input-shaped errors also derive from ValueError so callers that only know the
standard library contract still catch them.
"""

from typing import Any, Dict, List, Optional


class GKWError(Exception):
    """Base class for every error raised by gkw-solver."""

    def context(self) -> Dict[str, Any]:
        """Structured details for report.json."""
        return {"type": type(self).__name__, "msg": str(self)}


class NonFiniteField(GKWError, ValueError):
    """A field contains NaN or infinite values."""


class ZeroMeanViolation(GKWError, ValueError):
    """A Poisson right-hand side has a mean above tolerance in strict mode."""

    def __init__(self, means: List[float], tolerance: float) -> None:
        self.means = means
        self.tolerance = tolerance
        super().__init__(f"Right-hand side mean {means} exceeds tolerance {tolerance:.3e}")

    def context(self) -> Dict[str, Any]:
        return {**super().context(), "means": self.means, "tolerance": self.tolerance}


class NegativeCoefficient(GKWError, ValueError):
    """A coefficient field a_j takes a negative value at some node."""

    def __init__(self, index: int, minimum: float) -> None:
        self.index = index
        self.minimum = minimum
        super().__init__(f"Coefficient a[{index}] has negative minimum {minimum:.6e}")

    def context(self) -> Dict[str, Any]:
        return {**super().context(), "index": self.index, "minimum": self.minimum}


class LPNumericalFailure(GKWError):
    """The cone LP produced neither a verifiable witness nor a verifiable separator."""

    def __init__(self, message: str, witness: Optional[List[float]], separator: Optional[List[float]]) -> None:
        self.witness = witness
        self.separator = separator
        super().__init__(message)

    def context(self) -> Dict[str, Any]:
        return {**super().context(), "witness_c": self.witness, "separator_lambda": self.separator}


class ExponentOverflow(GKWError):
    """Some exponent <u_j, xi> exceeded the overflow guard."""

    def __init__(self, index: int, value: float, limit: float) -> None:
        self.index = index
        self.value = value
        self.limit = limit
        super().__init__(f"Exponent for weight {index} reached {value:.3e} (limit {limit:.0f})")

    def context(self) -> Dict[str, Any]:
        return {**super().context(), "index": self.index, "value": self.value}


class NearBoundary(GKWError):
    """The cone margin is too small for a strict-mode solve."""

    def __init__(self, margin: float, threshold: float) -> None:
        self.margin = margin
        self.threshold = threshold
        super().__init__(f"Cone margin {margin:.3e} is within {threshold:.3e}; rerun in audit mode")

    def context(self) -> Dict[str, Any]:
        return {**super().context(), "margin": self.margin, "threshold": self.threshold}


class NotBasicData(GKWError, ValueError):
    """Data handed to the transverse reduction is not constant along the leaves."""

    def __init__(self, field_name: str, defect: float, tolerance: float) -> None:
        self.field_name = field_name
        self.defect = defect
        self.tolerance = tolerance
        super().__init__(f"Field '{field_name}' is not basic: defect {defect:.3e} > {tolerance:.3e}")

    def context(self) -> Dict[str, Any]:
        return {**super().context(), "field": self.field_name, "defect": self.defect}


class AsymmetricData(GKWError, ValueError):
    """Cyclic Higgs data violates the symmetry k_j = k_{r-j} or leaves the value subspace."""


class InconsistencyDetected(GKWError):
    """The equivalence harness found clauses that disagree beyond tolerance."""

    def __init__(self, message: str, details: Dict[str, Any]) -> None:
        self.details = details
        super().__init__(message)

    def context(self) -> Dict[str, Any]:
        return {**super().context(), "details": self.details}


class SchemaError(GKWError, ValueError):
    """A configuration document does not match the published schema."""

    def __init__(self, pointer: str, message: str) -> None:
        self.pointer = pointer
        super().__init__(f"[{pointer or '/'}]: {message}")

    def context(self) -> Dict[str, Any]:
        return {**super().context(), "pointer": self.pointer}


class ExpressionParseError(GKWError, ValueError):
    """A coefficient expression failed to parse or to evaluate on the grid."""

    def __init__(self, expression: str, message: str, position: Optional[int] = None, pointer: str = "") -> None:
        self.expression = expression
        self.position = position
        self.pointer = pointer
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"Cannot use expression '{expression}'{where}: {message}")

    def context(self) -> Dict[str, Any]:
        return {
            **super().context(),
            "expression": self.expression,
            "position": self.position,
            "pointer": self.pointer,
        }
