# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

from gkw_solver.schemas.base import GKWBaseModel
from gkw_solver.schemas.reports import (
    ConeCertificate,
    EquivalenceReport,
    IterationRecord,
    RunReport,
    SolveStatus,
    SolveSummary,
    ValidationReport,
    Verdict,
    VerificationReport,
)

__all__ = [
    "ConeCertificate",
    "EquivalenceReport",
    "GKWBaseModel",
    "IterationRecord",
    "RunReport",
    "SolveStatus",
    "SolveSummary",
    "ValidationReport",
    "Verdict",
    "VerificationReport",
]
