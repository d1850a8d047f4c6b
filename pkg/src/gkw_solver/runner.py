# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

"""
Orchestrates one configured run: build the instance, validate, then check / solve / harness /
verify, and write report.json plus the field and plot artifacts.
"""

from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import ValidationError

from gkw_solver import __version__
from gkw_solver.exceptions import (
    AsymmetricData,
    ExpressionParseError,
    GKWError,
    NegativeCoefficient,
    NonFiniteField,
    NotBasicData,
    SchemaError,
    ZeroMeanViolation,
)
from gkw_solver.foliate import Foliation, harness_run, leaf_axes_from_config
from gkw_solver.functional import ProblemInstance, validate
from gkw_solver.grid import Field
from gkw_solver.registry import registry
from gkw_solver.schemas.config import Mode, RunConfig
from gkw_solver.schemas.reports import (
    EquivalenceReport,
    RunReport,
    SolveStatus,
    SolveSummary,
    ValidationReport,
    Verdict,
    VerificationReport,
)
from gkw_solver.solver import SolveOptions, SolveOutcome, random_initial_field, solve, verify_solution
from gkw_solver.utils.exporter import write_convergence, write_plotdata, write_report
from gkw_solver.utils.fieldio import read_field, write_field
from gkw_solver.utils.logger import logger

EXIT_OK = 0
EXIT_NO_SOLUTION = 2
EXIT_NUMERICAL = 3
EXIT_CONFIG = 4

_CONFIG_ERRORS = (
    SchemaError,
    ExpressionParseError,
    NegativeCoefficient,
    NotBasicData,
    AsymmetricData,
    NonFiniteField,
    ZeroMeanViolation,
)

REPORT_FILE = "report.json"
SOLUTION_FILE = "solution.gkwf"
CONVERGENCE_FILE = "convergence.csv"
PLOT_DIR = "plotdata"


@dataclass(frozen=True)
class RunOptions:
    """Command-line overrides applied on top of the configuration."""

    mode: Optional[Mode] = None
    out: Optional[Union[str, Path]] = None
    seed: Optional[int] = None
    reproducible: bool = False
    audit: Optional[bool] = None
    strict_basic: bool = False
    field_path: Optional[Union[str, Path]] = None


@dataclass
class RunResult:
    report: RunReport
    exit_code: int
    out_dir: Path
    artifacts: List[Path] = field(default_factory=list)


@dataclass
class _Collected:
    status: str = "error"
    exit_code: int = EXIT_NUMERICAL
    validation: Optional[ValidationReport] = None
    outcome: Optional[SolveSummary] = None
    verification: Optional[VerificationReport] = None
    equivalence: Optional[EquivalenceReport] = None
    errors: List[Dict[str, Any]] = field(default_factory=list)
    artifacts: List[Path] = field(default_factory=list)


def _solver_options(cfg: RunConfig, options: RunOptions) -> SolveOptions:
    update: Dict[str, Any] = {}
    if options.audit is not None:
        update["audit"] = options.audit
    if options.seed is not None:
        update["seed"] = options.seed
    if not update:
        return cfg.solver
    return SolveOptions.model_validate({**cfg.solver.model_dump(), **update})


def _outcome_exit(status: SolveStatus) -> int:
    if status is SolveStatus.SOLUTION:
        return EXIT_OK
    if status is SolveStatus.NO_SOLUTION_CERTIFIED:
        return EXIT_NO_SOLUTION
    return EXIT_NUMERICAL


def _write_solution(outcome: SolveOutcome, out_dir: Path, collected: _Collected) -> None:
    if outcome.diagnostics:
        collected.artifacts.append(write_convergence(outcome.diagnostics, out_dir / CONVERGENCE_FILE))
    if outcome.xi is not None:
        collected.artifacts.append(write_field(outcome.xi, out_dir / SOLUTION_FILE))
        collected.artifacts.extend(write_plotdata(outcome.xi, out_dir / PLOT_DIR))


def _initial_field(inst: ProblemInstance, opts: SolveOptions) -> Optional[Field]:
    if opts.seed is None:
        return None
    return random_initial_field(inst.grid, inst.n, opts.seed)


def _execute(cfg: RunConfig, mode: Mode, options: RunOptions, out_dir: Path, collected: _Collected) -> None:
    tolerances = cfg.tolerances
    opts = _solver_options(cfg, options)
    grid = cfg.grid.to_grid()
    inst = registry.build(cfg.problem, grid, tolerances)
    validation = validate(inst, strict=True, tau_cone=tolerances.tau_cone, tau_rank=tolerances.tau_rank)
    collected.validation = validation
    certificate = validation.certificate
    assert certificate is not None

    if mode == "check":
        collected.status = certificate.verdict.value
        collected.exit_code = EXIT_OK if certificate.verdict is Verdict.INSIDE else EXIT_NO_SOLUTION
        return

    if mode == "solve":
        outcome = solve(inst, opts, _initial_field(inst, opts), certificate, tolerances.tau_rank)
        collected.outcome = outcome.summary()
        collected.status = outcome.status.value
        collected.exit_code = _outcome_exit(outcome.status)
        if outcome.xi is not None:
            collected.verification = verify_solution(inst, outcome.xi, outcome.tolerance)
        _write_solution(outcome, out_dir, collected)
        return

    if mode == "harness":
        fol = Foliation(grid, leaf_axes_from_config(cfg.foliation.leaf_axes))
        result = harness_run(
            inst,
            fol,
            opts,
            strict_basic=options.strict_basic,
            tau_basic=tolerances.tau_basic,
            tau_cone=tolerances.tau_cone,
            tau_rank=tolerances.tau_rank,
        )
        collected.equivalence = result.report
        collected.outcome = result.full.summary()
        if result.report.verdict is Verdict.INSIDE:
            collected.status = "consistent"
            collected.exit_code = EXIT_OK
        else:
            collected.status = SolveStatus.NO_SOLUTION_CERTIFIED.value
            collected.exit_code = EXIT_NO_SOLUTION
        if result.full.xi is not None:
            collected.verification = verify_solution(inst, result.full.xi, result.full.tolerance)
        _write_solution(result.full, out_dir, collected)
        return

    if options.field_path is None:
        raise SchemaError("", "verify mode needs a field file")
    xi = read_field(options.field_path)
    if xi.grid.shape != grid.shape or xi.grid.L != grid.L or xi.n != inst.n:
        raise SchemaError("", f"Field file {options.field_path} does not match the configured grid and problem")
    verification = verify_solution(inst, Field(grid, xi.values), opts.tolerance(inst))
    collected.verification = verification
    collected.status = "verified" if verification.is_solution else "residual-above-tolerance"
    collected.exit_code = EXIT_OK if verification.is_solution else EXIT_NUMERICAL


def run(cfg: RunConfig, options: Optional[RunOptions] = None) -> RunResult:
    """
    Runs `cfg` and writes report.json (always), solution.gkwf, convergence.csv and plotdata/.

    Exit codes: 0 solved or consistent, 2 no solution (certified), 3 numerical failure,
    4 configuration or data error. Every error is also recorded in report.json.
    """
    options = options or RunOptions()
    mode: Mode = options.mode or cfg.mode
    out_dir = Path(options.out) if options.out is not None else Path(cfg.output_dir)
    metadata: Dict[str, Any] = {
        "version": __version__,
        "config_hash": cfg.canonical_hash(),
        "seed": options.seed if options.seed is not None else cfg.solver.seed,
        "reproducible": options.reproducible,
    }
    if not options.reproducible:
        metadata["timestamp"] = datetime.now(timezone.utc).isoformat()

    collected = _Collected()
    logger.info(f"Run '{mode}' for problem kind '{cfg.problem.kind}' into {out_dir}")
    try:
        _execute(cfg, mode, options, out_dir, collected)
    except _CONFIG_ERRORS as e:
        logger.error(f"Configuration or data error: {e}")
        collected.errors.append(e.context())
        collected.status, collected.exit_code = "error", EXIT_CONFIG
    except GKWError as e:
        logger.error(f"Numerical failure: {e}")
        collected.errors.append(e.context())
        collected.status, collected.exit_code = "error", EXIT_NUMERICAL
    except (ValidationError, ValueError) as e:
        logger.error(f"Invalid input: {e}")
        collected.errors.append({"type": type(e).__name__, "msg": str(e)})
        collected.status, collected.exit_code = "error", EXIT_CONFIG

    body = RunReport(
        mode=mode,
        status=collected.status,
        exit_code=collected.exit_code,
        metadata=metadata,
        validation=collected.validation,
        outcome=collected.outcome,
        verification=collected.verification,
        equivalence=collected.equivalence,
        errors=collected.errors,
    )
    report = body.model_copy(update={"metadata": {**metadata, "report_hash": body.canonical_hash()}})
    path = write_report(report, out_dir / REPORT_FILE)
    logger.info(f"Run finished with status '{report.status}' (exit {report.exit_code})")
    return RunResult(report, collected.exit_code, out_dir, [path] + collected.artifacts)
