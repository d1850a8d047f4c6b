# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

import argparse
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional

from gkw_solver.config import config_from_dict, load_config
from gkw_solver.exceptions import GKWError
from gkw_solver.registry import registry
from gkw_solver.runner import EXIT_CONFIG, RunOptions, RunResult, run
from gkw_solver.schemas.config import Mode, RunConfig
from gkw_solver.utils.exporter import export_json_schema, report_json
from gkw_solver.utils.logger import configure, logger


def _load(args: argparse.Namespace) -> Optional[RunConfig]:
    """
    Loads the configuration named on the command line; prints the error and returns None on failure.
    """
    try:
        return load_config(Path(args.config))
    except GKWError as e:
        if args.json:
            print(json.dumps({"exit_code": EXIT_CONFIG, "errors": [e.context()]}, sort_keys=True))
        else:
            print(f"❌ Configuration rejected: {args.config}")
            print(f"  - {e}")
        return None


def _print_result(result: RunResult) -> None:
    report = result.report
    if report.exit_code == 0:
        print(f"✅ {report.mode}: {report.status}")
    else:
        print(f"❌ {report.mode}: {report.status} (exit {report.exit_code})")

    certificate = report.validation.certificate if report.validation else None
    if certificate is not None:
        print(f"   Verdict: {certificate.verdict.value} (margin {certificate.margin})")
        if certificate.witness_c is not None:
            print(f"   Witness c: {certificate.witness_c}")
        if certificate.separator_lambda is not None:
            print(f"   Separator lambda: {certificate.separator_lambda}")
    if report.outcome is not None:
        print(f"   Newton iterations: {report.outcome.iterations}, residual {report.outcome.residual_inf}")
    if report.verification is not None:
        print(f"   Verified residual: {report.verification.residual_inf:.3e}")
    if report.equivalence is not None:
        print(f"   Clauses: {report.equivalence.clauses}")
    for error in report.errors:
        msg = error.get("msg", "Unknown error")
        pointer = error.get("pointer") or "Root"
        print(f"  - [{pointer}]: {msg}")
    print(f"   Report: {result.out_dir / 'report.json'}")


def _handle_run(args: argparse.Namespace, mode: Mode) -> int:
    cfg = _load(args)
    if cfg is None:
        return EXIT_CONFIG
    options = RunOptions(
        mode=mode,
        out=args.out,
        seed=args.seed,
        reproducible=args.reproducible,
        audit=True if args.audit else None,
        strict_basic=getattr(args, "strict_basic", False),
        field_path=getattr(args, "field", None),
    )
    result = run(cfg, options)
    if args.json:
        print(report_json(result.report), end="")
    else:
        _print_result(result)
    return result.exit_code


def handle_check(args: argparse.Namespace) -> int:
    """
    Handles the 'check' subcommand.
    Builds the instance and reports the cone verdict with its certificate.
    """
    return _handle_run(args, "check")


def handle_solve(args: argparse.Namespace) -> int:
    return _handle_run(args, "solve")


def handle_harness(args: argparse.Namespace) -> int:
    return _handle_run(args, "harness")


def handle_verify(args: argparse.Namespace) -> int:
    """
    Handles the 'verify' subcommand.
    Re-checks a stored field against the configured instance.
    """
    if not Path(args.field).exists():
        print(f"Error: File not found: {args.field}")
        return EXIT_CONFIG
    return _handle_run(args, "verify")


def _parse_params(pairs: List[str]) -> Dict[str, str]:
    params: Dict[str, str] = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ValueError(f"Expected key=value, got {pair!r}")
        params[key.strip()] = value.strip()
    return params


def handle_make_example(args: argparse.Namespace) -> int:
    """
    Handles the 'make-example' subcommand.
    Prints (or writes) a ready-to-run configuration for a named preset.
    """
    try:
        document = registry.example(args.preset, _parse_params(args.params))
        config_from_dict(document)
    except (ValueError, GKWError) as e:
        print(f"❌ {e}")
        return EXIT_CONFIG

    text = json.dumps(document, indent=2, sort_keys=True) + "\n"
    if args.out:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info(f"Wrote example '{args.preset}' to {path}")
    else:
        print(text, end="")
    return 0


def handle_export(args: argparse.Namespace) -> int:
    """
    Handles the 'export-schema' subcommand.
    Exports JSON schemas to the given directory.
    """
    output_dir = Path(args.dir)
    try:
        export_json_schema(output_dir)
        print(f"✅ Schemas exported to: {output_dir}")
        return 0
    except Exception as e:
        print(f"❌ Export failed: {e}")
        return 1


def _add_run_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("config", help="Path to the run configuration (JSON or YAML).")
    parser.add_argument("--out", help="Output directory (overrides output_dir).")
    parser.add_argument("--seed", type=int, help="Seed for the random initial field.")
    parser.add_argument("--reproducible", action="store_true", help="Omit timestamps from report.json.")
    parser.add_argument("--audit", action="store_true", help="Run the minimizer even on Outside instances.")
    parser.add_argument("--json", action="store_true", help="Print report.json to stdout.")


def main() -> None:
    """
    Main entry point for the CLI.
    """
    parser = argparse.ArgumentParser(description="gkw: generalized Kazdan-Warner existence checks and solves.")
    parser.add_argument(
        "--log-level",
        type=str.upper,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Override GKW_LOG_LEVEL for this invocation.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, help="Subcommands")

    # Subcommand: check
    parser_check = subparsers.add_parser("check", help="Validate the data and decide the cone condition.")
    _add_run_arguments(parser_check)
    parser_check.set_defaults(func=handle_check)

    # Subcommand: solve
    parser_solve = subparsers.add_parser("solve", help="Solve the configured system.")
    _add_run_arguments(parser_solve)
    parser_solve.set_defaults(func=handle_solve)

    # Subcommand: harness
    parser_harness = subparsers.add_parser("harness", help="Run the foliated equivalence harness.")
    _add_run_arguments(parser_harness)
    parser_harness.add_argument("--strict-basic", action="store_true", help="Reject non-basic data.")
    parser_harness.set_defaults(func=handle_harness)

    # Subcommand: verify
    parser_verify = subparsers.add_parser("verify", help="Verify a stored solution field.")
    _add_run_arguments(parser_verify)
    parser_verify.add_argument("field", help="Path to a .gkwf field file.")
    parser_verify.set_defaults(func=handle_verify)

    # Subcommand: make-example
    parser_example = subparsers.add_parser("make-example", help="Print an example configuration.")
    parser_example.add_argument("preset", choices=registry.examples(), help="Example preset.")
    parser_example.add_argument("params", nargs="*", help="Overrides as key=value.")
    parser_example.add_argument("--out", help="Write to this file instead of stdout.")
    parser_example.set_defaults(func=handle_make_example)

    # Subcommand: export-schema
    parser_export = subparsers.add_parser("export-schema", help="Export JSON schemas to a directory.")
    parser_export.add_argument("dir", help="Directory to output schema files.")
    parser_export.set_defaults(func=handle_export)

    # Parse args
    if len(sys.argv) == 1:
        parser.print_help(sys.stderr)
        sys.exit(1)

    args = parser.parse_args()
    if args.log_level:
        configure(args.log_level)

    # Execute the selected function
    exit_code = args.func(args)
    sys.exit(exit_code)


if __name__ == "__main__":
    main()  # pragma: no cover
