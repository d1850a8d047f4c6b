# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

import json
import sys
from pathlib import Path
from typing import List
from unittest.mock import patch

import pytest

from gkw_solver.cli import main
from gkw_solver.runner import REPORT_FILE, SOLUTION_FILE


def _run_cli(argv: List[str]) -> int:
    with patch.object(sys, "argv", ["gkw"] + argv):
        with pytest.raises(SystemExit) as excinfo:
            main()
    code = excinfo.value.code
    assert isinstance(code, int)
    return code


def _write_example(tmp_path: Path, preset: str, *params: str) -> Path:
    path = tmp_path / f"{preset}.json"
    assert _run_cli(["make-example", preset, *params, "--out", str(path)]) == 0
    return path


def test_cli_help(capsys: pytest.CaptureFixture[str]) -> None:
    """Test that --help prints the description and exits cleanly."""
    assert _run_cli(["--help"]) == 0
    assert "Kazdan-Warner" in capsys.readouterr().out


def test_cli_no_args(capsys: pytest.CaptureFixture[str]) -> None:
    """Test that running with no args exits with error."""
    assert _run_cli([]) == 1
    assert "usage:" in capsys.readouterr().err


def test_make_example_prints_config(capsys: pytest.CaptureFixture[str]) -> None:
    """Test that make-example prints the preset configuration with overrides."""
    assert _run_cli(["make-example", "kazdan-warner", "N=16", "c=2"]) == 0
    document = json.loads(capsys.readouterr().out)
    assert document["grid"]["N"] == [16]
    assert document["problem"]["c"] == "2"


def test_make_example_bad_params(capsys: pytest.CaptureFixture[str]) -> None:
    """Test that malformed preset parameters exit with code 4."""
    assert _run_cli(["make-example", "kazdan-warner", "N"]) == 4
    assert "key=value" in capsys.readouterr().out
    assert _run_cli(["make-example", "kazdan-warner", "c=1 + y"]) == 4


def test_make_example_unknown_preset(capsys: pytest.CaptureFixture[str]) -> None:
    """Test that argparse rejects an unknown preset."""
    assert _run_cli(["make-example", "nope"]) == 2
    assert "invalid choice" in capsys.readouterr().err


def test_solve_success(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test a successful solve and its summary."""
    config = _write_example(tmp_path, "kazdan-warner", "N=16")
    out = tmp_path / "out"
    assert _run_cli(["solve", str(config), "--out", str(out)]) == 0
    captured = capsys.readouterr().out
    assert "✅ solve: Solution" in captured
    assert "Verdict: Inside" in captured
    assert (out / REPORT_FILE).exists()
    assert (out / SOLUTION_FILE).exists()


def test_solve_outside(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test that an Outside instance exits with code 2 and prints the separator."""
    config = _write_example(tmp_path, "outside", "N=16")
    assert _run_cli(["solve", str(config), "--out", str(tmp_path / "out")]) == 2
    captured = capsys.readouterr().out
    assert "❌ solve: NoSolutionCertified (exit 2)" in captured
    assert "Separator lambda" in captured


def test_check_json_output(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test that --json prints the same report that is written to disk."""
    config = _write_example(tmp_path, "outside", "N=16")
    capsys.readouterr()
    assert _run_cli(["check", str(config), "--out", str(tmp_path / "out"), "--json", "--reproducible"]) == 2
    report = json.loads(capsys.readouterr().out)
    assert report["mode"] == "check"
    assert report["status"] == "Outside"
    assert report["exit_code"] == 2
    assert report == json.loads((tmp_path / "out" / REPORT_FILE).read_text(encoding="utf-8"))


def test_audit_flag(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test that --audit runs the minimizer on an Outside instance."""
    config = tmp_path / "audit.yaml"
    config.write_text(
        "grid: {m: 1, N: [16]}\nproblem: {h: '1', c: '-1'}\nsolver: {max_newton: 200}\n", encoding="utf-8"
    )
    assert _run_cli(["solve", str(config), "--out", str(tmp_path / "out"), "--audit", "--json"]) == 2
    report = json.loads(capsys.readouterr().out)
    assert report["outcome"]["audit"] is True
    assert report["outcome"]["audit_confirmed"] is True


def test_harness(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test the harness subcommand on basic data."""
    config = _write_example(tmp_path, "harness-2d", "N=16")
    assert _run_cli(["harness", str(config), "--out", str(tmp_path / "out")]) == 0
    captured = capsys.readouterr().out
    assert "✅ harness: consistent" in captured
    assert "Clauses:" in captured


def test_verify(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test verifying a field written by a previous solve."""
    config = _write_example(tmp_path, "kazdan-warner", "N=16", "h=1 + 0.5*sin(x)")
    assert _run_cli(["solve", str(config), "--out", str(tmp_path / "solve"), "--seed", "3"]) == 0
    field = tmp_path / "solve" / SOLUTION_FILE
    assert _run_cli(["verify", str(config), str(field), "--out", str(tmp_path / "verify")]) == 0
    assert "✅ verify: verified" in capsys.readouterr().out


def test_verify_missing_field(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test verify with a field file that does not exist."""
    config = _write_example(tmp_path, "kazdan-warner", "N=16")
    assert _run_cli(["verify", str(config), str(tmp_path / "missing.gkwf")]) == 4
    assert "File not found" in capsys.readouterr().out


def test_rejected_config(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test that a schema violation is reported with its pointer."""
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"grid": {"m": 0, "N": [16]}, "problem": {"h": "1", "c": "1"}}), encoding="utf-8")
    assert _run_cli(["solve", str(config)]) == 4
    captured = capsys.readouterr().out
    assert "❌ Configuration rejected" in captured
    assert "/grid/m" in captured


def test_rejected_config_json(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test the JSON error payload for a bad expression."""
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"grid": {"m": 1, "N": [16]}, "problem": {"h": "1 + y", "c": "1"}}), encoding="utf-8")
    assert _run_cli(["check", str(config), "--json"]) == 4
    payload = json.loads(capsys.readouterr().out)
    assert payload["exit_code"] == 4
    assert payload["errors"][0]["type"] == "ExpressionParseError"
    assert payload["errors"][0]["pointer"] == "/problem/h"


def test_missing_config(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test that a missing configuration file exits with code 4."""
    assert _run_cli(["check", str(tmp_path / "nope.yaml")]) == 4
    assert "File not found" in capsys.readouterr().out


def test_export_schema(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test exporting the JSON schemas."""
    out = tmp_path / "schemas"
    assert _run_cli(["export-schema", str(out)]) == 0
    assert "✅ Schemas exported" in capsys.readouterr().out
    assert (out / "run-config.schema.json").exists()
    assert (out / "run-report.schema.json").exists()


def test_export_schema_failure(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test the error path of export-schema."""
    with patch("gkw_solver.cli.export_json_schema", side_effect=OSError("disk full")):
        assert _run_cli(["export-schema", str(tmp_path)]) == 1
    assert "❌ Export failed: disk full" in capsys.readouterr().out


def test_log_level_override(capsys: pytest.CaptureFixture[str]) -> None:
    """Test that --log-level reconfigures the logger."""
    with patch("gkw_solver.cli.configure") as configure:
        assert _run_cli(["--log-level", "debug", "make-example", "outside"]) == 0
    configure.assert_called_once_with("DEBUG")
    assert json.loads(capsys.readouterr().out)["problem"]["c"] == "-1"
