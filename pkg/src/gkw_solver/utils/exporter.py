# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.


import json
from pathlib import Path
from typing import Any, Dict, List, Sequence, Type

import numpy as np

from gkw_solver.grid import Field
from gkw_solver.schemas.base import GKWBaseModel
from gkw_solver.schemas.config import RunConfig
from gkw_solver.schemas.reports import IterationRecord, RunReport
from gkw_solver.utils.logger import logger

CONVERGENCE_COLUMNS = ("iteration", "energy", "residual_inf", "step_length", "cg_iters")


def report_json(report: GKWBaseModel) -> str:
    """Sorted keys, two-space indent, trailing newline."""
    return json.dumps(report.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def write_report(report: GKWBaseModel, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report_json(report), encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path


def write_convergence(diagnostics: Sequence[IterationRecord], path: Path) -> Path:
    """
    One row per Newton iteration: iteration, energy, residual_inf, step_length, cg_iters.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = np.array(
        [[r.iteration, r.energy, r.residual_inf, r.step_length, r.cg_iters] for r in diagnostics],
        dtype=np.float64,
    ).reshape(-1, len(CONVERGENCE_COLUMNS))
    np.savetxt(
        path,
        rows,
        delimiter=",",
        header=",".join(CONVERGENCE_COLUMNS),
        comments="",
        fmt=["%d", "%.17g", "%.17g", "%.17g", "%d"],
    )
    return path


def write_plotdata(xi: Field, directory: Path) -> List[Path]:
    """
    CSV slices for external plotting: a line along axis 1 (all components) and, for m >= 2,
    one matrix per component over axes 1-2 with the remaining axes at index 0.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    grid = xi.grid
    written: List[Path] = []

    line_index = (slice(None),) + (0,) * (grid.m - 1)
    x = np.arange(grid.N[0]) * grid.spacings[0]
    line = np.column_stack([x, xi.values[line_index]])
    header = ",".join(["x_1"] + [f"xi_{i + 1}" for i in range(xi.n)])
    path = directory / "line_x1.csv"
    np.savetxt(path, line, delimiter=",", header=header, comments="", fmt="%.17g")
    written.append(path)

    if grid.m >= 2:
        plane_index = (slice(None), slice(None)) + (0,) * (grid.m - 2)
        for component in range(xi.n):
            path = directory / f"plane_x1x2_xi_{component + 1}.csv"
            np.savetxt(path, xi.values[plane_index + (component,)], delimiter=",", fmt="%.17g")
            written.append(path)
    logger.debug(f"Wrote {len(written)} plot data files to {directory}")
    return written


def export_json_schema(output_dir: Path) -> None:
    """
    Exports JSON schemas of the configuration and report models to the specified directory.

    Args:
        output_dir: The directory where schema files will be saved.
                    Will be created if it does not exist.
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    logger.info(f"Exporting JSON schemas to: {output_dir}")

    schemas: Dict[str, Type[GKWBaseModel]] = {
        "run-config": RunConfig,
        "run-report": RunReport,
    }

    for name, model_class in schemas.items():
        filename = f"{name}.schema.json"
        file_path = output_dir / filename
        logger.debug(f"Generating schema for {name} ({model_class.__name__})")
        json_schema: Dict[str, Any] = model_class.model_json_schema()
        try:
            with open(file_path, "w", encoding="utf-8") as f:
                json.dump(json_schema, f, indent=2, sort_keys=True)
                f.write("\n")
            logger.info(f"Exported {filename}")
        except Exception as e:
            logger.error(f"Failed to write schema for {name}: {e}")
            raise
