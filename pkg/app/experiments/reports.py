"""Report bundles: what a command run leaves on disk.

Layout of a bundle directory::

    tables.csv            estimator, worst_case, average, nominal, eta_RW
    metrics.json          every number at full precision
    plot/<curve>.dat      two-column curve data
    plot/figure.gp        gnuplot script over the curve files
    solver.log            log records captured during the run
    estimators/<G>.json   serialized estimators (optional)
    mc_samples.csv        one row per Monte-Carlo experiment (optional)
    error.json            only when the config was rejected
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path
from typing import Any

import numpy as np
from django.conf import settings

from app.lti.systems import StateSpace

TABLE_HEADERS = ("estimator", "worst_case", "average", "nominal", "eta_RW")


@dataclass
class ReportBundle:
    rows: list[dict[str, Any]] = field(default_factory=list)
    metrics: dict[str, Any] = field(default_factory=dict)
    curves: dict[str, np.ndarray] = field(default_factory=dict)
    estimators: dict[str, StateSpace] = field(default_factory=dict)
    mc_rows: list[dict[str, Any]] = field(default_factory=list)
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def merge(self, other: ReportBundle) -> ReportBundle:
        self.rows.extend(other.rows)
        self.metrics.update(other.metrics)
        self.curves.update(other.curves)
        self.estimators.update(other.estimators)
        self.mc_rows.extend(other.mc_rows)
        self.checks.update(other.checks)
        return self


def format_number(value: Any, digits: int | None = None) -> str:
    digits = digits or settings.REPORT_SIGNIFICANT_DIGITS
    if value is None:
        return ""
    if isinstance(value, bool | int | str):
        return str(value)
    value = float(value)
    if math.isnan(value):
        return "nan"
    return f"{value:.{digits}g}"


def to_jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become strings."""
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, list | tuple):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    return value


def _write_json(path: Path, payload: Any) -> None:
    path.write_text(json.dumps(to_jsonable(payload), indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, headers: list[str] | tuple[str, ...], rows: list[dict[str, Any]]) -> None:
    with path.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(headers), extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: format_number(row.get(key)) for key in headers})


def gnuplot_script(curves: dict[str, np.ndarray]) -> str:
    plots = ", ".join(f"'{name}.dat' using 1:2 with linespoints title '{name}'" for name in sorted(curves))
    return "\n".join(
        [
            "set terminal pngcairo size 900,600",
            "set output 'figure.png'",
            "set xlabel 'position on path'",
            "set ylabel 'MSE'",
            "set grid",
            f"plot {plots}" if plots else "# no curves",
            "",
        ],
    )


def write_bundle(bundle: ReportBundle, out_dir: Path, solver_log: str = "") -> Path:
    """Write every part of ``bundle`` under ``out_dir`` (single writer, at the end of a run)."""
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "tables.csv", TABLE_HEADERS, bundle.rows)
    _write_json(out_dir / "metrics.json", {**bundle.metrics, "checks": bundle.checks})
    plot_dir = out_dir / "plot"
    plot_dir.mkdir(exist_ok=True)
    digits = settings.REPORT_SIGNIFICANT_DIGITS
    for name, curve in bundle.curves.items():
        np.savetxt(plot_dir / f"{name}.dat", np.asarray(curve, dtype=float), fmt=f"%.{digits}g")
    (plot_dir / "figure.gp").write_text(gnuplot_script(bundle.curves))
    (out_dir / "solver.log").write_text(solver_log)
    if bundle.estimators:
        estimator_dir = out_dir / "estimators"
        estimator_dir.mkdir(exist_ok=True)
        for name, estimator in bundle.estimators.items():
            _write_json(estimator_dir / f"{name}.json", estimator.to_dict())
    if bundle.mc_rows:
        headers = list(dict.fromkeys(key for row in bundle.mc_rows for key in row))
        _write_csv(out_dir / "mc_samples.csv", headers, bundle.mc_rows)
    return out_dir


def write_error(out_dir: Path, message: str, errors: Any = None) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "error.json"
    _write_json(path, {"error": message, "details": errors})
    return path
