"""
Report file emission.

Column orders below are part of the file format; add new columns at the end.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import pandas as pd

from mwen.admm import DecentralizedSolution, IterationRecord
from mwen.core.errors import ReportIOError
from mwen.models import CentralSolution, MemDispatch, WaterDispatch
from .report import ComparisonReport, convergence_points, pct_difference

logger = logging.getLogger(__name__)

COMPARISON_COLUMNS = [
    "scenario",
    "method",
    "rho",
    "ob_window",
    "status",
    "cost",
    "pct_diff",
    "mem_cost",
    "mem_pct_diff",
    "final_eps",
    "iterations",
    "water_energy_kwh",
    "pct_energy_diff",
    "stop_reason",
]

CONVERGENCE_COLUMNS = ["iter", "C_E", "f_W", "norm_r", "norm_s", "eps", "lambda_norm"]

PathLike = Union[str, Path]


def _prepare_dir(out_dir: PathLike) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        logger.error(f"Cannot create output directory {out}: {e}")
        raise ReportIOError(f"Cannot create output directory: {e}", str(out))
    return out


def _write_table(path: Path, rows: List[Dict[str, Any]], columns: Sequence[str]) -> Path:
    # object dtype keeps integers as integers when a column also holds blanks
    frame = pd.DataFrame(rows, columns=list(columns), dtype=object)
    try:
        frame.to_csv(path, index=False, na_rep="", lineterminator="\n")
    except OSError as e:
        logger.error(f"Cannot write {path}: {e}")
        raise ReportIOError(f"Cannot write table: {e}", str(path))
    return path


def _write_json(path: Path, payload: Dict[str, Any]) -> Path:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(payload, f, indent=2, ensure_ascii=False)
            f.write("\n")
    except (OSError, TypeError, ValueError) as e:
        logger.error(f"Cannot write {path}: {e}")
        raise ReportIOError(f"Cannot write summary: {e}", str(path))
    return path


def write_convergence_csv(path: PathLike, records: Sequence[IterationRecord]) -> Path:
    """One row per iteration with the fixed convergence header"""
    path = Path(path)
    _prepare_dir(path.parent)
    rows = [
        {column: value for column, value in point.model_dump().items() if column in CONVERGENCE_COLUMNS}
        for point in convergence_points(records)
    ]
    return _write_table(path, rows, CONVERGENCE_COLUMNS)


def gnuplot_script(report: ComparisonReport) -> str:
    tags = sorted(report.convergence)
    lines = [
        "# convergence plots for " + report.scenario,
        "set datafile separator ','",
        "set key outside",
        "set xlabel 'iteration'",
        "set terminal pngcairo size 1200,500",
        "set output 'feasibility.png'",
        "set logscale y",
        "set ylabel 'eps'",
    ]
    if tags:
        lines.append("plot " + ", \\\n     ".join(
            f"'convergence_{tag}.csv' using 1:6 with lines title '{tag}'" for tag in tags
        ))
        lines += ["unset logscale y", "set output 'objective.png'", "set ylabel 'C_E'"]
        if report.central_cost is not None:
            lines.append(f"central = {report.central_cost!r}")
            lines.append("set ylabel 'C_E / central cost'")
            lines.append("plot " + ", \\\n     ".join(
                f"'convergence_{tag}.csv' using 1:($2/central) with lines title '{tag}'" for tag in tags
            ))
        else:
            lines.append("plot " + ", \\\n     ".join(
                f"'convergence_{tag}.csv' using 1:2 with lines title '{tag}'" for tag in tags
            ))
    return "\n".join(lines) + "\n"


def emit_reports(report: ComparisonReport, out_dir: PathLike, gnuplot: bool = False) -> List[Path]:
    """
    Write comparison.csv, one convergence_<tag>.csv per run and summary.json

    Missing directories are created. Identical reports give byte-identical files.

    Args:
        report: Comparison to write
        out_dir: Target directory
        gnuplot: Also write ``convergence.gp``

    Returns:
        Paths written, in write order

    Raises:
        ReportIOError: a directory or file could not be written
    """
    out = _prepare_dir(out_dir)
    written = [_write_table(
        out / "comparison.csv",
        [row.model_dump(include=set(COMPARISON_COLUMNS)) for row in report.rows],
        COMPARISON_COLUMNS,
    )]
    for tag in sorted(report.convergence):
        rows = [point.model_dump(include=set(CONVERGENCE_COLUMNS)) for point in report.convergence[tag]]
        written.append(_write_table(out / f"convergence_{tag}.csv", rows, CONVERGENCE_COLUMNS))
    written.append(_write_json(out / "summary.json", report.model_dump(mode="json")))
    if gnuplot:
        path = out / "convergence.gp"
        try:
            path.write_text(gnuplot_script(report), encoding="utf-8")
        except OSError as e:
            raise ReportIOError(f"Cannot write plot script: {e}", str(path))
        written.append(path)
    logger.info(f"Wrote {len(written)} report files to {out}")
    return written


def load_report(path: PathLike) -> ComparisonReport:
    """Read a summary.json back"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            return ComparisonReport.model_validate(json.load(f))
    except (OSError, json.JSONDecodeError) as e:
        raise ReportIOError(f"Cannot read report: {e}", str(path))


# single-run outputs

def mem_dispatch_rows(dispatch: MemDispatch) -> List[Dict[str, Any]]:
    horizon = len(dispatch.water_power) or len(dispatch.grid_import)
    rows = []
    for t in range(horizon):
        row: Dict[str, Any] = {"t": t}
        for name, series in dispatch.generator_power.items():
            row[f"P_G[{name}]"] = series[t]
            row[f"u_G[{name}]"] = dispatch.generator_on[name][t]
        for name, series in dispatch.storage_charge.items():
            row[f"P_ESc[{name}]"] = series[t]
            row[f"P_ESd[{name}]"] = dispatch.storage_discharge[name][t]
            row[f"EL[{name}]"] = dispatch.storage_level[name][t]
        if dispatch.grid_import:
            row["P_grid_import"] = dispatch.grid_import[t]
            row["P_grid_export"] = dispatch.grid_export[t]
        row["P_water"] = dispatch.water_power[t]
        rows.append(row)
    return rows


def water_dispatch_rows(dispatch: WaterDispatch) -> List[Dict[str, Any]]:
    rows = []
    for t in range(len(dispatch.power)):
        row: Dict[str, Any] = {"t": t}
        if dispatch.wastewater_flow:
            row["W_ww"] = dispatch.wastewater_flow[t]
            row["u_ww"] = dispatch.wastewater_on[t]
            row["L_ww"] = dispatch.reservoir_level[t]
        for name, series in dispatch.treatment_flow.items():
            row[f"W_wt[{name}]"] = series[t]
            row[f"u_wt[{name}]"] = dispatch.treatment_on[name][t]
        for name, series in dispatch.tank_charge.items():
            row[f"W_stc[{name}]"] = series[t]
            row[f"W_std[{name}]"] = dispatch.tank_discharge[name][t]
            row[f"L_st[{name}]"] = dispatch.tank_level[name][t]
        for pump_id, series in dispatch.pump_power.items():
            row[f"P_pump[{pump_id}]"] = series[t]
        row["P_W"] = dispatch.power[t]
        rows.append(row)
    return rows


def _dispatch_table(path: Path, rows: List[Dict[str, Any]]) -> Path:
    columns = list(rows[0]) if rows else ["t"]
    return _write_table(path, rows, columns)


def emit_central(solution: CentralSolution, out_dir: PathLike) -> List[Path]:
    """mem_dispatch.csv, water_dispatch.csv and summary.json of a centralized solve"""
    out = _prepare_dir(out_dir)
    return [
        _dispatch_table(out / "mem_dispatch.csv", mem_dispatch_rows(solution.mem)),
        _dispatch_table(out / "water_dispatch.csv", water_dispatch_rows(solution.water)),
        _write_json(out / "summary.json", {
            "cost": solution.cost,
            "water_energy_kwh": solution.water_energy_kwh,
            "status": solution.status,
        }),
    ]


def emit_admm(
    out_dir: PathLike,
    records: Sequence[IterationRecord],
    solution: Optional[DecentralizedSolution] = None,
    central_cost: Optional[float] = None,
    error: Optional[str] = None,
) -> List[Path]:
    """
    Convergence CSV and summary of one decentralized run

    Without a solution (aborted run) the partial log is still written and the
    summary records the error.
    """
    out = _prepare_dir(out_dir)
    written = [write_convergence_csv(out / "convergence.csv", records)]
    summary: Dict[str, Any] = {
        "restored_cost": solution.restored_cost if solution else None,
        "central_cost_if_available": central_cost,
        "pct_diff": pct_difference(solution.restored_cost, central_cost) if solution else None,
        "stop_reason": solution.stop_reason if solution else "aborted",
        "iterations": len(records),
    }
    if solution is not None:
        summary["final_eps"] = solution.final_eps
        summary["water_energy_kwh"] = solution.water_energy_kwh
        written.append(_dispatch_table(out / "mem_dispatch.csv", mem_dispatch_rows(solution.mem)))
    if error:
        summary["error"] = error
    written.append(_write_json(out / "summary.json", summary))
    return written
