"""
Report Service - renders run results as JSON documents and pandas-backed CSV files.

Floats are always written with 17 significant digits in scientific notation and no wall-clock
value enters a data file, so identical runs produce byte-identical outputs.
"""
import enum
import json
import logging
import math
import os
from dataclasses import is_dataclass
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from errors import OutputError
from models import RunReport

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.16e"


def format_float(value: float) -> Optional[str]:
    if not math.isfinite(value):
        return None
    return format(value, ".16e")


def to_plain(value: Any) -> Any:
    """Convert results into JSON-ready plain data (complex as {re, im}, enums as values)."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, np.ndarray):
        return [to_plain(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if is_dataclass(value) and hasattr(value, "to_dict"):
        return to_plain(value.to_dict())
    raise TypeError(f"cannot render {type(value).__name__} as JSON")


def _render(value: Any, indent: int, level: int) -> str:
    pad, inner = " " * (indent * level), " " * (indent * (level + 1))
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        text = format_float(value)
        return "null" if text is None else text
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f"{inner}{json.dumps(k, ensure_ascii=False)}: {_render(v, indent, level + 1)}"
            for k, v in value.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if not value:
        return "[]"
    items = [f"{inner}{_render(v, indent, level + 1)}" for v in value]
    return "[\n" + ",\n".join(items) + "\n" + pad + "]"


def render_json(value: Any, indent: int = 2) -> str:
    return _render(to_plain(value), indent, 0) + "\n"


class ReportService:
    """Service for writing reports and tables."""

    # ============================================
    # FILES
    # ============================================

    @staticmethod
    def ensure_dir(path: str) -> str:
        try:
            os.makedirs(path, exist_ok=True)
        except OSError as exc:
            raise OutputError(path, exc.strerror or str(exc))
        if not os.access(path, os.W_OK):
            raise OutputError(path, "directory is not writable")
        return path

    @staticmethod
    def write_json(path: str, value: Any) -> str:
        text = render_json(value)
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(text)
        except OSError as exc:
            raise OutputError(path, exc.strerror or str(exc))
        logger.debug("wrote %s", path)
        return path

    @staticmethod
    def write_frame(path: str, frame: pd.DataFrame) -> str:
        try:
            frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        except OSError as exc:
            raise OutputError(path, exc.strerror or str(exc))
        logger.debug("wrote %s (%d rows)", path, len(frame))
        return path

    # ============================================
    # TABULAR VIEWS
    # ============================================

    @staticmethod
    def report_row(report: RunReport, extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        """Flatten a RunReport into one CSV row; missing stages leave empty cells."""
        row: Dict[str, Any] = dict(extra or {})
        row["scenario"] = report.scenario
        row["config_hash"] = report.config_hash
        row["status"] = report.status.value
        row["error_codes"] = ";".join(e["code"] for e in report.errors)
        row["j0"] = report.j0
        for key, value in report.trajectory.items():
            row[key] = value

        phase = report.phase.to_dict() if report.phase else {}
        for key in (
            "dynamical_angle",
            "geometric_angle_numeric",
            "geometric_angle_analytic",
            "geometric_angle_discrete",
            "residual",
            "min_fidelity",
        ):
            row[key] = phase.get(key)
        for key in ("omega_total", "omega_paper"):
            value = phase.get(key)
            row[f"{key}_re"] = value.real if value is not None else None
            row[f"{key}_im"] = value.imag if value is not None else None

        thermo = report.thermo.to_dict() if report.thermo else {}
        for key in (
            "ln_Z",
            "E_fd",
            "E_leibniz_paper",
            "E_leibniz_consistent",
            "E_const_omega",
            "E_extrinsic",
            "delta_S",
            "extrinsic_term",
            "const_omega_discrepancy",
            "identification_residual",
            "dynamical_residual",
        ):
            row[key] = thermo.get(key)
        terms = thermo.get("intrinsic_terms") or [None, None, None]
        row["intrinsic_integral"], row["intrinsic_upper"], row["intrinsic_lower"] = terms

        gravity = report.gravity.to_dict() if report.gravity else {}
        for key in ("omega", "trace_energy", "trace_residual", "cosmological_constant"):
            row[key] = gravity.get(key)
        for key, value in (report.reduction or {}).items():
            row[f"reduction_{key}"] = value
        return row

    @staticmethod
    def reports_frame(rows: List[Dict[str, Any]]) -> pd.DataFrame:
        return pd.DataFrame(rows)

    @staticmethod
    def long_format(frame: pd.DataFrame, x: str, series: List[str]) -> pd.DataFrame:
        """Tidy (series, x, y) table for plotting tools."""
        present = [s for s in series if s in frame.columns]
        tidy = frame[[x, *present]].melt(id_vars=[x], var_name="series", value_name="y")
        tidy = tidy.rename(columns={x: "x"})
        return tidy[["series", "x", "y"]]
