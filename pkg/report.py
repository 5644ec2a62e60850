"""
Render command results as CSV or JSON text.

CSV: header row, '.' decimals, 6 significant digits for tables (6 fixed
decimals for single umed/estimate records), LF line endings.
JSON: one top-level object whose keys keep the order they are given in.
"""

import json
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import numpy as np
import pandas as pd

FORMATS = ("csv", "json")


def _scalar(value: Any, decimals: Optional[int] = None) -> Any:
    """numpy/pandas scalar -> JSON-able python value, floats rounded like the CSV."""
    if value is None or value is pd.NA:
        return None
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return None
        if decimals is not None:
            return round(value, decimals)
        return float(f"{value:.6g}")
    return value


def _frame_rows(frame: pd.DataFrame) -> List[Dict[str, Any]]:
    return [
        {col: _scalar(value) for col, value in zip(frame.columns, row)}
        for row in frame.itertuples(index=False, name=None)
    ]


def render_table(frame: pd.DataFrame, fmt: str = "csv", title: Optional[str] = None) -> str:
    if fmt == "csv":
        return frame.to_csv(index=False, float_format="%.6g", lineterminator="\n")
    payload: Dict[str, Any] = {}
    if title:
        payload["table"] = title
    payload["columns"] = list(frame.columns)
    payload["rows"] = _frame_rows(frame)
    return json.dumps(payload, indent=2) + "\n"


def render_record(record: Mapping[str, Any], fmt: str = "csv", decimals: int = 6) -> str:
    """One result record (umed, estimate, asympt) with floats at fixed decimals."""
    if fmt == "csv":
        cells = []
        for value in record.values():
            value = _scalar(value, decimals)
            if value is None:
                cells.append("")
            elif isinstance(value, bool):
                cells.append("true" if value else "false")
            elif isinstance(value, float):
                cells.append(f"{value:.{decimals}f}")
            else:
                cells.append(str(value))
        return ",".join(record.keys()) + "\n" + ",".join(cells) + "\n"
    return json.dumps({k: _scalar(v, decimals) for k, v in record.items()}, indent=2) + "\n"


def simulation_documents(result, config, fmt: str = "csv") -> Dict[str, str]:
    """
    CSV: {"": records, "_efficiency": clean-data efficiencies, "_max_mse": max MSE over x0}.
    JSON: {"": one object with config, records, efficiency and max_mse}.
    """
    records = result.to_frame()
    efficiency = result.efficiency_frame()
    max_mse = result.max_mse_frame()
    if fmt == "csv":
        return {
            "": render_table(records, "csv"),
            "_efficiency": render_table(efficiency, "csv"),
            "_max_mse": render_table(max_mse, "csv"),
        }
    payload = {
        "family": result.family,
        "fingerprint": result.metadata["fingerprint"],
        "config": config.as_dict(),
        "records": _frame_rows(records),
        "efficiency": _frame_rows(efficiency),
        "max_mse": _frame_rows(max_mse),
    }
    return {"": json.dumps(payload, indent=2) + "\n"}


def sibling_path(path: Path, suffix: str) -> Path:
    """results.csv + '_efficiency' -> results_efficiency.csv"""
    return path.with_name(f"{path.stem}{suffix}{path.suffix}")


def write_output(text: str, path: Optional[str] = None) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    target = Path(path)
    if target.parent and not target.parent.exists():
        target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
