"""Deterministic artifact files: canonical CSV/JSON text and grid checkpoints.

Identical data must produce identical bytes, so every cell goes through one
fixed float format, JSON keys are sorted, line endings are fixed to "\\n",
and payloads never include wall-clock data. Files are written atomically
(temp file in the target directory, then rename) so concurrent scenario
runs never expose half-written artifacts.
"""

from __future__ import annotations

import csv
import io
import json
import os

import numpy as np

from .errors import DomainError
from .exact import spec_from_name
from .geometry import FIELD_ORDER
from .grids import CHARTS, ConformalGrid
from .rescaling import RescalingPick
from .solver import DiagnosticReport

FLOAT_FORMAT = ".17g"


def format_value(value) -> str:
    """One cell of CSV output; fixed formatting keyed by type."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    # + 0.0 collapses signed zero so identical quantities render identically
    return format(float(value) + 0.0, FLOAT_FORMAT)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow([format_value(cell) for cell in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def json_text(payload) -> str:
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file and rename, so readers never see partial files."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_csv(path: str, header, rows) -> None:
    atomic_write_text(path, csv_text(header, rows))


def write_json(path: str, payload) -> None:
    atomic_write_text(path, json_text(payload))


def checkpoint_payload(grid: ConformalGrid) -> dict:
    payload = {
        "kind": "checkpoint",
        "chart": grid.chart,
        "t": float(grid.t),
        "nodes": grid.nodes,
        "u": grid.u,
    }
    if grid.provenance is not None:
        payload["family"] = grid.provenance.family
        payload["params"] = grid.provenance.p
    return payload


def save_checkpoint(path: str, grid: ConformalGrid) -> None:
    write_json(path, checkpoint_payload(grid))


def grid_from_payload(payload: dict) -> ConformalGrid:
    try:
        chart = payload["chart"]
        t = float(payload["t"])
        nodes = np.asarray(payload["nodes"], dtype=float)
        u = np.asarray(payload["u"], dtype=float)
    except (KeyError, TypeError, ValueError) as err:
        raise DomainError(f"malformed checkpoint payload: {err}") from err
    if chart not in CHARTS:
        raise DomainError(f"checkpoint names unknown chart {chart!r}")
    provenance = None
    if "family" in payload:
        provenance = spec_from_name(payload["family"], **payload.get("params", {}))
    return ConformalGrid(chart, nodes, u, t, provenance)


def load_checkpoint(path: str) -> ConformalGrid:
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as err:
            raise DomainError(f"checkpoint is not valid JSON: {err}") from err
    return grid_from_payload(payload)


def invariant_table(reports) -> tuple[tuple[str, ...], list[list]]:
    """Header and rows for a CSV of snapshot invariants."""
    header = FIELD_ORDER
    rows = []
    for report in reports:
        row_map = report.to_row()
        rows.append([row_map[name] for name in header])
    return header, rows


def rescaling_record(pick: RescalingPick, profile_distance: float) -> dict:
    return {
        "j": pick.j,
        "T_j": pick.T_j,
        "gamma_j": pick.gamma_j,
        "t_j": pick.t_j,
        "x_j": pick.x_j,
        "M_j": pick.M_j,
        "alpha_j": pick.alpha_j,
        "omega_j": pick.omega_j,
        "profile_distance": float(profile_distance),
    }


def diagnostics_payload(report: DiagnosticReport) -> dict:
    return {
        "f_defect": report.f_defect,
        "m_of_t": [[t, v] for t, v in report.m_of_t],
        "harnack_defect": report.harnack_defect,
        "harnack_shift": report.harnack_shift,
        "length_evolution_defect": report.length_evolution_defect,
        "circle_indices": list(report.circle_indices),
    }
