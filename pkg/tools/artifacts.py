"""
Artifact writers: CSV tables through pandas, JSON reports and manifests through pydantic

Floats are written in shortest round-trip form; NaN becomes an empty CSV cell
or a JSON null.
"""

import json
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

import pandas as pd

from core_engine.exact_engine import GreenFunction
from core_engine.logging_config import get_logger
from core_engine.simulator import ReplicaBatch
from models.schemas import BatchManifest, RunManifest, VerificationReport, report_list_json

logger = get_logger(__name__)

PathLike = Union[str, Path]

EXACT_RETURNS_COLUMNS = ["N", "prob", "ratio_to_theory", "trunc_loss"]
GREEN_COLUMNS = ["N", "g", "g_normalized"]
REPORT_CSV_COLUMNS = ["claim", "verdict", "provenance", "grid", "value", "ratio", "tolerance"]


def _ensure_dir(out_dir: PathLike) -> Path:
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_frame(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, na_rep="", lineterminator="\n")
    logger.info(f"Wrote {len(frame)} row(s) to {path}")
    return path


def write_exact_returns(rows: Iterable[dict], out_dir: PathLike) -> Path:
    """exact_returns.csv with header N,prob,ratio_to_theory,trunc_loss"""
    frame = pd.DataFrame(list(rows), columns=EXACT_RETURNS_COLUMNS)
    return _write_frame(frame, _ensure_dir(out_dir) / "exact_returns.csv")


def write_green_function(green: GreenFunction, out_dir: PathLike, steps: Optional[Sequence[int]] = None) -> Path:
    """green_function.csv with header N,g,g_normalized, optionally restricted to some N"""
    index = list(steps) if steps is not None else list(range(green.g.size))
    frame = pd.DataFrame({
        "N": index,
        "g": [float(green.g[n]) for n in index],
        "g_normalized": [float(green.g_normalized[n]) for n in index],
    }, columns=GREEN_COLUMNS)
    return _write_frame(frame, _ensure_dir(out_dir) / "green_function.csv")


def write_replicas(batch: ReplicaBatch, out_dir: PathLike) -> Path:
    """replicas.csv, one row per replica"""
    return _write_frame(batch.to_frame(), _ensure_dir(out_dir) / "replicas.csv")


def write_manifest(manifest: Union[BatchManifest, RunManifest], out_dir: PathLike) -> Path:
    path = _ensure_dir(out_dir) / "manifest.json"
    path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote manifest to {path}")
    return path


def reports_to_frame(reports: Sequence[VerificationReport]) -> pd.DataFrame:
    """One row per grid point of every report"""
    rows: List[dict] = []
    for report in reports:
        points = max(len(report.grid), len(report.values), len(report.ratios), 1)
        for i in range(points):
            rows.append({
                "claim": report.claim,
                "verdict": report.verdict.value,
                "provenance": report.provenance.value,
                "grid": report.grid[i] if i < len(report.grid) else None,
                "value": report.values[i] if i < len(report.values) else None,
                "ratio": report.ratios[i] if i < len(report.ratios) else None,
                "tolerance": report.tolerance,
            })
    return pd.DataFrame(rows, columns=REPORT_CSV_COLUMNS)


def write_reports(reports: Sequence[VerificationReport], out_dir: PathLike, fmt: str = "json") -> Path:
    """report.json (array of reports) or report.csv (flattened grids)"""
    out = _ensure_dir(out_dir)
    if fmt == "csv":
        return _write_frame(reports_to_frame(reports), out / "report.csv")
    path = out / "report.json"
    path.write_text(report_list_json(list(reports)) + "\n", encoding="utf-8")
    logger.info(f"Wrote {len(reports)} report(s) to {path}")
    return path


def read_reports(path: PathLike) -> List[VerificationReport]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return [VerificationReport.model_validate(item) for item in data]
