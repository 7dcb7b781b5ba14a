"""
Reports and Output Files

This module defines the report of an estimation run and writes every
output file: report.json and segments.csv for estimates, validation tables,
cluster centers, and the simulation tables.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd
from pydantic import BaseModel, Field

from ..errors import InputError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"


class SegmentRow(BaseModel):
    """Estimates of one customer segment"""

    segment: str
    q0_hat: float = Field(description="Monitored segment share of transactions")
    q_hat: float = Field(description="Estimated unmonitored segment share of transactions")
    frequency: float = Field(description="Mean visits per monitored customer")
    monitored_customers: int
    estimated_customers: float = Field(description="Estimated unmonitored unique customers")
    penetration: float = Field(ge=0, le=1, description="Share of the segment's customers that are monitored")
    center: List[float] = Field(description="Standardized center of the segment")


class Totals(BaseModel):
    """Unique-customer totals of the period"""

    monitored_customers: int
    estimated_customers: float
    naive_customers: float
    ratio_to_naive: float


class Diagnostics(BaseModel):
    """Model checks and optimizer state of a run"""

    n_baskets: int
    m_segments: int
    rank: int
    identifiable: bool
    column_similarity: float
    estimator: str
    converged: bool
    iterations: int
    objective: float
    d_hat_in_range: bool = Field(default=True, description="Estimated customers lie in [1, a]")
    basket_db_index: Optional[float] = None
    segment_db_index: Optional[float] = None
    excluded_baskets: int = 0
    removed_customers: int = 0


class Report(BaseModel):
    """Full result of estimating unmonitored customers for one period"""

    period: str
    a: int = Field(description="Unmonitored transactions")
    a0: int = Field(description="Monitored transactions")
    segments: List[SegmentRow]
    totals: Totals
    diagnostics: Diagnostics

    def segment_table(self) -> pd.DataFrame:
        rows = []
        for row in self.segments:
            record = row.model_dump(exclude={"center"})
            record.update({f"center_{index + 1}": value for index, value in enumerate(row.center)})
            rows.append(record)
        return pd.DataFrame(rows)


def build_segment_rows(
    q0_hat, q_hat, frequencies, monitored_customers, estimated_customers, centers
) -> List[SegmentRow]:
    """Assemble the per-segment rows; segments are named segment-1..m"""
    rows = []
    for j in range(len(q_hat)):
        members = int(monitored_customers[j])
        others = float(estimated_customers[j])
        rows.append(
            SegmentRow(
                segment=f"segment-{j + 1}",
                q0_hat=float(q0_hat[j]),
                q_hat=float(q_hat[j]),
                frequency=float(frequencies[j]),
                monitored_customers=members,
                estimated_customers=others,
                penetration=members / (members + others),
                center=[float(value) for value in centers[j]],
            )
        )
    return rows


def _output_dir(out_dir: str) -> Path:
    path = Path(out_dir)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise InputError(f"cannot create output directory {path}: {e}") from e
    return path


def write_json(path: Path, payload: dict) -> Path:
    try:
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    except OSError as e:
        raise InputError(f"cannot write {path}: {e}") from e
    logger.info("Wrote %s", path)
    return path


def write_table(path: Path, table: pd.DataFrame) -> Path:
    try:
        table.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    except OSError as e:
        raise InputError(f"cannot write {path}: {e}") from e
    logger.info("Wrote %s", path)
    return path


def write_report(report: Report, out_dir: str) -> List[Path]:
    """Write report.json and segments.csv"""
    directory = _output_dir(out_dir)
    return [
        write_json(directory / "report.json", report.model_dump()),
        write_table(directory / "segments.csv", report.segment_table()),
    ]


def write_reports(reports: List[Report], out_dir: str) -> List[Path]:
    """Write several period reports: one report.json list and a stacked segments.csv"""
    directory = _output_dir(out_dir)
    tables = []
    for report in reports:
        table = report.segment_table()
        table.insert(0, "period", report.period)
        tables.append(table)
    return [
        write_json(directory / "report.json", {"periods": [report.model_dump() for report in reports]}),
        write_table(directory / "segments.csv", pd.concat(tables, ignore_index=True)),
    ]


def write_tables(tables: Dict[str, pd.DataFrame], out_dir: str) -> List[Path]:
    """Write named tables as <name>.csv"""
    directory = _output_dir(out_dir)
    return [write_table(directory / f"{name}.csv", table) for name, table in tables.items()]


def write_summary(payload: dict, out_dir: str, name: str = "summary.json") -> Path:
    return write_json(_output_dir(out_dir) / name, payload)
