"""
Transaction Log Ingestion

This module reads a delimited transaction log with one product line per row:
- validates every row as a TransactionRecord, rejecting malformed rows with
  their file line numbers
- checks that every basket has a single customer (or none)
- summarizes rows, baskets and the monitored share
- removes monitored customers with implausibly many visits
"""

import logging
import math
from datetime import date
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ..errors import EmptyInputError, InputError

logger = logging.getLogger(__name__)

MANDATORY_COLUMNS = ["basket_id", "product_id", "unit_price", "quantity", "price_level", "children_flag"]
OPTIONAL_COLUMNS = ["customer_id", "timestamp"]
FIRST_DATA_LINE = 2


class PriceLevel(str, Enum):
    """Price tier of a product"""

    LOW_END = "low-end"
    STANDARD = "standard"
    HIGH_END = "high-end"


class TransactionRecord(BaseModel):
    """One product line of a receipt"""

    basket_id: str = Field(min_length=1)
    customer_id: Optional[str] = Field(default=None, description="Absent for unmonitored baskets")
    product_id: str = Field(min_length=1)
    unit_price: float = Field(ge=0)
    quantity: int = Field(ge=1)
    price_level: PriceLevel
    children_flag: bool
    timestamp: Optional[date] = None

    @field_validator("customer_id", "timestamp", mode="before")
    @classmethod
    def _blank_is_missing(cls, value):
        if isinstance(value, str) and not value.strip():
            return None
        return value

    @field_validator("basket_id", "product_id", "customer_id", mode="after")
    @classmethod
    def _strip(cls, value):
        return value.strip() if isinstance(value, str) else value

    @field_validator("unit_price", mode="after")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("unit price must be finite")
        return value

    @field_validator("price_level", mode="before")
    @classmethod
    def _normalize_level(cls, value):
        if isinstance(value, str):
            return value.strip().lower().replace("_", "-").replace(" ", "-")
        return value


class RejectedRow(BaseModel):
    """A row that failed validation"""

    line: int = Field(description="1-based line number in the file")
    reason: str


class IngestionSummary(BaseModel):
    """Counts reported after ingestion"""

    rows: int
    accepted: int
    rejected: List[RejectedRow] = Field(default_factory=list)
    baskets: int
    monitored_baskets: int
    customers: int

    @property
    def monitored_share(self) -> float:
        """Share of baskets linked to a customer"""
        return self.monitored_baskets / self.baskets if self.baskets else 0.0


class IngestionResult(BaseModel):
    """Validated product lines and their summary"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    lines: pd.DataFrame
    summary: IngestionSummary


def _reason(error: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(part) for part in item['loc'])}: {item['msg']}" for item in error.errors()
    )


def records_frame(records: List[TransactionRecord], line_numbers: Optional[List[int]] = None) -> pd.DataFrame:
    """
    Tabulate validated records.

    Missing customer ids become empty strings and timestamps become datetimes.
    """
    frame = pd.DataFrame(
        {
            "basket_id": [record.basket_id for record in records],
            "customer_id": [record.customer_id or "" for record in records],
            "product_id": [record.product_id for record in records],
            "unit_price": [record.unit_price for record in records],
            "quantity": [record.quantity for record in records],
            "price_level": [record.price_level.value for record in records],
            "children_flag": [record.children_flag for record in records],
            "timestamp": pd.to_datetime([record.timestamp for record in records]),
        }
    )
    frame["line"] = line_numbers if line_numbers is not None else range(FIRST_DATA_LINE, FIRST_DATA_LINE + len(records))
    return frame


def _check_basket_customers(lines: pd.DataFrame) -> None:
    customers = lines.groupby("basket_id", sort=True)["customer_id"].nunique()
    mixed = customers[customers > 1]
    if not mixed.empty:
        basket_id = mixed.index[0]
        first_line = int(lines.loc[lines["basket_id"] == basket_id, "line"].min())
        raise InputError(
            f"basket {basket_id!r} (first seen at line {first_line}) mixes several customer ids"
        )


def summarize_lines(lines: pd.DataFrame, rows: int, rejected: List[RejectedRow]) -> IngestionSummary:
    monitored = lines.loc[lines["customer_id"] != ""]
    return IngestionSummary(
        rows=rows,
        accepted=len(lines),
        rejected=rejected,
        baskets=int(lines["basket_id"].nunique()),
        monitored_baskets=int(monitored["basket_id"].nunique()),
        customers=int(monitored["customer_id"].nunique()),
    )


def ingest(path: str, delimiter: str = ",") -> IngestionResult:
    """
    Read and validate a transaction log.

    Args:
        path: Delimited text file with a header row
        delimiter: Field separator

    Returns:
        IngestionResult with the accepted lines and the summary

    Raises:
        InputError: unreadable file, missing mandatory column, or a basket
            with several customer ids
        EmptyInputError: no data rows or no valid rows
    """
    if not Path(path).is_file():
        raise InputError(f"transaction log not found: {path}")
    try:
        raw = pd.read_csv(path, sep=delimiter, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError as e:
        raise EmptyInputError(f"{path} is empty") from e
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as e:
        raise InputError(f"cannot read {path}: {e}") from e

    raw.columns = [column.strip() for column in raw.columns]
    missing = [column for column in MANDATORY_COLUMNS if column not in raw.columns]
    if missing:
        raise InputError(f"{path}: missing mandatory columns {missing}")
    if raw.empty:
        raise EmptyInputError(f"{path} has no data rows")

    columns = [column for column in MANDATORY_COLUMNS + OPTIONAL_COLUMNS if column in raw.columns]
    records: List[TransactionRecord] = []
    line_numbers: List[int] = []
    rejected: List[RejectedRow] = []
    for offset, row in enumerate(raw[columns].to_dict(orient="records")):
        line = FIRST_DATA_LINE + offset
        try:
            records.append(TransactionRecord.model_validate(row))
            line_numbers.append(line)
        except ValidationError as e:
            rejected.append(RejectedRow(line=line, reason=_reason(e)))
            logger.warning("%s line %d rejected: %s", path, line, _reason(e))

    if not records:
        raise EmptyInputError(f"{path}: every row was rejected")

    lines = records_frame(records, line_numbers)
    _check_basket_customers(lines)
    summary = summarize_lines(lines, len(raw), rejected)
    logger.info(
        "Ingested %s: %d rows, %d rejected, %d baskets, %.1f%% monitored",
        path,
        summary.rows,
        len(summary.rejected),
        summary.baskets,
        100.0 * summary.monitored_share,
    )
    return IngestionResult(lines=lines, summary=summary)


def filter_extreme_frequency(lines: pd.DataFrame, cap: float, period_months: float) -> Tuple[pd.DataFrame, int]:
    """
    Remove monitored customers with more than `cap` visits per month.

    Args:
        lines: Product lines of one period
        cap: Maximum visits (baskets) per month; math.inf disables the filter
        period_months: Length of the period in months

    Returns:
        Tuple of (remaining lines, number of removed customers)
    """
    if cap <= 0 or period_months <= 0:
        raise InputError("frequency cap and period length must be positive")
    monitored = lines.loc[lines["customer_id"] != ""]
    visits = monitored.groupby("customer_id")["basket_id"].nunique()
    extreme = visits.index[visits / period_months > cap]
    if extreme.empty:
        return lines, 0

    logger.info("Removed %d customers with more than %g visits per month", len(extreme), cap)
    return lines.loc[~lines["customer_id"].isin(extreme)].reset_index(drop=True), int(len(extreme))
