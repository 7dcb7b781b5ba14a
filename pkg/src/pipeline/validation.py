"""
Empirical Validation

Monitored customers are split by a per-customer flag (for example a
verified e-mail address). Flagged customers play the monitored sample; the
rest lose their customer ids and play the unmonitored sample, while their
true number of unique customers is kept for scoring.
"""

import logging
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from ..errors import (
    ClusteringError,
    DegenerateBasketError,
    DegenerateSegmentError,
    EmptySampleError,
    InputError,
    NothingToEstimateError,
    SplitError,
    StandardizationError,
)
from ..estimators import OptimizerSettings
from ..simulation import absolute_percentage_errors, summarize_errors
from .config import RunConfig
from .ingestion import filter_extreme_frequency
from .service import CustomerEstimationService, split_periods

logger = logging.getLogger(__name__)

FLAG_TRUE = {"1", "true", "yes", "y", "t"}
FLAG_FALSE = {"0", "false", "no", "n", "f"}

# Data gaps of a single period; anything else stops the whole validation.
PERIOD_ERRORS = (
    ClusteringError,
    DegenerateBasketError,
    DegenerateSegmentError,
    EmptySampleError,
    NothingToEstimateError,
    SplitError,
    StandardizationError,
)


class ValidationSplit(BaseModel):
    """Pseudo-monitored and pseudo-unmonitored product lines"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    lines: pd.DataFrame = Field(description="Flagged lines with ids, unflagged lines without")
    true_customers: int = Field(ge=1, description="Unique customers of the pseudo-unmonitored side")
    flagged_customers: int = Field(ge=1)


class ValidationRow(BaseModel):
    """True and estimated pseudo-unmonitored customers of one period"""

    granularity: str
    period: str
    true_customers: int
    estimated_customers: float
    naive_customers: float
    ape: float
    naive_ape: float


def load_flags(path: str) -> Dict[str, bool]:
    """
    Read per-customer flags from a CSV with columns customer_id and flag.
    """
    if not Path(path).is_file():
        raise InputError(f"flag file not found: {path}")
    table = pd.read_csv(path, dtype=str, keep_default_na=False)
    if not {"customer_id", "flag"} <= set(table.columns):
        raise InputError(f"{path}: flag file needs customer_id and flag columns")

    flags: Dict[str, bool] = {}
    for offset, (customer, value) in enumerate(zip(table["customer_id"], table["flag"])):
        text = value.strip().lower()
        if text not in FLAG_TRUE | FLAG_FALSE:
            raise InputError(f"{path} line {offset + 2}: invalid flag {value!r}")
        flags[customer.strip()] = text in FLAG_TRUE
    return flags


def validation_split(lines: pd.DataFrame, flags: Mapping[str, bool]) -> ValidationSplit:
    """
    Split monitored product lines by a per-customer flag.

    Unmonitored lines are dropped; unflagged customers' ids are hidden.

    Args:
        lines: Product lines (ingestion layout)
        flags: Flag of every monitored customer

    Returns:
        ValidationSplit
    """
    monitored = lines.loc[lines["customer_id"] != ""].reset_index(drop=True)
    customers = monitored["customer_id"].unique()
    missing = [customer for customer in customers if customer not in flags]
    if missing:
        raise InputError(f"{len(missing)} monitored customers have no flag, e.g. {missing[0]!r}")

    flagged = monitored["customer_id"].map(flags).astype(bool)
    true_customers = int(monitored.loc[~flagged, "customer_id"].nunique())
    flagged_customers = int(monitored.loc[flagged, "customer_id"].nunique())
    if true_customers == 0 or flagged_customers == 0:
        raise SplitError(
            f"validation split is one-sided: {flagged_customers} flagged, {true_customers} unflagged customers"
        )

    split = monitored.copy()
    split.loc[~flagged, "customer_id"] = ""
    return ValidationSplit(lines=split, true_customers=true_customers, flagged_customers=flagged_customers)


class ValidationResult(BaseModel):
    """Per-period validation rows and their summary per granularity"""

    rows: List[ValidationRow]
    skipped: List[str] = Field(default_factory=list, description="Periods that could not be estimated")

    def table(self) -> pd.DataFrame:
        return pd.DataFrame([row.model_dump() for row in self.rows])

    def summary(self) -> pd.DataFrame:
        """Mean, SD and worst case of the errors of both estimators per granularity"""
        records = []
        table = self.table()
        if table.empty:
            return pd.DataFrame(columns=["granularity", "estimator", "mean_ape", "sd_ape", "worst_ape", "periods"])
        for granularity, group in table.groupby("granularity", sort=False):
            for estimator, column in (("proposed", "ape"), ("naive", "naive_ape")):
                summary = summarize_errors(group[column].to_numpy())
                records.append(
                    {
                        "granularity": granularity,
                        "estimator": estimator,
                        "mean_ape": summary.mean,
                        "sd_ape": summary.sd,
                        "worst_ape": summary.worst,
                        "periods": summary.count,
                    }
                )
        return pd.DataFrame(records)


def validate(
    lines: pd.DataFrame,
    flags: Mapping[str, bool],
    config: RunConfig,
    granularities: Optional[Sequence[Optional[str]]] = None,
    settings: Optional[OptimizerSettings] = None,
) -> ValidationResult:
    """
    Run the validation experiment for every period of every granularity.

    Extreme-frequency customers are removed per period before the split.
    The flags must split the whole log into two non-empty sides. A period
    with a data gap of its own, such as an empty segment or a one-sided
    split, is skipped. Identifiability and convergence failures stop the run.

    Args:
        lines: Ingested product lines
        flags: Flag of every monitored customer
        config: Run configuration
        granularities: Period lengths among "W", "M", "Q", "Y"; None entries
            (or no list) use the whole log as one period
        settings: Optimizer settings

    Returns:
        ValidationResult; skipped periods are listed

    Raises:
        SplitError: If the flags leave one side of the whole log empty
        IdentifiabilityError: If a period's segments cannot be separated
        ConvergenceError: If the estimator does not converge
    """
    validation_split(lines, flags)
    granularities = list(granularities) if granularities else [config.period_frequency]
    rows: List[ValidationRow] = []
    skipped: List[str] = []
    for granularity in granularities:
        name = granularity or "all"
        for label, period_lines in split_periods(lines, granularity):
            period_config = config.for_period(label, granularity)
            period_lines, _ = filter_extreme_frequency(period_lines, config.frequency_cap, period_config.months)
            try:
                split = validation_split(period_lines, flags)
                service = CustomerEstimationService(period_config, settings)
                report = service.estimate(split.lines)
            except PERIOD_ERRORS as e:
                logger.warning("Validation of %s period %s skipped: %s", name, label, e)
                skipped.append(f"{name}:{label}")
                continue

            truth = [float(split.true_customers)]
            estimated = report.totals.estimated_customers
            naive = report.totals.naive_customers
            rows.append(
                ValidationRow(
                    granularity=name,
                    period=label,
                    true_customers=split.true_customers,
                    estimated_customers=estimated,
                    naive_customers=naive,
                    ape=float(absolute_percentage_errors(truth, [estimated])[0]),
                    naive_ape=float(absolute_percentage_errors(truth, [naive])[0]),
                )
            )
            logger.info(
                "Validation %s %s: true %d, estimated %.1f, naive %.1f",
                name,
                label,
                split.true_customers,
                estimated,
                naive,
            )
    return ValidationResult(rows=rows, skipped=skipped)
