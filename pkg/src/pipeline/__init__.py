"""
Pipeline Package

This package runs the end-to-end workflows:
- Ingesting and validating transaction logs
- Estimating unmonitored customers per period
- Validating the estimates on a split of monitored customers
- Generating synthetic logs and writing reports
- The command line interface
"""

from .config import RunConfig, load_run_config
from .ingestion import (
    IngestionResult,
    IngestionSummary,
    PriceLevel,
    TransactionRecord,
    filter_extreme_frequency,
    ingest,
)
from .reporting import Diagnostics, Report, SegmentRow, Totals
from .service import CustomerEstimationService, estimate_pipeline, split_periods
from .synthetic import SegmentProfile, SyntheticLog, generate_log
from .validation import ValidationResult, ValidationSplit, load_flags, validate, validation_split

__all__ = [
    "RunConfig",
    "load_run_config",
    "IngestionResult",
    "IngestionSummary",
    "PriceLevel",
    "TransactionRecord",
    "filter_extreme_frequency",
    "ingest",
    "Diagnostics",
    "Report",
    "SegmentRow",
    "Totals",
    "CustomerEstimationService",
    "estimate_pipeline",
    "split_periods",
    "SegmentProfile",
    "SyntheticLog",
    "generate_log",
    "ValidationResult",
    "ValidationSplit",
    "load_flags",
    "validate",
    "validation_split",
]
