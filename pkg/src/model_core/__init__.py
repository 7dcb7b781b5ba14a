"""
Model Core Package

This package provides the probabilistic data model:
- Tallying transaction counts of monitored and unmonitored samples
- Estimating basket-type / segment probabilities of the monitored sample
- Converting a segment mix of transactions into unique customers
"""

from .counts import CountsTable, tabulate_counts
from .customers import EstimationResult, naive_estimate, unique_customers
from .probability import (
    RANK_TOLERANCE,
    SIMPLEX_TOLERANCE,
    ProbabilityModel,
    SquareInverseResult,
    check_column_simplex,
    check_simplex,
    column_rank,
    column_similarity,
    estimate_monitored,
    has_independent_columns,
    is_simplex,
    mixture_probabilities,
    square_invert_estimate,
)

__all__ = [
    "CountsTable",
    "tabulate_counts",
    "EstimationResult",
    "naive_estimate",
    "unique_customers",
    "RANK_TOLERANCE",
    "SIMPLEX_TOLERANCE",
    "ProbabilityModel",
    "SquareInverseResult",
    "check_column_simplex",
    "check_simplex",
    "column_rank",
    "column_similarity",
    "estimate_monitored",
    "has_independent_columns",
    "is_simplex",
    "mixture_probabilities",
    "square_invert_estimate",
]
