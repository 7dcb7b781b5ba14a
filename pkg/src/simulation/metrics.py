"""
Error metrics of unique-customer estimates.
"""

import math

import numpy as np
from pydantic import BaseModel, Field

from ..errors import InputError, ShapeError
from ..stats import quantile

CONFIDENCE_Z = 1.96


class ErrorSummary(BaseModel):
    """Mean, spread and tail of absolute percentage errors"""

    mean: float = Field(ge=0)
    sd: float = Field(ge=0)
    q95: float = Field(ge=0)
    worst: float = Field(ge=0)
    count: int = Field(ge=1)

    @property
    def half_width(self) -> float:
        """Half-width of the 95% confidence interval of the mean"""
        return CONFIDENCE_Z * self.sd / math.sqrt(self.count)


def absolute_percentage_errors(d_true, d_hat) -> np.ndarray:
    """
    100 |d - d_hat| / d for every pair.

    Args:
        d_true: True unique-customer counts (> 0)
        d_hat: Estimates

    Returns:
        Vector of absolute percentage errors
    """
    d_true = np.asarray(d_true, dtype=float)
    d_hat = np.asarray(d_hat, dtype=float)
    if d_true.shape != d_hat.shape:
        raise ShapeError(f"{d_true.size} true values but {d_hat.size} estimates")
    if np.any(d_true <= 0):
        raise InputError("true unique-customer counts must be positive")
    return 100.0 * np.abs(d_true - d_hat) / d_true


def mape(d_true, d_hat) -> float:
    """Mean absolute percentage error in percent"""
    errors = absolute_percentage_errors(d_true, d_hat)
    if errors.size == 0:
        raise InputError("no estimates to score")
    return float(errors.mean())


def summarize_errors(errors) -> ErrorSummary:
    """
    Summarize absolute percentage errors.

    The SD is the sample standard deviation (zero for a single error); the
    95% quantile uses the shared interpolation rule.
    """
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        raise InputError("no errors to summarize")
    return ErrorSummary(
        mean=float(errors.mean()),
        sd=float(errors.std(ddof=1)) if errors.size > 1 else 0.0,
        q95=quantile(errors, 0.95),
        worst=float(errors.max()),
        count=int(errors.size),
    )
