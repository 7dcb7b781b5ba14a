"""
Unique Customers

This module turns a segment mix of transactions into the number of unique
customers behind them and their distribution over segments.
"""

import logging
from typing import Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..errors import EmptySampleError, InputError, ShapeError
from .probability import check_simplex, is_simplex

logger = logging.getLogger(__name__)

EstimatorName = Literal["naive", "mle", "least-squares", "map"]


def _check_frequencies(f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.ndim != 1 or not np.all(np.isfinite(f)) or np.any(f <= 0):
        raise InputError(f"frequencies must be strictly positive, got {f}")
    return f


def unique_customers(q_hat, f, a: float) -> Tuple[float, np.ndarray]:
    """
    Estimate the number of unique customers and their segment distribution.

    Args:
        q_hat: Segment distribution of a transaction
        f: Mean visits per customer of each segment
        a: Number of transactions

    Returns:
        Tuple of (d_hat, u_hat) with d_hat = sum_j q_j a / f_j and
        u_hat_j = q_j a / (f_j d_hat)
    """
    f = _check_frequencies(f)
    q_hat = check_simplex(q_hat, "q_hat")
    if q_hat.shape != f.shape:
        raise ShapeError(f"q_hat has {q_hat.size} entries but f has {f.size}")
    if a <= 0:
        raise EmptySampleError("number of transactions must be positive")

    per_segment = q_hat * a / f
    d_hat = float(per_segment.sum())
    return d_hat, per_segment / d_hat


class EstimationResult(BaseModel):
    """Estimated segment mix and unique customers of an unmonitored sample"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    q_hat: np.ndarray = Field(description="Segment distribution of a transaction")
    d_hat: float = Field(gt=0, description="Estimated unique customers")
    u_hat: np.ndarray = Field(description="Segment distribution of a customer")
    estimator: EstimatorName
    objective: float = Field(description="Final objective value")
    iterations: int = Field(ge=0)
    converged: bool
    a: float = Field(gt=0, description="Number of transactions used")
    frequencies: np.ndarray = Field(description="Frequencies used")

    @field_validator("q_hat", "u_hat", "frequencies", mode="before")
    @classmethod
    def _as_array(cls, value):
        return np.asarray(value, dtype=float)

    @model_validator(mode="after")
    def _validate(self) -> "EstimationResult":
        if not is_simplex(self.q_hat) or not is_simplex(self.u_hat):
            raise ValueError("q_hat and u_hat must be probability vectors")
        if not self.d_hat_in_range:
            logger.warning(
                "estimated customers %.3f outside [1, %.0f]; check the frequencies",
                self.d_hat,
                self.a,
            )
        return self

    @property
    def d_hat_in_range(self) -> bool:
        """Whether d_hat lies in [1, a], the range a transaction count allows"""
        return 1.0 <= self.d_hat <= self.a

    @classmethod
    def build(
        cls,
        q_hat,
        frequencies,
        a: float,
        estimator: EstimatorName,
        objective: float = 0.0,
        iterations: int = 0,
        converged: bool = True,
    ) -> "EstimationResult":
        """Complete a segment-mix estimate with its unique-customer counts"""
        d_hat, u_hat = unique_customers(q_hat, frequencies, a)
        return cls(
            q_hat=q_hat,
            d_hat=d_hat,
            u_hat=u_hat,
            estimator=estimator,
            objective=objective,
            iterations=iterations,
            converged=converged,
            a=a,
            frequencies=frequencies,
        )

    @property
    def customers_per_segment(self) -> np.ndarray:
        """Estimated unique customers in each segment"""
        return self.d_hat * self.u_hat

    def recompute_d_hat(self) -> float:
        """Recompute d_hat from q_hat, a and the frequencies"""
        return float(np.sum(self.q_hat * self.a / self.frequencies))


def naive_estimate(q0_hat, f, a: float) -> EstimationResult:
    """
    Naive estimate assuming the unmonitored segment mix equals the monitored one.

    Args:
        q0_hat: Monitored segment distribution of a transaction
        f: Mean visits per customer of each segment
        a: Number of unmonitored transactions

    Returns:
        EstimationResult tagged "naive"
    """
    _check_frequencies(f)
    return EstimationResult.build(q0_hat, f, a, estimator="naive")
