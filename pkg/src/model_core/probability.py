"""
Probability Model

This module holds the basket-type / customer-segment probability model:
the basket-type distribution p, the segment distribution q of a transaction,
the conditional probability matrix r (column j is the basket-type
distribution of segment j) and the segment visit frequencies f.
"""

import logging
import warnings
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..errors import (
    ConditioningError,
    DegenerateSegmentError,
    EmptySampleError,
    InputError,
    LinearDependenceWarning,
    ShapeError,
)
from .counts import CountsTable

logger = logging.getLogger(__name__)

SIMPLEX_TOLERANCE = 1e-9
RANK_TOLERANCE = 1e-8
CONDITION_LIMIT = 1e12


def is_simplex(vector: np.ndarray, tolerance: float = SIMPLEX_TOLERANCE) -> bool:
    """Whether a vector lies on the probability simplex"""
    v = np.asarray(vector, dtype=float)
    if v.ndim != 1 or v.size == 0 or not np.all(np.isfinite(v)):
        return False
    return bool(
        np.all(v >= -tolerance)
        and np.all(v <= 1 + tolerance)
        and abs(v.sum() - 1.0) <= tolerance
    )


def check_simplex(vector, name: str) -> np.ndarray:
    """
    Validate a simplex vector.

    Args:
        vector: Candidate probability vector
        name: Name used in the error message

    Returns:
        The vector as a float array
    """
    v = np.asarray(vector, dtype=float)
    if not is_simplex(v):
        raise InputError(f"{name} is not a probability vector: {v}")
    return v


def check_column_simplex(matrix, name: str = "r") -> np.ndarray:
    """Validate a matrix whose columns are probability vectors"""
    r = np.asarray(matrix, dtype=float)
    if r.ndim != 2:
        raise ShapeError(f"{name} must be a matrix, got shape {r.shape}")
    for j in range(r.shape[1]):
        if not is_simplex(r[:, j]):
            raise InputError(f"column {j + 1} of {name} is not a probability vector")
    return r


def column_rank(r: np.ndarray) -> int:
    """Numerical column rank from the singular values of r"""
    return int(np.linalg.matrix_rank(np.asarray(r, dtype=float), tol=RANK_TOLERANCE))


def has_independent_columns(r: np.ndarray) -> bool:
    """Whether the segment columns of r are linearly independent"""
    r = np.asarray(r, dtype=float)
    return column_rank(r) == r.shape[1]


def column_similarity(r: np.ndarray) -> float:
    """
    Largest cosine similarity between two distinct columns of r.

    Args:
        r: Conditional probability matrix

    Returns:
        Maximum pairwise cosine similarity (0 for a single column)
    """
    r = np.asarray(r, dtype=float)
    if r.shape[1] < 2:
        return 0.0
    norms = np.linalg.norm(r, axis=0)
    unit = r / np.where(norms > 0, norms, 1.0)
    gram = unit.T @ unit
    np.fill_diagonal(gram, -np.inf)
    return float(gram.max())


class ProbabilityModel(BaseModel):
    """Basket-type and customer-segment probabilities of one sample"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    p: np.ndarray = Field(description="Basket-type distribution, length n")
    q: np.ndarray = Field(description="Segment distribution of a transaction, length m")
    r: np.ndarray = Field(description="Conditional basket-type distribution per segment, n x m")
    f: np.ndarray = Field(description="Mean visits per customer of each segment, length m")

    @field_validator("p", "q", "r", "f", mode="before")
    @classmethod
    def _as_array(cls, value):
        return np.asarray(value, dtype=float)

    @model_validator(mode="after")
    def _validate(self) -> "ProbabilityModel":
        if self.r.ndim != 2:
            raise ValueError(f"r must be a matrix, got shape {self.r.shape}")
        n, m = self.r.shape
        if self.p.shape != (n,) or self.q.shape != (m,) or self.f.shape != (m,):
            raise ValueError(
                f"shapes p{self.p.shape}, q{self.q.shape}, f{self.f.shape} "
                f"do not match r{self.r.shape}"
            )
        if n < m:
            raise ValueError(f"need at least as many basket types as segments ({n} < {m})")
        if not is_simplex(self.p):
            raise ValueError("p is not a probability vector")
        if not is_simplex(self.q):
            raise ValueError("q is not a probability vector")
        for j in range(m):
            if not is_simplex(self.r[:, j]):
                raise ValueError(f"column {j + 1} of r is not a probability vector")
        if not np.all(np.isfinite(self.f)) or np.any(self.f <= 0):
            raise ValueError("frequencies must be strictly positive")
        return self

    @property
    def n(self) -> int:
        return int(self.r.shape[0])

    @property
    def m(self) -> int:
        return int(self.r.shape[1])

    @property
    def rank(self) -> int:
        return column_rank(self.r)

    @property
    def is_identifiable(self) -> bool:
        """Whether q can be recovered from p through r"""
        return self.rank == self.m

    def mixture_residual(self) -> float:
        """Largest entrywise gap between p and r q"""
        return float(np.max(np.abs(self.p - self.r @ self.q)))


def mixture_probabilities(r, q) -> np.ndarray:
    """
    Basket-type distribution implied by segment mix q (law of total probability).

    Args:
        r: n x m conditional probability matrix
        q: Segment distribution, length m

    Returns:
        p = r q, a probability vector of length n
    """
    r = check_column_simplex(r)
    q = check_simplex(q, "q")
    if r.shape[1] != q.size:
        raise ShapeError(f"r has {r.shape[1]} columns but q has {q.size} entries")
    return r @ q


def estimate_monitored(counts: CountsTable, frequencies) -> ProbabilityModel:
    """
    Estimate p, q and r from a fully observed (monitored) sample.

    Args:
        counts: Counts with segment information
        frequencies: Mean visit frequency of each segment

    Returns:
        ProbabilityModel with p = x/a, q = y/a and r = z/y
    """
    if not counts.is_monitored:
        raise InputError("monitored estimation requires segment counts y and z")
    if counts.a == 0:
        raise EmptySampleError("monitored sample has no transactions")
    empty = np.flatnonzero(counts.y == 0)
    if empty.size:
        segment = int(empty[0]) + 1
        raise DegenerateSegmentError(
            f"segment {segment} has no transactions in the monitored sample",
            segment=segment,
        )

    f = np.asarray(frequencies, dtype=float)
    if f.shape != (counts.m,):
        raise ShapeError(f"expected {counts.m} frequencies, got shape {f.shape}")

    p = counts.x / counts.a
    q = counts.y / counts.a
    r = counts.z / counts.y[np.newaxis, :]

    try:
        model = ProbabilityModel(p=p, q=q, r=r, f=f)
    except ValueError as e:
        raise InputError(f"invalid monitored model: {e}") from e

    if not model.is_identifiable:
        message = (
            f"estimated r has rank {model.rank} < {model.m}: segments are not "
            "identifiable from basket types"
        )
        logger.warning(message)
        warnings.warn(message, LinearDependenceWarning, stacklevel=2)
    return model


class SquareInverseResult(BaseModel):
    """Result of inverting a square conditional probability matrix"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    q: np.ndarray = Field(description="r^-1 p, not clipped")
    feasible: bool = Field(description="Whether every entry lies in [0, 1]")
    condition_number: float = Field(description="2-norm condition number of r")


def square_invert_estimate(
    p_hat, r, condition_limit: Optional[float] = None
) -> SquareInverseResult:
    """
    Estimate q by inverting a square r.

    Args:
        p_hat: Observed basket-type distribution
        r: Square conditional probability matrix
        condition_limit: Largest accepted condition number

    Returns:
        SquareInverseResult; infeasible results are flagged, never clipped
    """
    r = np.asarray(r, dtype=float)
    p_hat = np.asarray(p_hat, dtype=float)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ShapeError(f"square inversion needs a square r, got shape {r.shape}")
    if p_hat.shape != (r.shape[0],):
        raise ShapeError(f"p_hat has shape {p_hat.shape}, expected ({r.shape[0]},)")

    limit = condition_limit or CONDITION_LIMIT
    condition = float(np.linalg.cond(r))
    if not np.isfinite(condition) or condition > limit:
        raise ConditioningError(f"r is near singular (condition number {condition:.3g})")

    q = np.linalg.solve(r, p_hat)
    feasible = bool(
        np.all(q >= -SIMPLEX_TOLERANCE) and np.all(q <= 1 + SIMPLEX_TOLERANCE)
    )
    if not feasible:
        logger.warning("square inversion left the simplex: %s", q)
    return SquareInverseResult(q=q, feasible=feasible, condition_number=condition)
