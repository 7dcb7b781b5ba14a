"""
Transaction Counts

This module tallies the observed transaction counts of a sample: the number
of transactions per basket type (x), per customer segment (y) and per basket
type and segment (z). Unmonitored samples only carry x.
"""

from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..errors import InputError, ShapeError


def _as_count_array(value, name: str) -> np.ndarray:
    data = np.asarray(value, dtype=float)
    if data.size and (not np.all(np.isfinite(data)) or np.any(data < 0)):
        raise ValueError(f"{name} must contain non-negative finite counts")
    if data.size and not np.array_equal(data, np.round(data)):
        raise ValueError(f"{name} must contain integer counts")
    return data.astype(np.int64)


class CountsTable(BaseModel):
    """Observed transaction counts of one sample"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    a: int = Field(ge=0, description="Number of transactions")
    x: np.ndarray = Field(description="Transactions per basket type, length n")
    y: Optional[np.ndarray] = Field(
        default=None, description="Transactions per customer segment, length m"
    )
    z: Optional[np.ndarray] = Field(
        default=None, description="Transactions per basket type and segment, n x m"
    )

    @field_validator("x", "y", "z", mode="before")
    @classmethod
    def _validate_counts(cls, value, info):
        if value is None:
            return None
        return _as_count_array(value, info.field_name)

    @model_validator(mode="after")
    def _validate_totals(self) -> "CountsTable":
        if self.x.ndim != 1:
            raise ValueError("x must be a vector")
        if int(self.x.sum()) != self.a:
            raise ValueError(f"basket-type counts sum to {self.x.sum()}, expected {self.a}")

        if (self.y is None) != (self.z is None):
            raise ValueError("y and z must be given together")
        if self.y is None:
            return self

        if self.z.shape != (self.x.size, self.y.size):
            raise ValueError(
                f"z has shape {self.z.shape}, expected {(self.x.size, self.y.size)}"
            )
        if int(self.y.sum()) != self.a or int(self.z.sum()) != self.a:
            raise ValueError("segment and joint counts must sum to a")
        if not np.array_equal(self.z.sum(axis=1), self.x):
            raise ValueError("row sums of z must equal x")
        if not np.array_equal(self.z.sum(axis=0), self.y):
            raise ValueError("column sums of z must equal y")
        return self

    @property
    def n(self) -> int:
        return int(self.x.size)

    @property
    def m(self) -> Optional[int]:
        return None if self.y is None else int(self.y.size)

    @property
    def is_monitored(self) -> bool:
        """Whether segment counts were observed"""
        return self.y is not None


def _as_labels(labels: Sequence[int], upper: int, kind: str) -> np.ndarray:
    data = np.asarray(labels)
    if data.ndim != 1:
        raise ShapeError(f"{kind} labels must be one-dimensional")
    if data.size == 0:
        return data.astype(np.int64)
    if not np.issubdtype(data.dtype, np.integer):
        as_float = data.astype(float)
        bad = np.flatnonzero(as_float != np.round(as_float))
        if bad.size:
            raise InputError(f"{kind} label at index {bad[0]} is not an integer")
        data = as_float.astype(np.int64)
    bad = np.flatnonzero((data < 1) | (data > upper))
    if bad.size:
        index = int(bad[0])
        raise InputError(
            f"{kind} label {data[index]} at index {index} outside [1..{upper}]"
        )
    return data.astype(np.int64)


def tabulate_counts(
    basket_labels: Sequence[int],
    segment_labels: Optional[Sequence[int]] = None,
    n: int = 1,
    m: Optional[int] = None,
) -> CountsTable:
    """
    Tally transactions by basket type and, when known, by customer segment.

    Args:
        basket_labels: Basket type of every transaction (1-based)
        segment_labels: Customer segment of every transaction (1-based, optional)
        n: Number of basket types
        m: Number of customer segments (required with segment_labels)

    Returns:
        CountsTable with x, and y and z for monitored samples
    """
    if n < 1:
        raise InputError("n must be at least 1")
    baskets = _as_labels(basket_labels, n, "basket")
    x = np.bincount(baskets - 1, minlength=n)

    if segment_labels is None:
        return CountsTable(a=int(baskets.size), x=x)

    if m is None or m < 1:
        raise InputError("m must be given and at least 1 when segments are tallied")
    segments = _as_labels(segment_labels, m, "segment")
    if segments.size != baskets.size:
        raise InputError(
            f"{baskets.size} basket labels but {segments.size} segment labels"
        )

    joint = (baskets - 1) * m + (segments - 1)
    z = np.bincount(joint, minlength=n * m).reshape(n, m)
    y = np.bincount(segments - 1, minlength=m)
    return CountsTable(a=int(baskets.size), x=x, y=y, z=z)
