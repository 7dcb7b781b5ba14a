"""
Per-segment visit frequencies of monitored customers.
"""

import logging
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..errors import DegenerateSegmentError, InputError

logger = logging.getLogger(__name__)


class SegmentFrequencies(BaseModel):
    """Mean visits and unique customers of every monitored segment"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    frequencies: np.ndarray = Field(description="Mean visits per customer f0_j")
    customers: np.ndarray = Field(description="Unique monitored customers d0_j")
    visits: np.ndarray = Field(description="Total visits of segment j")

    @property
    def m(self) -> int:
        return int(self.frequencies.size)


def segment_frequencies(assignments, visit_counts, m: Optional[int] = None) -> SegmentFrequencies:
    """
    Estimate the visit frequency of each segment from its customers.

    f0_j = (visits of segment j) / (customers of segment j)

    Args:
        assignments: 1-based segment of every customer
        visit_counts: Baskets of every customer in the period
        m: Number of segments (default: the largest assignment)

    Returns:
        SegmentFrequencies
    """
    labels = np.asarray(assignments, dtype=int)
    visits = np.asarray(visit_counts, dtype=float)
    if labels.ndim != 1 or labels.shape != visits.shape:
        raise InputError("assignments and visit counts must be equal-length vectors")
    if labels.size == 0:
        raise InputError("no customers to compute frequencies from")
    if labels.min() < 1:
        raise InputError("segment ids are 1-based")
    if np.any(visits < 1):
        raise InputError("every customer needs at least one visit")

    m = int(labels.max()) if m is None else m
    if labels.max() > m:
        raise InputError(f"segment id {labels.max()} exceeds {m} segments")

    customers = np.bincount(labels - 1, minlength=m)
    totals = np.bincount(labels - 1, weights=visits, minlength=m)
    empty = np.flatnonzero(customers == 0)
    if empty.size:
        raise DegenerateSegmentError(
            f"segment {empty[0] + 1} has no customers", segment=int(empty[0]) + 1
        )

    frequencies = totals / customers
    logger.debug("Segment frequencies: %s", np.round(frequencies, 3))
    return SegmentFrequencies(frequencies=frequencies, customers=customers, visits=totals)
