"""
Z-score standardization of feature points.
"""

import logging
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, Field

from ..errors import StandardizationError

logger = logging.getLogger(__name__)

ZERO_VARIANCE = 1e-12


class Standardization(BaseModel):
    """Per-dimension mean and sample standard deviation used to z-score points"""

    mean: List[float]
    scale: List[float] = Field(description="Sample (n-1) standard deviations")

    def apply(self, points) -> np.ndarray:
        """Standardize new points with the stored parameters"""
        return (np.asarray(points, dtype=float) - np.asarray(self.mean)) / np.asarray(self.scale)

    def invert(self, points) -> np.ndarray:
        """Map standardized points back to feature units"""
        return np.asarray(points, dtype=float) * np.asarray(self.scale) + np.asarray(self.mean)


def standardize(points) -> Tuple[np.ndarray, Standardization]:
    """
    Standardize every dimension to zero mean and unit sample variance.

    Args:
        points: N x d array with N >= 2

    Returns:
        Tuple of (standardized points, Standardization)

    Raises:
        StandardizationError: too few points or a constant dimension
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] < 2:
        raise StandardizationError(
            f"standardization needs at least 2 points, got shape {points.shape}"
        )

    mean = points.mean(axis=0)
    scale = points.std(axis=0, ddof=1)
    for dimension, value in enumerate(scale):
        if value <= ZERO_VARIANCE * max(1.0, abs(mean[dimension])):
            raise StandardizationError(
                f"feature dimension {dimension + 1} has zero variance",
                dimension=dimension + 1,
            )

    parameters = Standardization(mean=mean.tolist(), scale=scale.tolist())
    return parameters.apply(points), parameters
