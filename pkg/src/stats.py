"""
Shared order statistics.

Basket/customer feature scaling and the simulation summaries share this
quantile definition.
"""

from typing import Sequence, Union

import numpy as np

QUANTILE_METHOD = "linear"


def quantile(values: Union[Sequence[float], np.ndarray], level: float) -> float:
    """
    Quantile with linear interpolation between order statistics.

    Args:
        values: Sample values (non-empty)
        level: Quantile level in [0, 1]

    Returns:
        The interpolated quantile
    """
    data = np.asarray(values, dtype=float)
    if data.size == 0:
        raise ValueError("Cannot compute a quantile of an empty sample")
    if not 0.0 <= level <= 1.0:
        raise ValueError(f"Quantile level must be in [0, 1], got {level}")
    return float(np.quantile(data, level, method=QUANTILE_METHOD))
