"""
Error Types

This module defines the exceptions raised across the customer estimation
packages. Every error carries the exit code the command line reports for it.
"""

from typing import Optional


class CustomerEstimationError(ValueError):
    """Base class for all estimation errors"""

    exit_code = 2


class InputError(CustomerEstimationError):
    """Invalid input data or arguments"""


class EmptySampleError(InputError):
    """A sample without any transactions"""


class EmptyInputError(InputError):
    """An input file without data rows"""


class NothingToEstimateError(InputError):
    """No unmonitored transactions in the analysed period"""


class ShapeError(InputError):
    """Array dimensions do not agree"""


class PriorError(InputError):
    """Invalid Dirichlet prior"""


class SplitError(InputError):
    """A validation split with an empty side"""


class ClusteringError(InputError):
    """Invalid clustering input or degenerate clustering"""


class DegenerateBasketError(InputError):
    """A basket with zero total value"""


class DegenerateSegmentError(InputError):
    """A customer segment without transactions or customers"""

    def __init__(self, message: str, segment: Optional[int] = None):
        super().__init__(message)
        self.segment = segment


class StandardizationError(InputError):
    """A feature dimension with zero variance"""

    def __init__(self, message: str, dimension: Optional[int] = None):
        super().__init__(message)
        self.dimension = dimension


class ConditioningError(CustomerEstimationError):
    """A matrix too close to singular to invert"""


class IdentifiabilityError(CustomerEstimationError):
    """Conditional probability matrix without linearly independent columns"""

    exit_code = 3


class ConvergenceError(CustomerEstimationError):
    """Optimizer stopped before reaching its tolerance"""

    exit_code = 4


class LinearDependenceWarning(UserWarning):
    """Estimated conditional probability matrix is rank deficient"""
