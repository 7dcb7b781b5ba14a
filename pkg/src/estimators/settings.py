"""
Optimizer Settings

Configuration of the simplex-constrained optimizers and the Dirichlet prior
of the maximum a posteriori estimator.
"""

import os
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class OptimizerSettings(BaseModel):
    """Stopping rules and safeguards shared by all estimators"""

    model_config = ConfigDict(frozen=True)

    max_iterations: int = Field(default=10000, ge=1, description="Iteration budget")
    tolerance: float = Field(
        default=1e-10,
        gt=0,
        description="Stop when both the relative objective change and the "
        "infinity-norm step of q fall below this value",
    )
    floor: float = Field(
        default=1e-300, gt=0, description="Lower clamp for probabilities inside logarithms"
    )
    multistart_count: int = Field(default=1, ge=1, description="Number of starting points")
    seed: int = Field(default=0, ge=0, description="Seed for the extra starting points")

    @classmethod
    def from_env(cls) -> "OptimizerSettings":
        """Create settings from OPTIMIZER_* environment variables"""
        return cls(
            max_iterations=int(os.getenv("OPTIMIZER_MAX_ITERATIONS", "10000")),
            tolerance=float(os.getenv("OPTIMIZER_TOLERANCE", "1e-10")),
        )


class PriorSpec(BaseModel):
    """Dirichlet prior on the segment mix"""

    model_config = ConfigDict(frozen=True)

    gamma: List[float] = Field(description="Concentration parameters, one per segment")

    @field_validator("gamma")
    @classmethod
    def _positive(cls, value: List[float]) -> List[float]:
        if not value or any(not np.isfinite(g) or g <= 0 for g in value):
            raise ValueError("concentration parameters must be positive")
        return value

    @property
    def concentration(self) -> np.ndarray:
        return np.asarray(self.gamma, dtype=float)

    @property
    def is_flat(self) -> bool:
        """Whether the prior is uniform on the simplex"""
        return bool(np.all(self.concentration == 1.0))
