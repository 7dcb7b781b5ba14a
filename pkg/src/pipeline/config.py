"""
Run Configuration

RunConfig collects the settings of one estimation run. Values come from a
flat KEY=value file (read with python-dotenv), overridden by command-line
flags; the output directory defaults to OUTPUT_DIR.
"""

import logging
import math
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from dotenv import dotenv_values
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from ..errors import InputError

logger = logging.getLogger(__name__)

PipelineEstimator = Literal["mle", "least-squares", "map"]
PERIOD_MONTHS = {"W": 7 / (365.25 / 12), "M": 1.0, "Q": 3.0, "Y": 12.0}


class RunConfig(BaseModel):
    """Settings of one estimation run"""

    period: str = Field(default="all", description="Label of the analysed period")
    period_frequency: Optional[Literal["W", "M", "Q", "Y"]] = Field(
        default=None, description="Slice the log into calendar periods of this length"
    )
    period_months: float = Field(default=1.0, gt=0, description="Length of an unsliced log in months")
    n_baskets: Optional[int] = Field(default=None, ge=1, description="Basket types; None selects by Davies-Bouldin")
    m_segments: Optional[int] = Field(default=None, ge=1, description="Customer segments; None selects by Davies-Bouldin")
    basket_k_range: Tuple[int, int] = (2, 15)
    segment_k_range: Tuple[int, int] = (2, 8)
    frequency_cap: float = Field(default=15.0, gt=0, description="Maximum visits per month")
    estimator: PipelineEstimator = "mle"
    gamma: Optional[List[float]] = None
    seed: int = Field(default=0, ge=0)
    restarts: int = Field(default=10, ge=1)
    delimiter: str = ","
    output_dir: str = Field(default_factory=lambda: os.getenv("OUTPUT_DIR", "output"))

    @field_validator("n_baskets", "m_segments", mode="before")
    @classmethod
    def _auto(cls, value):
        if isinstance(value, str) and value.strip().lower() in ("", "auto"):
            return None
        return value

    @field_validator("gamma", mode="before")
    @classmethod
    def _split_gamma(cls, value):
        if isinstance(value, str):
            parts = [part for part in value.split(",") if part.strip()]
            return [float(part) for part in parts] if parts else None
        return value

    @field_validator("basket_k_range", "segment_k_range", mode="before")
    @classmethod
    def _integer_range(cls, value):
        if isinstance(value, str):
            value = value.replace("-", ",").split(",")
        low, high = (int(bound) for bound in value)
        if not 2 <= low <= high:
            raise ValueError(f"cluster-count range must satisfy 2 <= low <= high, got {value}")
        return low, high

    @model_validator(mode="after")
    def _validate(self) -> "RunConfig":
        if (self.gamma is not None) != (self.estimator == "map"):
            raise ValueError("a prior gamma is required for, and only for, the map estimator")
        if self.gamma is not None and any(value <= 0 for value in self.gamma):
            raise ValueError(f"prior parameters must be positive, got {self.gamma}")
        if self.n_baskets is not None and self.m_segments is not None and self.n_baskets < self.m_segments:
            raise ValueError(
                f"{self.n_baskets} basket types cannot identify {self.m_segments} segments"
            )
        if math.isnan(self.frequency_cap):
            raise ValueError("frequency cap must be a number")
        return self

    @property
    def months(self) -> float:
        """Length of one analysed period in months"""
        if self.period_frequency is None:
            return self.period_months
        return PERIOD_MONTHS[self.period_frequency]

    def for_period(self, label: str, frequency: Optional[str] = None) -> "RunConfig":
        """Copy describing one period slice"""
        return self.model_copy(
            update={"period": label, "period_frequency": frequency or self.period_frequency}
        )


def read_config_file(path: str) -> Dict[str, Any]:
    """
    Read a flat KEY=value file into RunConfig field values.

    Keys are matched case-insensitively to RunConfig fields; unknown keys are
    rejected.
    """
    if not Path(path).is_file():
        raise InputError(f"config file not found: {path}")
    values = {key.lower(): value for key, value in dotenv_values(path).items() if value is not None}
    unknown = sorted(set(values) - set(RunConfig.model_fields))
    if unknown:
        raise InputError(f"{path}: unknown config keys {unknown}")
    return values


def load_run_config(path: Optional[str] = None, **overrides: Any) -> RunConfig:
    """
    Build a RunConfig from an optional file and command-line overrides.

    Args:
        path: Flat KEY=value config file
        **overrides: Values that replace file values; None values are ignored

    Returns:
        Validated RunConfig
    """
    values: Dict[str, Any] = read_config_file(path) if path else {}
    values.update({key: value for key, value in overrides.items() if value is not None})
    try:
        config = RunConfig(**values)
    except ValidationError as e:
        raise InputError(f"invalid run configuration: {e}") from e
    logger.debug("Run configuration: %s", config.model_dump())
    return config
