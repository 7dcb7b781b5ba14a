"""
Simulation Scenarios

This module defines the benchmark parameter set and the catalog of nine
scenarios that vary sample sizes, segment mixes and model assumptions.
"""

import os
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..errors import InputError
from ..model_core import check_column_simplex, check_simplex

BENCHMARK_Q0 = (0.6, 0.2, 0.2)
BENCHMARK_Q = (0.2, 0.2, 0.6)
BENCHMARK_R0 = (
    (0.4, 0.1, 0.1),
    (0.2, 0.1, 0.1),
    (0.1, 0.4, 0.1),
    (0.1, 0.2, 0.1),
    (0.1, 0.1, 0.4),
    (0.1, 0.1, 0.2),
)
BENCHMARK_F0 = (6.0, 3.0, 1.5)
BENCHMARK_SAMPLE_SIZE = 1_000_000
SMALL_SAMPLE_SIZE = 1000
PERTURBATION_CONCENTRATION = 100.0


def default_replications() -> int:
    return int(os.getenv("SIMULATION_REPLICATIONS", "2000"))


def default_seed() -> int:
    return int(os.getenv("SIMULATION_SEED", "20190401"))


def with_dependent_last_column(r) -> np.ndarray:
    """Replace the last column of r by the average of its first two columns"""
    r = np.array(r, dtype=float)
    r[:, -1] = (r[:, 0] + r[:, 1]) / 2.0
    return r


class ScenarioConfig(BaseModel):
    """Parameters of one simulation scenario"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    label: str
    description: str = ""
    a0: int = Field(ge=1, description="Monitored sample size")
    a: int = Field(ge=1, description="Unmonitored sample size")
    q0: np.ndarray = Field(description="Monitored segment mix")
    q: np.ndarray = Field(description="Unmonitored segment mix")
    r0: np.ndarray = Field(description="Conditional probability matrix")
    f0: np.ndarray = Field(description="Visit frequencies per segment")
    alpha_r: Optional[float] = Field(default=None, gt=0)
    alpha_f: Optional[float] = Field(default=None, gt=0)
    dependent_last_column: bool = False
    estimate_frequencies: bool = Field(
        default=True, description="Count f_hat0 from the monitored draw instead of using f0"
    )
    replications: int = Field(ge=1)
    master_seed: int = Field(ge=0)

    @field_validator("q0", "q", "r0", "f0", mode="before")
    @classmethod
    def _as_array(cls, value):
        return np.array(value, dtype=float)

    @model_validator(mode="after")
    def _validate(self) -> "ScenarioConfig":
        check_simplex(self.q0, "q0")
        check_simplex(self.q, "q")
        check_column_simplex(self.r0, "r0")
        m = self.r0.shape[1]
        if self.q0.shape != (m,) or self.q.shape != (m,) or self.f0.shape != (m,):
            raise ValueError(f"q0, q and f0 must have {m} entries")
        if np.any(self.f0 <= 0):
            raise ValueError("frequencies must be strictly positive")
        if self.estimate_frequencies and np.any(self.f0 < 1):
            raise ValueError("counting monitored customers needs frequencies of at least 1")
        if self.dependent_last_column:
            self.r0 = with_dependent_last_column(self.r0)
        return self

    @property
    def n(self) -> int:
        return int(self.r0.shape[0])

    @property
    def m(self) -> int:
        return int(self.r0.shape[1])

    @property
    def monitored_customers(self) -> float:
        """Unique customers implied by a0, q0 and f0"""
        return float(self.a0 * np.sum(self.q0 / self.f0))

    @property
    def unmonitored_customers(self) -> float:
        """Unique customers implied by a, q and f0"""
        return float(self.a * np.sum(self.q / self.f0))

    def updated(self, **changes: Any) -> "ScenarioConfig":
        """Validated copy with some parameters changed"""
        values: Dict[str, Any] = dict(self)
        values.update(changes)
        return ScenarioConfig(**values)


def benchmark_parameters(
    replications: Optional[int] = None, master_seed: Optional[int] = None
) -> ScenarioConfig:
    """
    Benchmark scenario (ii).

    Args:
        replications: Replications per run (default SIMULATION_REPLICATIONS)
        master_seed: Seed of the replication streams (default SIMULATION_SEED)

    Returns:
        ScenarioConfig with a0 = a = 10^6
    """
    return ScenarioConfig(
        label="ii",
        description="Benchmark scenario",
        a0=BENCHMARK_SAMPLE_SIZE,
        a=BENCHMARK_SAMPLE_SIZE,
        q0=BENCHMARK_Q0,
        q=BENCHMARK_Q,
        r0=BENCHMARK_R0,
        f0=BENCHMARK_F0,
        replications=default_replications() if replications is None else replications,
        master_seed=default_seed() if master_seed is None else master_seed,
    )


def scenario_catalog(
    replications: Optional[int] = None, master_seed: Optional[int] = None
) -> List[ScenarioConfig]:
    """
    The nine scenarios (i)-(ix), all derived from the benchmark.

    Args:
        replications: Replications per scenario
        master_seed: Seed shared by every scenario

    Returns:
        List of ScenarioConfig in catalog order
    """
    base = benchmark_parameters(replications, master_seed)
    alpha = PERTURBATION_CONCENTRATION
    small = SMALL_SAMPLE_SIZE
    return [
        base.updated(label="i", description="No change in q", q=BENCHMARK_Q0),
        base,
        base.updated(label="iii", description="Small a0 = 1000", a0=small),
        base.updated(label="iv", description="Small a = 1000", a=small),
        base.updated(label="v", description="Small a0 = a = 1000", a0=small, a=small),
        base.updated(label="vi", description="Change in r", alpha_r=alpha),
        base.updated(label="vii", description="Change in f", alpha_f=alpha),
        base.updated(label="viii", description="Change in r and f", alpha_r=alpha, alpha_f=alpha),
        base.updated(
            label="ix", description="Linear dependence in r", dependent_last_column=True
        ),
    ]


def find_scenario(label: str, catalog: List[ScenarioConfig]) -> ScenarioConfig:
    """Look up a scenario by its label"""
    for config in catalog:
        if config.label == label:
            return config
    known = ", ".join(config.label for config in catalog)
    raise InputError(f"unknown scenario {label!r}; known scenarios: {known}")
