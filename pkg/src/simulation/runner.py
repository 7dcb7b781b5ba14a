"""
Simulation Runner

This module runs the Monte Carlo study:
- one replication draws monitored and unmonitored samples and scores the
  naive and proposed estimates of unique customers
- a scenario aggregates independent replications
- a sweep repeats a scenario over a grid of one parameter
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Literal, NamedTuple, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from ..errors import CustomerEstimationError, InputError
from ..estimators import OptimizerSettings, PriorSpec, estimate_segment_mix
from ..model_core import unique_customers
from .metrics import ErrorSummary, absolute_percentage_errors, summarize_errors
from .sampling import (
    dirichlet_perturb_columns,
    dirichlet_perturb_frequencies,
    sample_counts,
    sample_monitored_customers,
)
from .scenarios import ScenarioConfig

logger = logging.getLogger(__name__)

SweepAxis = Literal["a0", "a", "alpha_r", "alpha_f"]
SWEEP_AXES = ["a0", "a", "alpha_r", "alpha_f"]
DEFAULT_ESTIMATORS = ("naive", "mle")
MAX_REDRAWS = 100


class ReplicationOutcome(NamedTuple):
    """True and estimated unique customers of one replication"""

    index: int
    d_true: float
    estimates: Dict[str, float]
    converged: bool
    redraws: int
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    @property
    def kept(self) -> bool:
        """Whether the replication enters the error summaries"""
        return not self.failed and self.converged


def _customers(a: float, q: np.ndarray, f: np.ndarray) -> float:
    return float(a * np.sum(q / f))


def run_replication(
    config: ScenarioConfig,
    rng: np.random.Generator,
    estimators: Sequence[str] = DEFAULT_ESTIMATORS,
    settings: Optional[OptimizerSettings] = None,
    prior: Optional[Union[PriorSpec, Sequence[float]]] = None,
    index: int = 0,
) -> ReplicationOutcome:
    """
    Run one replication.

    The naive estimate uses the population q0 and f0. The proposed estimate
    uses r_hat0 and, unless the scenario fixes them, frequencies f_hat0
    counted from the customers behind the monitored draw. A monitored draw
    with an empty segment is redrawn.

    Args:
        config: Scenario parameters
        rng: Private random stream of this replication
        estimators: "naive" plus any of "mle", "least-squares", "map"
        settings: Optimizer settings
        prior: Dirichlet prior for "map"
        index: Replication index recorded in the outcome

    Returns:
        ReplicationOutcome; estimator errors are recorded, not raised
    """
    r = config.r0 if config.alpha_r is None else dirichlet_perturb_columns(config.r0, config.alpha_r, rng)
    f = config.f0 if config.alpha_f is None else dirichlet_perturb_frequencies(config.f0, config.alpha_f, rng)

    redraws = 0
    monitored = sample_counts(config.a0, config.q0, config.r0, rng)
    while np.any(monitored.y == 0):
        redraws += 1
        if redraws > MAX_REDRAWS:
            raise InputError(f"monitored sample of scenario {config.label} keeps missing a segment")
        monitored = sample_counts(config.a0, config.q0, config.r0, rng)
    r_hat = monitored.z / monitored.y
    if config.estimate_frequencies:
        f_hat = monitored.y / sample_monitored_customers(monitored.y, config.f0, rng)
    else:
        f_hat = config.f0

    x = sample_counts(config.a, config.q, r, rng).x
    d_true = _customers(config.a, config.q, f)

    estimates: Dict[str, float] = {}
    converged = True
    try:
        for name in estimators:
            if name == "naive":
                estimates[name] = _customers(config.a, config.q0, config.f0)
                continue
            fit = estimate_segment_mix(name, x, r_hat, settings, prior)
            converged = converged and fit.converged
            estimates[name] = unique_customers(fit.q_hat, f_hat, config.a)[0]
    except CustomerEstimationError as e:
        logger.debug("replication %d of scenario %s failed: %s", index, config.label, e)
        return ReplicationOutcome(index, d_true, estimates, converged, redraws, str(e))

    return ReplicationOutcome(index, d_true, estimates, converged, redraws)


class ScenarioResult(BaseModel):
    """Aggregated errors and the per-replication trace of one scenario"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    label: str
    description: str = ""
    replications: int = Field(ge=1)
    master_seed: int
    estimators: List[str]
    d_true: np.ndarray = Field(description="True unique customers of the kept replications")
    d_hat: Dict[str, np.ndarray] = Field(description="Estimates per estimator")
    summaries: Dict[str, ErrorSummary]
    failed: int = Field(ge=0, description="Replications excluded after an estimator error")
    non_converged: int = Field(ge=0, description="Replications excluded because an optimizer did not converge")
    redraws: int = Field(ge=0, description="Monitored samples redrawn for an empty segment")

    def errors(self, estimator: str) -> np.ndarray:
        """Absolute percentage errors of one estimator"""
        return absolute_percentage_errors(self.d_true, self.d_hat[estimator])

    def summary_rows(self) -> List[dict]:
        """One summary row per estimator"""
        return [
            {
                "scenario": self.label,
                "description": self.description,
                "estimator": name,
                "mean_ape": summary.mean,
                "sd_ape": summary.sd,
                "q95_ape": summary.q95,
                "replications": self.replications,
                "seed": self.master_seed,
                "failed": self.failed,
                "non_converged": self.non_converged,
                "redraws": self.redraws,
            }
            for name, summary in self.summaries.items()
        ]


def _replication_streams(config: ScenarioConfig) -> List[np.random.Generator]:
    seeds = np.random.SeedSequence(config.master_seed).spawn(config.replications)
    return [np.random.default_rng(seed) for seed in seeds]


def run_scenario(
    config: ScenarioConfig,
    estimators: Sequence[str] = DEFAULT_ESTIMATORS,
    settings: Optional[OptimizerSettings] = None,
    prior: Optional[Union[PriorSpec, Sequence[float]]] = None,
    workers: int = 1,
) -> ScenarioResult:
    """
    Run all replications of a scenario.

    Replication s draws from the s-th child of SeedSequence(master_seed), so
    the result is bit-identical for a given seed whatever the worker count.

    Args:
        config: Scenario parameters
        estimators: Estimators to score
        settings: Optimizer settings
        prior: Dirichlet prior for "map"
        workers: Threads running replications

    Returns:
        ScenarioResult
    """
    if "map" in estimators and prior is None:
        raise InputError("scoring the MAP estimator needs a Dirichlet prior")
    settings = settings or OptimizerSettings.from_env()
    logger.info(
        "Running scenario %s (%s) with %d replications", config.label, config.description, config.replications
    )

    def replicate(index: int, rng: np.random.Generator) -> ReplicationOutcome:
        return run_replication(config, rng, estimators, settings, prior, index)

    streams = _replication_streams(config)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(replicate, range(len(streams)), streams))
    else:
        outcomes = [replicate(index, rng) for index, rng in enumerate(streams)]

    kept = [outcome for outcome in outcomes if outcome.kept]
    failed = sum(outcome.failed for outcome in outcomes)
    non_converged = len(outcomes) - len(kept) - failed
    if failed or non_converged:
        logger.warning(
            "Scenario %s: excluded %d failed and %d non-converged replications",
            config.label,
            failed,
            non_converged,
        )
    if not kept:
        raise InputError(f"every replication of scenario {config.label} failed or did not converge")

    d_true = np.array([outcome.d_true for outcome in kept])
    d_hat = {name: np.array([outcome.estimates[name] for outcome in kept]) for name in estimators}
    summaries = {
        name: summarize_errors(absolute_percentage_errors(d_true, values)) for name, values in d_hat.items()
    }
    for name, summary in summaries.items():
        logger.info("Scenario %s %s: M=%.2f SD=%.2f", config.label, name, summary.mean, summary.sd)

    return ScenarioResult(
        label=config.label,
        description=config.description,
        replications=config.replications,
        master_seed=config.master_seed,
        estimators=list(estimators),
        d_true=d_true,
        d_hat=d_hat,
        summaries=summaries,
        failed=failed,
        non_converged=non_converged,
        redraws=sum(outcome.redraws for outcome in outcomes),
    )


class SweepResult(BaseModel):
    """Scenario results over a grid of one parameter"""

    axis: SweepAxis
    grid: List[float]
    results: List[ScenarioResult]

    def table(self) -> pd.DataFrame:
        """Plot-ready table: one row per grid value and estimator"""
        rows = []
        for value, result in zip(self.grid, self.results):
            for name, summary in result.summaries.items():
                rows.append(
                    {
                        "axis": self.axis,
                        "value": value,
                        "estimator": name,
                        "mean_ape": summary.mean,
                        "sd_ape": summary.sd,
                        "half_width": summary.half_width,
                        "replications": summary.count,
                    }
                )
        return pd.DataFrame(rows)


def run_sweep(
    axis: str,
    grid: Sequence[float],
    base: ScenarioConfig,
    replications: Optional[int] = None,
    estimators: Sequence[str] = DEFAULT_ESTIMATORS,
    settings: Optional[OptimizerSettings] = None,
    prior: Optional[Union[PriorSpec, Sequence[float]]] = None,
    workers: int = 1,
) -> SweepResult:
    """
    Run a scenario at every value of one parameter.

    Every grid point reuses the base master seed.

    Args:
        axis: "a0", "a", "alpha_r" or "alpha_f"
        grid: Parameter values
        base: Scenario whose other parameters stay fixed
        replications: Replications per grid point (default: the base's)
        estimators: Estimators to score
        settings: Optimizer settings
        prior: Dirichlet prior for "map"
        workers: Threads running replications

    Returns:
        SweepResult
    """
    if axis not in SWEEP_AXES:
        raise InputError(f"unknown sweep axis {axis!r}; choose one of {SWEEP_AXES}")
    if not grid:
        raise InputError("empty sweep grid")

    results = []
    for value in grid:
        if value <= 0:
            raise InputError(f"sweep values of {axis} must be positive, got {value}")
        point = int(value) if axis in ("a0", "a") else float(value)
        config = base.updated(
            label=f"{axis}={point}",
            description=f"{base.description} with {axis} = {point}".strip(),
            replications=replications or base.replications,
            **{axis: point},
        )
        results.append(run_scenario(config, estimators, settings, prior, workers))

    return SweepResult(axis=axis, grid=[float(value) for value in grid], results=results)
