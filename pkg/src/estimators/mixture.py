"""
Segment Mix Estimators

This module estimates the customer-segment distribution q of unmonitored
transactions from their basket-type counts x and the conditional probability
matrix r of the monitored sample:
- maximum likelihood (equivalently minimum KL divergence)
- least squares
- Dirichlet maximum a posteriori
"""

import logging
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ..errors import EmptySampleError, IdentifiabilityError, InputError, PriorError, ShapeError
from ..model_core import EstimationResult, check_column_simplex, check_simplex, column_rank
from ..model_core.customers import EstimatorName
from .objectives import kl_divergence, log_beta, log_likelihood, log_posterior, squared_error
from .settings import OptimizerSettings, PriorSpec
from .simplex import starting_points
from .solvers import (
    SolverTrace,
    em_mixture_weights,
    projected_gradient_ascent,
    projected_gradient_least_squares,
)

logger = logging.getLogger(__name__)

ESTIMATORS: List[str] = ["mle", "least-squares", "map"]


class SegmentMixFit(BaseModel):
    """Estimated segment mix with optimizer diagnostics"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    q_hat: np.ndarray = Field(description="Estimated segment distribution of a transaction")
    objective: float = Field(description="Objective value at q_hat")
    iterations: int = Field(ge=0)
    converged: bool
    estimator: EstimatorName

    @field_validator("q_hat", mode="before")
    @classmethod
    def _as_array(cls, value):
        return np.asarray(value, dtype=float)

    def to_estimation(self, frequencies, a: float) -> EstimationResult:
        """
        Complete the fit with unique-customer counts.

        Args:
            frequencies: Mean visits per customer of each segment
            a: Number of unmonitored transactions

        Returns:
            EstimationResult carrying the fit diagnostics
        """
        return EstimationResult.build(
            self.q_hat,
            frequencies,
            a,
            estimator=self.estimator,
            objective=self.objective,
            iterations=self.iterations,
            converged=self.converged,
        )


def _check_problem(observed, r) -> tuple:
    r = check_column_simplex(r)
    observed = np.asarray(observed, dtype=float)
    n, m = r.shape
    if observed.shape != (n,):
        raise ShapeError(f"observations have shape {observed.shape}, expected ({n},)")
    if not np.all(np.isfinite(observed)) or np.any(observed < 0):
        raise InputError("observations must be non-negative")
    if observed.sum() <= 0:
        raise EmptySampleError("no transactions to estimate from")

    rank = column_rank(r)
    if rank < m:
        raise IdentifiabilityError(
            f"conditional probability matrix has rank {rank} < {m} segments: the "
            "segment mix has infinitely many solutions; choose a segmentation whose "
            "segments differ in their basket types"
        )
    impossible = np.flatnonzero((observed > 0) & (r.sum(axis=1) <= 0))
    if impossible.size:
        raise InputError(
            f"basket type {impossible[0] + 1} is observed but impossible in every segment"
        )
    return observed, r


def _best_of(
    run: Callable[[np.ndarray], SolverTrace],
    m: int,
    settings: OptimizerSettings,
    maximize: bool,
) -> SolverTrace:
    best: Optional[SolverTrace] = None
    for start in starting_points(m, settings.multistart_count, settings.seed):
        trace = run(start)
        if best is None:
            best = trace
        elif maximize and trace.value > best.value:
            best = trace
        elif not maximize and trace.value < best.value:
            best = trace
    return best


def mle_estimate(x, r, settings: Optional[OptimizerSettings] = None) -> SegmentMixFit:
    """
    Maximum likelihood estimate of the segment mix.

    Args:
        x: Transactions per basket type
        r: Conditional probability matrix with independent columns
        settings: Optimizer settings

    Returns:
        SegmentMixFit whose objective is the log-likelihood L(q_hat)
    """
    settings = settings or OptimizerSettings()
    x, r = _check_problem(x, r)
    weights = x / x.sum()
    trace = _best_of(
        lambda start: em_mixture_weights(weights, r, start, settings),
        r.shape[1],
        settings,
        maximize=True,
    )
    if not trace.converged:
        logger.warning("maximum likelihood did not converge in %d iterations", trace.iterations)
    return SegmentMixFit(
        q_hat=trace.q,
        objective=log_likelihood(trace.q, x, r),
        iterations=trace.iterations,
        converged=trace.converged,
        estimator="mle",
    )


def kl_estimate(p_hat, r, settings: Optional[OptimizerSettings] = None) -> SegmentMixFit:
    """
    Segment mix minimizing the KL divergence from r q to p_hat.

    Args:
        p_hat: Observed basket-type distribution
        r: Conditional probability matrix with independent columns
        settings: Optimizer settings

    Returns:
        SegmentMixFit whose objective is KL(q_hat), tagged "mle"
    """
    settings = settings or OptimizerSettings()
    p_hat, r = _check_problem(p_hat, r)
    weights = p_hat / p_hat.sum()
    trace = _best_of(
        lambda start: em_mixture_weights(weights, r, start, settings),
        r.shape[1],
        settings,
        maximize=True,
    )
    return SegmentMixFit(
        q_hat=trace.q,
        objective=kl_divergence(trace.q, weights, r),
        iterations=trace.iterations,
        converged=trace.converged,
        estimator="mle",
    )


def ls_estimate(p_hat, r, settings: Optional[OptimizerSettings] = None) -> SegmentMixFit:
    """
    Least squares estimate of the segment mix.

    Args:
        p_hat: Observed basket-type distribution
        r: Conditional probability matrix with independent columns
        settings: Optimizer settings

    Returns:
        SegmentMixFit whose objective is the squared error SE(q_hat)
    """
    settings = settings or OptimizerSettings()
    p_hat = check_simplex(p_hat, "p_hat")
    p_hat, r = _check_problem(p_hat, r)
    trace = _best_of(
        lambda start: projected_gradient_least_squares(p_hat, r, start, settings),
        r.shape[1],
        settings,
        maximize=False,
    )
    if not trace.converged:
        logger.warning("least squares did not converge in %d iterations", trace.iterations)
    return SegmentMixFit(
        q_hat=trace.q,
        objective=squared_error(trace.q, p_hat, r),
        iterations=trace.iterations,
        converged=trace.converged,
        estimator="least-squares",
    )


def _as_prior(prior: Union[PriorSpec, Sequence[float]]) -> PriorSpec:
    if isinstance(prior, PriorSpec):
        return prior
    try:
        return PriorSpec(gamma=list(prior))
    except ValidationError as e:
        raise PriorError(f"invalid Dirichlet prior {prior}: {e}") from e


def map_estimate(
    x,
    r,
    prior: Union[PriorSpec, Sequence[float]],
    settings: Optional[OptimizerSettings] = None,
) -> SegmentMixFit:
    """
    Maximum a posteriori estimate of the segment mix under a Dirichlet prior.

    A flat prior leaves the likelihood unchanged up to a constant, so it is
    solved by the likelihood engine; other priors use projected gradient
    ascent. Concentrations below one make the posterior unbounded at the
    boundary and may return boundary-adjacent solutions.

    Args:
        x: Transactions per basket type
        r: Conditional probability matrix with independent columns
        prior: Dirichlet prior or its concentration parameters
        settings: Optimizer settings

    Returns:
        SegmentMixFit whose objective is AP(q_hat) including -ln B(gamma)
    """
    settings = settings or OptimizerSettings()
    prior = _as_prior(prior)
    x, r = _check_problem(x, r)
    gamma = prior.concentration
    if gamma.shape != (r.shape[1],):
        raise PriorError(f"prior has {gamma.size} parameters for {r.shape[1]} segments")

    if prior.is_flat:
        fit = mle_estimate(x, r, settings)
        return SegmentMixFit(
            q_hat=fit.q_hat,
            objective=fit.objective - log_beta(gamma),
            iterations=fit.iterations,
            converged=fit.converged,
            estimator="map",
        )

    total = x.sum()
    shape = gamma - 1.0
    floor = settings.floor

    def scaled_posterior(q: np.ndarray) -> float:
        mix = np.maximum(r @ q, floor)
        seen = x > 0
        value = np.sum(x[seen] * np.log(mix[seen])) + np.sum(shape * np.log(np.maximum(q, floor)))
        return float(value / total)

    def scaled_gradient(q: np.ndarray) -> np.ndarray:
        mix = np.maximum(r @ q, floor)
        return (r.T @ (x / mix) + shape / np.maximum(q, floor)) / total

    trace = _best_of(
        lambda start: projected_gradient_ascent(scaled_posterior, scaled_gradient, start, settings),
        r.shape[1],
        settings,
        maximize=True,
    )
    if not trace.converged:
        logger.warning("MAP estimate did not converge in %d iterations", trace.iterations)
    return SegmentMixFit(
        q_hat=trace.q,
        objective=log_posterior(trace.q, x, r, gamma),
        iterations=trace.iterations,
        converged=trace.converged,
        estimator="map",
    )


def estimate_segment_mix(
    estimator: EstimatorName,
    x,
    r,
    settings: Optional[OptimizerSettings] = None,
    prior: Optional[Union[PriorSpec, Sequence[float]]] = None,
) -> SegmentMixFit:
    """
    Run the named estimator on basket-type counts.

    Args:
        estimator: "mle", "least-squares" or "map"
        x: Transactions per basket type
        r: Conditional probability matrix
        settings: Optimizer settings
        prior: Dirichlet prior (required for "map")

    Returns:
        SegmentMixFit
    """
    if estimator == "mle":
        return mle_estimate(x, r, settings)
    if estimator == "least-squares":
        x = np.asarray(x, dtype=float)
        if x.sum() <= 0:
            raise EmptySampleError("no transactions to estimate from")
        return ls_estimate(x / x.sum(), r, settings)
    if estimator == "map":
        if prior is None:
            raise PriorError("the MAP estimator needs a Dirichlet prior")
        return map_estimate(x, r, prior, settings)
    raise InputError(f"unknown estimator {estimator!r}")

