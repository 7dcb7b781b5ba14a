"""
Customer Estimation Service

This module provides a unified service for estimating unmonitored customers:
- Clustering baskets into basket types
- Clustering monitored customers into segments
- Estimating the monitored probability model and segment frequencies
- Estimating the unmonitored segment mix and unique customers
"""

import logging
import warnings
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from ..clustering import (
    FEATURE_COLUMNS,
    PROFILE_COLUMNS,
    BasketFeatureSet,
    ClusteringResult,
    CustomerFeatureSet,
    SegmentFrequencies,
    basket_features,
    customer_features,
    kmeans,
    segment_frequencies,
    select_k,
    standardize,
)
from ..errors import (
    ConvergenceError,
    EmptySampleError,
    InputError,
    LinearDependenceWarning,
    NothingToEstimateError,
)
from ..estimators import OptimizerSettings, PriorSpec, estimate_segment_mix
from ..model_core import (
    EstimationResult,
    ProbabilityModel,
    column_similarity,
    estimate_monitored,
    naive_estimate,
    tabulate_counts,
)
from .config import RunConfig
from .ingestion import filter_extreme_frequency
from .reporting import Diagnostics, Report, Totals, build_segment_rows

logger = logging.getLogger(__name__)

SIMILARITY_WARNING = 0.95


class ClusteredPeriod(BaseModel):
    """Basket types and customer segments of one period"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    baskets: BasketFeatureSet
    basket_types: ClusteringResult
    customers: CustomerFeatureSet
    segments: ClusteringResult
    removed_customers: int = 0

    def basket_labels(self) -> pd.Series:
        """Basket type of every basket, indexed by basket_id"""
        return pd.Series(self.basket_types.assignments, index=self.baskets.frame.index)

    def segment_labels(self) -> pd.Series:
        """Segment of every monitored customer, indexed by customer_id"""
        return pd.Series(self.segments.assignments, index=self.customers.frame.index)

    def basket_table(self) -> pd.DataFrame:
        """Features and basket type of every basket"""
        table = pd.DataFrame([vector.model_dump() for vector in self.baskets.vectors()])
        table["basket_type"] = [f"type-{label}" for label in self.basket_types.assignments]
        return table

    def centers_table(self, which: str) -> pd.DataFrame:
        """Standardized and feature-unit centers of the basket types or segments"""
        result = self.basket_types if which == "basket_types" else self.segments
        prefix = "type" if which == "basket_types" else "segment"
        columns = FEATURE_COLUMNS if which == "basket_types" else PROFILE_COLUMNS
        table = pd.DataFrame(result.centers, columns=[f"z_{column}" for column in columns])
        table[columns] = result.standardization.invert(result.centers)
        table.insert(0, "size", result.sizes)
        table.insert(0, prefix, [f"{prefix}-{index + 1}" for index in range(result.k)])
        table["db_index"] = result.db_index
        return table


class CustomerEstimationService:
    """Unified service for the clustering and estimation pipeline"""

    def __init__(self, config: Optional[RunConfig] = None, settings: Optional[OptimizerSettings] = None):
        """
        Initialize the customer estimation service.

        Args:
            config: Run configuration
            settings: Optimizer settings (default: from the environment)
        """
        self.config = config or RunConfig()
        self.settings = settings or OptimizerSettings.from_env()
        self.prior = PriorSpec(gamma=self.config.gamma) if self.config.gamma else None

    def _cluster(self, points: np.ndarray, k: Optional[int], k_range: Tuple[int, int]) -> ClusteringResult:
        z_points, scaling = standardize(points)
        if k is not None:
            result = kmeans(z_points, k, seed=self.config.seed, restarts=self.config.restarts)
        else:
            low, high = k_range
            high = min(high, z_points.shape[0])
            _, result = select_k(
                z_points, range(low, high + 1), seed=self.config.seed, restarts=self.config.restarts
            )
        return result.with_standardization(scaling)

    def cluster_period(self, lines: pd.DataFrame) -> ClusteredPeriod:
        """
        Build basket types from all baskets and segments from monitored customers.

        Args:
            lines: Product lines of one period

        Returns:
            ClusteredPeriod
        """
        lines, removed = filter_extreme_frequency(lines, self.config.frequency_cap, self.config.months)

        logger.info("Clustering baskets...")
        baskets = basket_features(lines)
        basket_types = self._cluster(baskets.points(), self.config.n_baskets, self.config.basket_k_range)

        logger.info("Clustering customers...")
        customers = customer_features(baskets)
        segment_range = self.config.segment_k_range
        if self.config.m_segments is None:
            segment_range = (segment_range[0], min(segment_range[1], basket_types.k))
        segments = self._cluster(customers.points(), self.config.m_segments, segment_range)
        logger.info("Found %d basket types and %d customer segments", basket_types.k, segments.k)

        return ClusteredPeriod(
            baskets=baskets,
            basket_types=basket_types,
            customers=customers,
            segments=segments,
            removed_customers=removed,
        )

    def monitored_model(self, period: ClusteredPeriod) -> Tuple[ProbabilityModel, SegmentFrequencies]:
        """Estimate r, q0 and the segment frequencies from the monitored baskets"""
        frame = period.baskets.frame
        types = period.basket_labels()
        monitored = frame.loc[frame["customer_id"] != ""]
        segments = period.segment_labels()
        if monitored.empty:
            raise EmptySampleError("no monitored baskets in the period")

        n, m = period.basket_types.k, period.segments.k
        counts = tabulate_counts(
            types.loc[monitored.index].to_numpy(),
            segments.loc[monitored["customer_id"]].to_numpy(),
            n=n,
            m=m,
        )
        frequencies = segment_frequencies(
            period.segments.assignments, period.customers.frame["visit_count"].to_numpy(), m=m
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LinearDependenceWarning)
            model = estimate_monitored(counts, frequencies.frequencies)
        return model, frequencies

    def estimate(self, lines: pd.DataFrame) -> Report:
        """
        Run the full pipeline on the product lines of one period:
        1. Remove extreme-frequency customers
        2. Cluster baskets into basket types
        3. Cluster monitored customers into segments
        4. Estimate r, q0 and frequencies from monitored baskets
        5. Estimate the unmonitored segment mix
        6. Convert it into unique customers

        Args:
            lines: Product lines (ingestion layout)

        Returns:
            Report for the configured period
        """
        if not (lines["customer_id"] == "").any():
            raise NothingToEstimateError(f"period {self.config.period} has no unmonitored baskets")
        if not (lines["customer_id"] != "").any():
            raise EmptySampleError(f"period {self.config.period} has no monitored baskets")

        period = self.cluster_period(lines)
        model, frequencies = self.monitored_model(period)

        frame = period.baskets.frame
        unmonitored = frame.loc[frame["customer_id"] == ""]
        if unmonitored.empty:
            raise NothingToEstimateError(f"period {self.config.period} has no unmonitored baskets with value")
        x = tabulate_counts(period.basket_labels().loc[unmonitored.index].to_numpy(), n=model.n).x

        similarity = column_similarity(model.r)
        if similarity > SIMILARITY_WARNING:
            logger.warning(
                "Segments have similar basket-type profiles (cosine %.3f); consider another segmentation",
                similarity,
            )

        logger.info("Estimating the unmonitored segment mix with %s...", self.config.estimator)
        fit = estimate_segment_mix(self.config.estimator, x, model.r, self.settings, self.prior)
        if not fit.converged:
            raise ConvergenceError(
                f"{self.config.estimator} did not converge in {fit.iterations} iterations"
            )
        a = int(x.sum())
        estimate = fit.to_estimation(frequencies.frequencies, a)
        naive = naive_estimate(model.q, frequencies.frequencies, a)
        return self._report(period, model, frequencies, estimate, naive, a, similarity)

    def _report(
        self,
        period: ClusteredPeriod,
        model: ProbabilityModel,
        frequencies: SegmentFrequencies,
        estimate: EstimationResult,
        naive: EstimationResult,
        a: int,
        similarity: float,
    ) -> Report:
        segments = build_segment_rows(
            model.q,
            estimate.q_hat,
            frequencies.frequencies,
            frequencies.customers,
            estimate.customers_per_segment,
            period.segments.centers,
        )
        report = Report(
            period=self.config.period,
            a=a,
            a0=int(frequencies.visits.sum()),
            segments=segments,
            totals=Totals(
                monitored_customers=int(frequencies.customers.sum()),
                estimated_customers=estimate.d_hat,
                naive_customers=naive.d_hat,
                ratio_to_naive=estimate.d_hat / naive.d_hat,
            ),
            diagnostics=Diagnostics(
                n_baskets=model.n,
                m_segments=model.m,
                rank=model.rank,
                identifiable=model.is_identifiable,
                column_similarity=similarity,
                estimator=estimate.estimator,
                converged=estimate.converged,
                iterations=estimate.iterations,
                objective=estimate.objective,
                d_hat_in_range=estimate.d_hat_in_range,
                basket_db_index=period.basket_types.db_index,
                segment_db_index=period.segments.db_index,
                excluded_baskets=period.baskets.excluded,
                removed_customers=period.removed_customers,
            ),
        )
        logger.info(
            "Period %s: %.1f unmonitored customers (naive %.1f)",
            report.period,
            report.totals.estimated_customers,
            report.totals.naive_customers,
        )
        return report

    def cluster_only(self, lines: pd.DataFrame) -> Dict[str, pd.DataFrame]:
        """
        Cluster one period without estimating.

        Returns:
            Tables "baskets", "basket_types" and "segments_centers"
        """
        period = self.cluster_period(lines)
        return {
            "baskets": period.basket_table(),
            "basket_types": period.centers_table("basket_types"),
            "segments_centers": period.centers_table("segments"),
        }


def split_periods(lines: pd.DataFrame, frequency: Optional[str]) -> List[Tuple[str, pd.DataFrame]]:
    """
    Slice product lines into calendar periods.

    Args:
        lines: Product lines with a timestamp column
        frequency: "W", "M", "Q" or "Y"; None keeps the whole log

    Returns:
        List of (period label, lines) in calendar order
    """
    if frequency is None:
        return [("all", lines)]
    if "timestamp" not in lines.columns or lines["timestamp"].isna().any():
        raise InputError("periodization needs a timestamp on every line")
    labels = pd.to_datetime(lines["timestamp"]).dt.to_period(frequency)
    return [(str(label), group.reset_index(drop=True)) for label, group in lines.groupby(labels, sort=True)]


def estimate_pipeline(lines: pd.DataFrame, config: RunConfig, settings: Optional[OptimizerSettings] = None) -> List[Report]:
    """
    Estimate unmonitored customers for every period of a log.

    Args:
        lines: Ingested product lines
        config: Run configuration
        settings: Optimizer settings

    Returns:
        One Report per period
    """
    reports = []
    for label, period_lines in split_periods(lines, config.period_frequency):
        period_config = config if config.period_frequency is None else config.for_period(label)
        service = CustomerEstimationService(period_config, settings)
        reports.append(service.estimate(period_lines))
    return reports
