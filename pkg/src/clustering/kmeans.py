"""
K-Means Clustering

This module clusters standardized feature points:
- Lloyd iterations from k-means++ seeds, best of several restarts
- the Davies-Bouldin index of a clustering
- choice of the cluster count minimizing Davies-Bouldin
"""

import logging
from typing import Iterable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.spatial.distance import cdist, pdist
from sklearn.cluster import kmeans_plusplus
from sklearn.metrics import davies_bouldin_score

from ..errors import ClusteringError
from .standardize import Standardization

logger = logging.getLogger(__name__)

DEFAULT_RESTARTS = 10
MAX_LLOYD_ITERATIONS = 300


class ClusteringResult(BaseModel):
    """Centers and 1-based assignments of a k-means clustering"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    k: int = Field(ge=1)
    centers: np.ndarray = Field(description="k x d centers in standardized space")
    assignments: np.ndarray = Field(description="Cluster id in [1..k] of every point")
    inertia: float = Field(ge=0, description="Within-cluster sum of squares")
    db_index: Optional[float] = Field(default=None, description="Davies-Bouldin index")
    standardization: Optional[Standardization] = None
    inertia_trace: List[float] = Field(default_factory=list)

    @field_validator("centers", "assignments", mode="before")
    @classmethod
    def _as_array(cls, value):
        return np.asarray(value)

    @property
    def sizes(self) -> np.ndarray:
        """Number of points in each cluster"""
        return np.bincount(self.assignments - 1, minlength=self.k)

    def with_standardization(self, standardization: Standardization) -> "ClusteringResult":
        return self.model_copy(update={"standardization": standardization})


def _lloyd(points: np.ndarray, centers: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float, List[float]]:
    n_points, k = points.shape[0], centers.shape[0]
    labels: Optional[np.ndarray] = None
    trace: List[float] = []
    inertia = 0.0

    for _ in range(MAX_LLOYD_ITERATIONS):
        distances = cdist(points, centers, "sqeuclidean")
        new_labels = distances.argmin(axis=1)
        closest = distances[np.arange(n_points), new_labels]
        inertia = float(closest.sum())
        trace.append(inertia)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels

        closest = closest.copy()
        updated = np.empty_like(centers)
        for cluster in range(k):
            members = labels == cluster
            if members.any():
                updated[cluster] = points[members].mean(axis=0)
            else:
                farthest = int(np.argmax(closest))
                closest[farthest] = -1.0
                updated[cluster] = points[farthest]
                logger.info("Re-seeded empty cluster %d at point %d", cluster + 1, farthest)
        centers = updated
    else:
        logger.debug("Lloyd iterations stopped after %d rounds", MAX_LLOYD_ITERATIONS)

    return centers, labels, inertia, trace


def _canonical(centers: np.ndarray, labels: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    order = np.lexsort(centers.T[::-1])
    relabel = np.empty(len(order), dtype=int)
    relabel[order] = np.arange(len(order))
    return centers[order], relabel[labels]


def kmeans(
    points,
    k: int,
    seed: int = 0,
    restarts: int = DEFAULT_RESTARTS,
) -> ClusteringResult:
    """
    Cluster points with k-means.

    Each restart seeds its centers with k-means++ from its own stream of
    SeedSequence(seed); the restart with the lowest inertia wins (the
    earliest on ties). Clusters are numbered by the lexicographic order of
    their centers.

    Args:
        points: N x d array
        k: Number of clusters, 1 <= k <= N
        seed: Seed of the initializations
        restarts: Number of initializations

    Returns:
        ClusteringResult with 1-based assignments and the Davies-Bouldin index
        (None when it is undefined)
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ClusteringError(f"points must be a non-empty 2-D array, got shape {points.shape}")
    if not 1 <= k <= points.shape[0]:
        raise ClusteringError(f"cannot form {k} clusters from {points.shape[0]} points")
    if restarts < 1:
        raise ClusteringError("at least one restart is required")

    best = None
    for stream in np.random.SeedSequence(seed).spawn(restarts):
        random_state = int(stream.generate_state(1)[0])
        initial, _ = kmeans_plusplus(points, k, random_state=random_state)
        run = _lloyd(points, initial)
        if best is None or run[2] < best[2]:
            best = run

    centers, labels, inertia, trace = best
    centers, labels = _canonical(centers, labels)
    assignments = labels + 1

    db_index = None
    if k >= 2:
        try:
            db_index = davies_bouldin(points, assignments)
        except ClusteringError as e:
            logger.warning("Davies-Bouldin index undefined for k=%d: %s", k, e)

    return ClusteringResult(
        k=k,
        centers=centers,
        assignments=assignments,
        inertia=inertia,
        db_index=db_index,
        inertia_trace=trace,
    )


def davies_bouldin(points, assignments) -> float:
    """
    Davies-Bouldin index of a clustering, lower is better.

    Args:
        points: N x d array
        assignments: Cluster id of every point

    Returns:
        Non-negative index over the non-empty clusters
    """
    points = np.asarray(points, dtype=float)
    labels = np.asarray(assignments, dtype=int)
    if points.ndim != 2 or labels.shape != (points.shape[0],):
        raise ClusteringError("every point needs exactly one assignment")

    present = np.unique(labels)
    if present.size < 2:
        raise ClusteringError("Davies-Bouldin needs at least 2 non-empty clusters")
    means = np.array([points[labels == cluster].mean(axis=0) for cluster in present])
    if np.any(pdist(means) <= 0):
        raise ClusteringError("coincident cluster centers: Davies-Bouldin is undefined")
    if present.size == labels.size:
        return 0.0

    try:
        return float(davies_bouldin_score(points, labels))
    except ValueError as e:
        raise ClusteringError(f"Davies-Bouldin is undefined: {e}") from e


def select_k(
    points,
    k_range: Iterable[int],
    seed: int = 0,
    restarts: int = DEFAULT_RESTARTS,
) -> Tuple[int, ClusteringResult]:
    """
    Choose the cluster count with the smallest Davies-Bouldin index.

    Args:
        points: N x d array
        k_range: Candidate counts within [2, N]
        seed: Seed passed to every k-means run
        restarts: Initializations per run

    Returns:
        Tuple of (k*, its ClusteringResult); ties go to the smaller k
    """
    points = np.asarray(points, dtype=float)
    candidates = sorted(set(int(k) for k in k_range))
    if not candidates:
        raise ClusteringError("empty range of cluster counts")
    if candidates[0] < 2 or candidates[-1] > points.shape[0]:
        raise ClusteringError(
            f"cluster counts must lie in [2, {points.shape[0]}], got {candidates}"
        )

    chosen: Optional[ClusteringResult] = None
    for k in candidates:
        result = kmeans(points, k, seed=seed, restarts=restarts)
        logger.info("k=%d: Davies-Bouldin %s", k, result.db_index)
        if result.db_index is None:
            continue
        if chosen is None or result.db_index < chosen.db_index:
            chosen = result

    if chosen is None:
        raise ClusteringError(f"no cluster count in {candidates} gives a defined Davies-Bouldin index")
    logger.info("Selected k=%d (Davies-Bouldin %.4f)", chosen.k, chosen.db_index)
    return chosen.k, chosen
