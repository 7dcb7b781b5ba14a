"""
Clustering Package

This package builds the basket types and customer segments of a period:
- Basket and customer feature extraction
- Z-score standardization
- K-means with Davies-Bouldin selection of the cluster count
- Visit frequencies of the customer segments
"""

from .features import (
    FEATURE_COLUMNS,
    PROFILE_COLUMNS,
    BasketFeatureSet,
    BasketFeatureVector,
    CustomerFeatureSet,
    CustomerProfile,
    basket_features,
    customer_features,
)
from .frequencies import SegmentFrequencies, segment_frequencies
from .kmeans import ClusteringResult, davies_bouldin, kmeans, select_k
from .standardize import Standardization, standardize

__all__ = [
    "FEATURE_COLUMNS",
    "PROFILE_COLUMNS",
    "BasketFeatureSet",
    "BasketFeatureVector",
    "CustomerFeatureSet",
    "CustomerProfile",
    "basket_features",
    "customer_features",
    "SegmentFrequencies",
    "segment_frequencies",
    "ClusteringResult",
    "davies_bouldin",
    "kmeans",
    "select_k",
    "Standardization",
    "standardize",
]
