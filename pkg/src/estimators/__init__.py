"""
Estimators Package

This package provides the simplex-constrained estimators of the segment mix:
- Maximum likelihood via the EM fixed-point update and a Newton finish
- Least squares via projected gradient descent
- Dirichlet maximum a posteriori via projected gradient ascent
"""

from .mixture import (
    ESTIMATORS,
    SegmentMixFit,
    estimate_segment_mix,
    kl_estimate,
    ls_estimate,
    map_estimate,
    mle_estimate,
)
from .objectives import kl_divergence, log_beta, log_likelihood, log_posterior, squared_error
from .settings import OptimizerSettings, PriorSpec
from .simplex import project_onto_simplex
from .solvers import em_update, kkt_residual

__all__ = [
    "ESTIMATORS",
    "SegmentMixFit",
    "estimate_segment_mix",
    "kl_estimate",
    "ls_estimate",
    "map_estimate",
    "mle_estimate",
    "kl_divergence",
    "log_beta",
    "log_likelihood",
    "log_posterior",
    "squared_error",
    "OptimizerSettings",
    "PriorSpec",
    "project_onto_simplex",
    "em_update",
    "kkt_residual",
]
