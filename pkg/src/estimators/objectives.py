"""
Objective Functions

Log-likelihood, Kullback-Leibler divergence, squared error and Dirichlet
log-posterior of a segment mix q given basket-type observations.
"""

from typing import Tuple

import numpy as np
from scipy.special import gammaln

from ..errors import ShapeError


def _as_problem(q, observed, r) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    q = np.asarray(q, dtype=float)
    observed = np.asarray(observed, dtype=float)
    r = np.asarray(r, dtype=float)
    if r.ndim != 2:
        raise ShapeError(f"r must be a matrix, got shape {r.shape}")
    n, m = r.shape
    if q.shape != (m,):
        raise ShapeError(f"q has shape {q.shape}, expected ({m},)")
    if observed.shape != (n,):
        raise ShapeError(f"observations have shape {observed.shape}, expected ({n},)")
    return q, observed, r


def log_likelihood(q, x, r) -> float:
    """
    Multinomial log-likelihood L(q) = sum_i x_i ln (r q)_i.

    Args:
        q: Segment mix
        x: Transactions per basket type
        r: Conditional probability matrix

    Returns:
        The log-likelihood, or -inf when an observed basket type is impossible
    """
    q, x, r = _as_problem(q, x, r)
    mix = r @ q
    seen = x > 0
    if np.any(mix[seen] <= 0):
        return float("-inf")
    return float(np.sum(x[seen] * np.log(mix[seen])))


def kl_divergence(q, p_hat, r) -> float:
    """
    Kullback-Leibler divergence from r q to p_hat.

    Terms with p_hat_i = 0 contribute nothing.

    Args:
        q: Segment mix
        p_hat: Observed basket-type distribution
        r: Conditional probability matrix

    Returns:
        The divergence (non-negative, +inf when r q misses observed mass)
    """
    q, p_hat, r = _as_problem(q, p_hat, r)
    mix = r @ q
    seen = p_hat > 0
    if np.any(mix[seen] <= 0):
        return float("inf")
    value = float(np.sum(p_hat[seen] * np.log(p_hat[seen] / mix[seen])))
    return max(value, 0.0)


def squared_error(q, p_hat, r) -> float:
    """Squared error sum_i (p_hat_i - (r q)_i)^2"""
    q, p_hat, r = _as_problem(q, p_hat, r)
    residual = p_hat - r @ q
    return float(residual @ residual)


def log_beta(gamma) -> float:
    """Logarithm of the multivariate beta function"""
    gamma = np.asarray(gamma, dtype=float)
    return float(np.sum(gammaln(gamma)) - gammaln(np.sum(gamma)))


def log_posterior(q, x, r, gamma) -> float:
    """
    Log-posterior AP(q) under a Dirichlet(gamma) prior.

    Args:
        q: Segment mix
        x: Transactions per basket type
        r: Conditional probability matrix
        gamma: Dirichlet concentration parameters

    Returns:
        L(q) + sum_j (gamma_j - 1) ln q_j - ln B(gamma)
    """
    q, x, r = _as_problem(q, x, r)
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != q.shape:
        raise ShapeError(f"gamma has shape {gamma.shape}, expected {q.shape}")
    likelihood = log_likelihood(q, x, r)
    shape = gamma - 1.0
    active = shape != 0
    with np.errstate(divide="ignore"):
        prior = float(np.sum(shape[active] * np.log(q[active])))
    return likelihood + prior - log_beta(gamma)
