"""
Simplex helpers: Euclidean projection and starting points.
"""

import numpy as np


def project_onto_simplex(v: np.ndarray) -> np.ndarray:
    """
    Euclidean projection of v onto the probability simplex.

    Sort-based O(m log m) thresholding.

    Args:
        v: Vector to project

    Returns:
        The closest point w with w >= 0 and sum(w) = 1
    """
    v = np.asarray(v, dtype=float)
    if np.all(v >= 0) and abs(v.sum() - 1.0) <= 1e-15:
        return v.copy()
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    rho = np.nonzero(u - cssv / ind > 0)[0][-1]
    theta = cssv[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def uniform_start(m: int) -> np.ndarray:
    """Barycentre of the simplex"""
    return np.full(m, 1.0 / m)


def starting_points(m: int, count: int, seed: int) -> list:
    """
    Deterministic starting points: the barycentre, then Dirichlet(1,...,1) draws.

    Args:
        m: Dimension
        count: Number of starting points
        seed: Seed of the extra draws

    Returns:
        List of interior simplex points
    """
    starts = [uniform_start(m)]
    if count > 1:
        rng = np.random.default_rng(seed)
        starts.extend(rng.dirichlet(np.ones(m), size=count - 1))
    return starts
