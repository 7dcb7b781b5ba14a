"""
Random Sampling

Dirichlet perturbations of the model parameters and multinomial draws of
transaction counts. Every function takes an explicit numpy Generator.
"""

import numpy as np

from ..errors import InputError
from ..model_core import CountsTable


def sample_dirichlet(concentration, rng: np.random.Generator) -> np.ndarray:
    """
    Draw one Dirichlet vector as independent gamma draws normalized to their sum.

    Args:
        concentration: Strictly positive concentration parameters
        rng: Random generator

    Returns:
        A probability vector
    """
    concentration = np.asarray(concentration, dtype=float)
    if concentration.ndim != 1 or np.any(~np.isfinite(concentration)) or np.any(concentration <= 0):
        raise InputError(f"Dirichlet concentrations must be positive, got {concentration}")
    draws = rng.standard_gamma(concentration)
    total = draws.sum()
    if total <= 0:
        raise InputError("Dirichlet draw underflowed; concentrations are too small")
    return draws / total


def dirichlet_perturb_columns(r0, alpha_r: float, rng: np.random.Generator) -> np.ndarray:
    """
    Draw every column of r independently from Dirichlet(alpha_r * r0_j).

    Args:
        r0: Conditional probability matrix with strictly positive entries
        alpha_r: Concentration multiplier
        rng: Random generator

    Returns:
        Perturbed matrix with simplex columns
    """
    if alpha_r is None or alpha_r <= 0:
        raise InputError(f"alpha_r must be positive, got {alpha_r}")
    r0 = np.asarray(r0, dtype=float)
    if np.any(r0 <= 0):
        raise InputError("Dirichlet perturbation of r needs strictly positive entries")
    return np.column_stack([sample_dirichlet(alpha_r * column, rng) for column in r0.T])


def dirichlet_perturb_frequencies(f0, alpha_f: float, rng: np.random.Generator) -> np.ndarray:
    """
    Draw frequencies f = S w with w ~ Dirichlet(alpha_f f0 / S) and S = sum(f0).

    Args:
        f0: Strictly positive frequencies
        alpha_f: Concentration multiplier
        rng: Random generator

    Returns:
        Perturbed frequencies with the same sum as f0
    """
    if alpha_f is None or alpha_f <= 0:
        raise InputError(f"alpha_f must be positive, got {alpha_f}")
    f0 = np.asarray(f0, dtype=float)
    if np.any(f0 <= 0):
        raise InputError("frequencies must be strictly positive")
    total = f0.sum()
    return total * sample_dirichlet(alpha_f * f0 / total, rng)


def sample_multinomial(total: int, probabilities, rng: np.random.Generator) -> np.ndarray:
    """
    Counts of `total` independent categorical draws.

    Args:
        total: Number of draws (>= 0)
        probabilities: Category probabilities
        rng: Random generator

    Returns:
        Integer counts summing to total
    """
    if total < 0:
        raise InputError(f"number of draws must be non-negative, got {total}")
    probabilities = np.asarray(probabilities, dtype=float)
    if np.any(probabilities < 0) or probabilities.sum() <= 0:
        raise InputError(f"invalid category probabilities {probabilities}")
    return rng.multinomial(int(total), probabilities / probabilities.sum())


def sample_counts(a: int, q, r, rng: np.random.Generator) -> CountsTable:
    """
    Draw a monitored-style sample: segments from q, then basket types from
    the columns of r.

    Args:
        a: Number of transactions
        q: Segment mix
        r: Conditional probability matrix
        rng: Random generator

    Returns:
        CountsTable with x, y and z
    """
    r = np.asarray(r, dtype=float)
    y = sample_multinomial(a, q, rng)
    z = np.column_stack([sample_multinomial(y[j], r[:, j], rng) for j in range(r.shape[1])])
    return CountsTable(a=a, x=z.sum(axis=1), y=y, z=z)


def sample_monitored_customers(y, f0, rng: np.random.Generator) -> np.ndarray:
    """
    Unique customers behind the monitored transactions of each segment.

    A shopper of segment j makes a geometric number of visits with mean
    f0_j, so every transaction after the first of a segment closes the
    current customer with probability 1 / f0_j.

    Args:
        y: Monitored transactions per segment, all >= 1
        f0: Visit frequencies per segment, all >= 1
        rng: Random generator

    Returns:
        Integer customer counts d0_j with 1 <= d0_j <= y_j
    """
    y = np.asarray(y, dtype=np.int64)
    f0 = np.asarray(f0, dtype=float)
    if y.shape != f0.shape:
        raise InputError(f"y has {y.size} segments but f0 has {f0.size}")
    if np.any(y < 1):
        raise InputError("every segment needs at least one monitored transaction")
    if np.any(f0 < 1):
        raise InputError(f"visit frequencies must be at least 1 to sample customers, got {f0}")
    return 1 + rng.binomial(y - 1, 1.0 / f0)
