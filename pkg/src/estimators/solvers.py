"""
Simplex-Constrained Solvers

Deterministic optimizers used by the segment-mix estimators:
- the EM fixed-point update of mixture weights (likelihood / KL), finished
  by active-set Newton steps on a face of the simplex
- projected gradient ascent with Armijo backtracking (Dirichlet posterior)
- projected gradient descent with exact line search (squared error)
"""

import logging
from typing import Callable, NamedTuple, Tuple

import numpy as np

from .settings import OptimizerSettings
from .simplex import project_onto_simplex

logger = logging.getLogger(__name__)

ARMIJO_SLOPE = 1e-4
BACKTRACK = 0.5
MIN_STEP = 1e-20
MAX_STEP = 1e8
NEWTON_SWITCH = 1e-6
NEWTON_ITERATIONS = 200
ZERO_WEIGHT = 1e-12
STALLED_TOLERANCE = 1e-7


class SolverTrace(NamedTuple):
    """Outcome of one solver run"""

    q: np.ndarray
    value: float
    iterations: int
    converged: bool


def _stopped(step: float, value: float, previous: float, tolerance: float) -> bool:
    change = abs(value - previous) / max(abs(previous), 1.0)
    return step <= tolerance and change <= tolerance


def _weighted_log_mix(weights: np.ndarray, mix: np.ndarray, floor: float) -> float:
    seen = weights > 0
    return float(np.sum(weights[seen] * np.log(np.maximum(mix[seen], floor))))


def em_update(q: np.ndarray, weights: np.ndarray, r: np.ndarray, floor: float = 1e-300) -> np.ndarray:
    """
    One EM update of mixture weights: q_j <- q_j sum_i w_i r_ij / (r q)_i.

    Args:
        q: Current segment mix
        weights: Basket-type weights normalized to sum to one
        r: Conditional probability matrix
        floor: Lower clamp of (r q)_i

    Returns:
        The updated segment mix
    """
    mix = r @ q
    ratio = np.zeros_like(weights)
    seen = weights > 0
    ratio[seen] = weights[seen] / np.maximum(mix[seen], floor)
    updated = q * (r.T @ ratio)
    return updated / updated.sum()


def _mixture_derivatives(
    weights: np.ndarray, r: np.ndarray, q: np.ndarray, floor: float
) -> Tuple[np.ndarray, np.ndarray]:
    seen = weights > 0
    rows = r[seen]
    mix = np.maximum(rows @ q, floor)
    ratio = weights[seen] / mix
    gradient = rows.T @ ratio
    hessian = -(rows * (ratio / mix)[:, None]).T @ rows
    return gradient, hessian


def kkt_residual(gradient: np.ndarray, q: np.ndarray, free: np.ndarray) -> float:
    """
    Optimality gap of a simplex-constrained maximization.

    At a maximizer every free coordinate has gradient equal to the multiplier
    q . gradient and no fixed coordinate exceeds it.

    Args:
        gradient: Objective gradient at q
        q: Point on the simplex
        free: Coordinates allowed to move

    Returns:
        The largest violation, 0 at a KKT point
    """
    multiplier = float(q @ gradient)
    gaps = np.abs(gradient[free] - multiplier)
    excess = np.maximum(gradient[~free] - multiplier, 0.0)
    return float(max(gaps.max(initial=0.0), excess.max(initial=0.0)))


def _face_newton_direction(gradient: np.ndarray, hessian: np.ndarray, free: np.ndarray) -> np.ndarray:
    k = int(free.sum())
    system = np.zeros((k + 1, k + 1))
    system[:k, :k] = hessian[np.ix_(free, free)]
    system[:k, k] = 1.0
    system[k, :k] = 1.0
    rhs = np.append(-gradient[free], 0.0)
    solution = np.linalg.lstsq(system, rhs, rcond=None)[0]
    direction = np.zeros_like(gradient)
    direction[free] = solution[:k]
    return direction


def newton_mixture_weights(
    weights: np.ndarray,
    r: np.ndarray,
    start: np.ndarray,
    settings: OptimizerSettings,
    budget: int = NEWTON_ITERATIONS,
) -> SolverTrace:
    """
    Finish the maximization of sum_i w_i ln (r q)_i with active-set Newton steps.

    Newton steps run on the face of the simplex spanned by the free
    coordinates. A coordinate that a step drives to zero leaves the face, and
    a zero coordinate whose gradient beats the multiplier rejoins it. The run
    converges when the KKT residual falls below the tolerance.

    Args:
        weights: Basket-type weights normalized to sum to one
        r: Conditional probability matrix
        start: Point on the simplex, usually an EM iterate
        settings: Stopping rules
        budget: Most Newton steps to take

    Returns:
        SolverTrace with the normalized objective value
    """
    q = np.where(start > ZERO_WEIGHT, start, 0.0)
    q = q / q.sum()
    free = q > 0
    value = _weighted_log_mix(weights, r @ q, settings.floor)
    iterations = 0
    while iterations < budget:
        gradient, hessian = _mixture_derivatives(weights, r, q, settings.floor)
        if kkt_residual(gradient, q, free) <= settings.tolerance:
            return SolverTrace(q, value, iterations, True)
        iterations += 1

        multiplier = float(q @ gradient)
        entering = ~free & (gradient > multiplier + settings.tolerance)
        if entering.any():
            free[np.argmax(np.where(entering, gradient, -np.inf))] = True

        direction = _face_newton_direction(gradient, hessian, free)
        stuck = free & (q <= 0) & (direction < 0)
        if stuck.any():
            free &= ~stuck
            direction = _face_newton_direction(gradient, hessian, free)
        slope = float(gradient @ direction)
        if slope <= 0:
            break

        shrinking = direction < 0
        ceiling = float(np.min(-q[shrinking] / direction[shrinking])) if shrinking.any() else np.inf
        step_length = min(1.0, ceiling)
        while step_length >= MIN_STEP:
            candidate = np.maximum(q + step_length * direction, 0.0)
            if step_length == ceiling:
                leaving = shrinking & (q + ceiling * direction <= ZERO_WEIGHT)
                candidate[leaving] = 0.0
            candidate = candidate / candidate.sum()
            candidate_value = _weighted_log_mix(weights, r @ candidate, settings.floor)
            if candidate_value >= value + ARMIJO_SLOPE * step_length * slope:
                break
            step_length *= BACKTRACK
        else:
            break

        q, value = candidate, candidate_value
        free = q > 0

    gradient, _ = _mixture_derivatives(weights, r, q, settings.floor)
    residual = kkt_residual(gradient, q, q > 0)
    # Stalled: accept the point if it is optimal to working precision.
    return SolverTrace(q, value, iterations, residual <= STALLED_TOLERANCE)


def em_mixture_weights(
    weights: np.ndarray, r: np.ndarray, start: np.ndarray, settings: OptimizerSettings
) -> SolverTrace:
    """
    Maximize sum_i w_i ln (r q)_i over the simplex.

    EM fixed-point updates, each a monotone ascent step of the concave
    objective, run until they slow down. Active-set Newton steps then finish
    on the face of the simplex where the maximizer lies, so a maximizer on
    the boundary is reached instead of approached sublinearly.

    Args:
        weights: Basket-type weights normalized to sum to one
        r: Conditional probability matrix
        start: Interior starting point
        settings: Stopping rules

    Returns:
        SolverTrace with the normalized objective value
    """
    q = np.asarray(start, dtype=float)
    value = _weighted_log_mix(weights, r @ q, settings.floor)
    switch = max(settings.tolerance, NEWTON_SWITCH)
    iterations = 0
    while iterations < settings.max_iterations:
        iterations += 1
        updated = em_update(q, weights, r, settings.floor)
        updated_value = _weighted_log_mix(weights, r @ updated, settings.floor)
        step = float(np.max(np.abs(updated - q)))
        done = _stopped(step, updated_value, value, switch)
        q, value = updated, updated_value
        if done:
            break

    budget = min(NEWTON_ITERATIONS, settings.max_iterations - iterations)
    finish = newton_mixture_weights(weights, r, q, settings, budget)
    if not finish.converged:
        logger.debug("EM and Newton steps stopped after %d iterations without converging", iterations + finish.iterations)
    return SolverTrace(finish.q, finish.value, iterations + finish.iterations, finish.converged)


def projected_gradient_ascent(
    objective: Callable[[np.ndarray], float],
    gradient: Callable[[np.ndarray], np.ndarray],
    start: np.ndarray,
    settings: OptimizerSettings,
) -> SolverTrace:
    """
    Maximize a smooth objective over the simplex by projected gradient ascent.

    The step length is chosen by Armijo backtracking along the projection arc
    and allowed to grow again after every accepted step.

    Args:
        objective: Function to maximize
        gradient: Its gradient
        start: Starting point on the simplex
        settings: Stopping rules

    Returns:
        SolverTrace with the final objective value
    """
    q = np.asarray(start, dtype=float)
    value = objective(q)
    step_length = 1.0
    for iteration in range(1, settings.max_iterations + 1):
        direction = gradient(q)
        while True:
            candidate = project_onto_simplex(q + step_length * direction)
            moved = candidate - q
            candidate_value = objective(candidate)
            if candidate_value >= value + ARMIJO_SLOPE * float(direction @ moved):
                break
            step_length *= BACKTRACK
            if step_length < MIN_STEP:
                # No ascent left at machine precision.
                return SolverTrace(q, value, iteration, True)

        step = float(np.max(np.abs(moved)))
        done = _stopped(step, candidate_value, value, settings.tolerance)
        q, value = candidate, candidate_value
        if done:
            return SolverTrace(q, value, iteration, True)
        step_length = min(step_length * 2.0, MAX_STEP)

    logger.debug("projected gradient stopped after %d iterations", settings.max_iterations)
    return SolverTrace(q, value, settings.max_iterations, False)


def projected_gradient_least_squares(
    p_hat: np.ndarray, r: np.ndarray, start: np.ndarray, settings: OptimizerSettings
) -> SolverTrace:
    """
    Minimize ||p_hat - r q||^2 over the simplex.

    Each iteration projects a gradient step of length 1/L (L the gradient
    Lipschitz constant) and then takes the exact minimizer of the quadratic
    along the segment towards that projection.

    Args:
        p_hat: Observed basket-type distribution
        r: Conditional probability matrix
        start: Starting point on the simplex
        settings: Stopping rules

    Returns:
        SolverTrace with the final squared error
    """
    hessian = r.T @ r
    linear = r.T @ p_hat
    lipschitz = 2.0 * float(np.linalg.eigvalsh(hessian).max())

    def squared_error(q: np.ndarray) -> float:
        residual = p_hat - r @ q
        return float(residual @ residual)

    q = np.asarray(start, dtype=float)
    value = squared_error(q)
    for iteration in range(1, settings.max_iterations + 1):
        grad = 2.0 * (hessian @ q - linear)
        moved = project_onto_simplex(q - grad / lipschitz) - q
        curvature = 2.0 * float(moved @ hessian @ moved)
        if curvature <= 0.0:
            return SolverTrace(q, value, iteration, True)
        alpha = min(max(-float(grad @ moved) / curvature, 0.0), 1.0)
        updated = q + alpha * moved
        updated_value = squared_error(updated)
        step = float(np.max(np.abs(updated - q)))
        done = _stopped(step, updated_value, value, settings.tolerance)
        q, value = updated, updated_value
        if done:
            return SolverTrace(q, value, iteration, True)

    return SolverTrace(q, value, settings.max_iterations, False)
