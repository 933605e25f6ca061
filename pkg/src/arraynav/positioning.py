"""Linearized least-squares positioning and the outlier-resistant IRLS variant.

Both solvers run Gauss-Newton iterations from the Earth's center on the
pseudorange residuals, re-solving the clock term each step. IRLS reweights
each measurement by the inverse squared residual, floored at the intrinsic
pseudorange imprecision sigma.

The IRLS weight law is a redescending M-estimator (quadratic core, log
tail), so its fixed points are subset consensuses: with few measurements the
ordinary-LS start can hand a high-leverage outlier enough influence to lock
the iteration onto a consensus that includes it. When the converged fit
still carries an outlier-sized residual, the solver therefore restarts from
every leave-one-out LS solution and keeps the fixed point with the best
M-estimator objective.
"""

from dataclasses import dataclass

import numpy as np

from .constants import (
    EARTH_RADIUS,
    IRLS_SIGMA,
    SOLVER_MAX_ITER,
    SOLVER_TOL,
)

_COND_LIMIT = 1e12
_ESCALATION_FLOOR = 20.0  # restart when max |residual| exceeds this many sigma


class PositionFailure(Exception):
    """Raised when positioning is impossible (rank, count, or conditioning)."""


@dataclass(frozen=True)
class Measurement:
    sat_position: np.ndarray  # (3,) ECEF m
    pseudorange: float        # m

    def __post_init__(self):
        if not self.pseudorange > 0:
            raise ValueError("pseudorange must be positive")


@dataclass(frozen=True)
class PositionFix:
    position: np.ndarray      # (3,) ECEF m
    clock_bias: float         # c * dt, m
    iterations: int
    converged: bool
    residuals: np.ndarray     # (n,) final pseudorange residuals, m
    weights: np.ndarray       # (n,) final IRLS weights (ones for plain LS)
    residual_norms: tuple     # per-iteration post-update residual 2-norms


def _design(measurements, position):
    sats = np.stack([m.sat_position for m in measurements])
    ranges = np.linalg.norm(sats - position[None, :], axis=1)
    a = np.empty((len(measurements), 4))
    a[:, :3] = (position[None, :] - sats) / ranges[:, None]
    a[:, 3] = 1.0
    delta = np.array([m.pseudorange for m in measurements]) - ranges
    return a, delta


def _iterate(measurements, weight_update, max_iter, tol, start=None, start_weights=None):
    if len(measurements) < 4:
        raise PositionFailure("need at least 4 pseudoranges")
    position = np.zeros(3) if start is None else np.asarray(start, dtype=float).copy()
    clock = 0.0
    weights = np.ones(len(measurements)) if start_weights is None else start_weights
    converged = False
    iterations = 0
    norms = []
    for k in range(max_iter):
        iterations = k + 1
        a, delta = _design(measurements, position)
        normal = a.T @ (weights[:, None] * a)
        if np.linalg.cond(normal) > _COND_LIMIT:
            raise PositionFailure("singular geometry")
        update = np.linalg.solve(normal, a.T @ (weights * delta))
        position = position + update[:3]
        clock = update[3]
        residuals = delta - a @ update
        norms.append(float(np.linalg.norm(residuals)))
        if weight_update is not None:
            weights = weight_update(residuals)
        if np.linalg.norm(update[:3]) < tol:
            converged = True
            break
    final_residuals = (
        np.array([m.pseudorange for m in measurements])
        - np.linalg.norm(
            np.stack([m.sat_position for m in measurements]) - position[None, :], axis=1
        )
        - clock
    )
    return PositionFix(
        position=position,
        clock_bias=float(clock),
        iterations=iterations,
        converged=converged,
        residuals=final_residuals,
        weights=weights,
        residual_norms=tuple(norms),
    )


def solve_ls(measurements, max_iter=SOLVER_MAX_ITER, tol=SOLVER_TOL) -> PositionFix:
    """Plain iterated linearized least squares from the Earth-center start."""
    return _iterate(measurements, None, max_iter, tol)


def _m_objective(residuals, sigma):
    """Loss whose stationary points the IRLS weight law iterates toward."""
    e = np.abs(residuals)
    return float(
        np.sum(np.where(e <= sigma, e**2 / (2 * sigma**2), 0.5 + np.log(e / np.maximum(sigma, 1e-300))))
    )


def solve_irls(measurements, max_iter=SOLVER_MAX_ITER, sigma=IRLS_SIGMA,
               tol=SOLVER_TOL) -> PositionFix:
    """Iteratively reweighted least squares with residual floor sigma.

    The first pass uses unit weights, so one iteration reproduces one
    solve_ls step exactly. If the converged fit still holds a residual far
    above sigma, leave-one-out restarts search the other consensus basins
    and the best fixed point by the M-estimator objective wins.
    """

    def reweight(residuals):
        return 1.0 / np.maximum(sigma, np.abs(residuals)) ** 2

    fix = _iterate(measurements, reweight, max_iter, tol)
    threshold = _ESCALATION_FLOOR * sigma
    if (
        not fix.converged
        or len(measurements) < 5
        or np.max(np.abs(fix.residuals)) <= threshold
    ):
        return fix

    best = (_m_objective(fix.residuals, sigma), fix)
    for drop in range(len(measurements)):
        subset = measurements[:drop] + measurements[drop + 1 :]
        try:
            start = solve_ls(subset, max_iter, tol)
        except PositionFailure:
            continue
        # Weights at the start come from start-point residuals with a robust
        # (median) clock, otherwise the restart re-enters the old basin.
        _, delta = _design(measurements, start.position)
        start_weights = reweight(delta - np.median(delta))
        try:
            cand = _iterate(
                measurements, reweight, max_iter, tol,
                start=start.position, start_weights=start_weights,
            )
        except PositionFailure:
            continue
        score = _m_objective(cand.residuals, sigma)
        if cand.converged and score < best[0]:
            best = (score, cand)
    return best[1]


def surface_error(fix, truth_position):
    """Distance from the truth to the fix radially projected onto the sphere.

    A failed fix (None) or a degenerate origin estimate maps to +inf.
    """
    if fix is None:
        return np.inf
    norm = np.linalg.norm(fix.position)
    if norm < 1.0:
        return np.inf
    projected = fix.position * (EARTH_RADIUS / norm)
    return float(np.linalg.norm(projected - truth_position))
