"""
Spreading statistics, distribution distances, decoherence fitting and
escape-probability estimation for walks produced by :mod:`qwalk.lattice`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .lattice import (
    Distribution,
    StepSchedule,
    evolve,
    hadamard_coin,
    uniform_schedule,
)

__all__ = [
    "SpreadStats",
    "FitResult",
    "EscapeEstimate",
    "spread_stats",
    "spreading_exponent",
    "l1_distance",
    "binomial_reference",
    "golden_section_minimize",
    "fit_decoherence",
    "model_distribution",
    "escape_probability",
]

# inputs to l1_distance must have unit mass to this slack
NORMALIZATION_TOL = 1e-9
FIT_GRID_POINTS = 101
FIT_Q_TOL = 1e-4

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SpreadStats:
    step_index: int
    mean: float
    stddev: float


@dataclass(frozen=True)
class FitResult:
    q_hat: float
    residual: float
    evaluations: int


@dataclass(frozen=True)
class EscapeEstimate:
    """Survival after ``steps`` steps with absorbers in place."""

    remaining_mass: float
    last_increment: float
    converged: bool
    steps: int
    per_step_absorbed: tuple[float, ...]


def spread_stats(dist: Distribution, step_index: int) -> SpreadStats:
    """Mean and standard deviation of position, conditioned on the surviving mass."""
    mass = dist.mass
    if not mass > 0.0:
        raise ValueError("spread_stats needs a distribution with positive mass")
    x = np.asarray(dist.support, dtype=np.float64)
    p = dist.probabilities / mass
    mean = float(np.dot(x, p))
    var = float(np.dot(x * x, p)) - mean * mean
    return SpreadStats(int(step_index), mean, math.sqrt(max(var, 0.0)))


def spreading_exponent(stats: Sequence[SpreadStats]) -> float:
    """Least-squares slope of ``log(stddev)`` against ``log(step_index)``.

    About 1 for ballistic spreading, 1/2 for diffusive.
    """
    if len(stats) < 3:
        raise ValueError(f"need at least 3 points, got {len(stats)}")
    for s in stats:
        if s.step_index < 1 or not s.stddev > 0.0:
            raise ValueError(
                f"every point needs step_index >= 1 and stddev > 0 (got {s.step_index}, {s.stddev})"
            )
    x = np.log([float(s.step_index) for s in stats])
    y = np.log([s.stddev for s in stats])
    xc = x - x.mean()
    denom = float(np.dot(xc, xc))
    if denom == 0.0:
        raise ValueError("step indices must not all be equal")
    return float(np.dot(xc, y - y.mean()) / denom)


def _aligned(p: Distribution, r: Distribution) -> tuple[np.ndarray, np.ndarray]:
    keys = sorted(set(p.support) | set(r.support))
    return (
        np.array([p[k] for k in keys], dtype=np.float64),
        np.array([r[k] for k in keys], dtype=np.float64),
    )


def l1_distance(p: Distribution, r: Distribution) -> float:
    """Total-variation distance ``1/2 sum_j |p(j) - r(j)|`` of two normalized distributions."""
    for name, d in (("p", p), ("r", r)):
        if abs(d.mass - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"{name} is not normalized (mass {d.mass:.12g})")
    a, b = _aligned(p, r)
    return float(0.5 * np.sum(np.abs(a - b)))


def binomial_reference(n: int) -> Distribution:
    """Classical +/-1 random walk after ``n`` steps: ``p(n - 2k) = C(n, k) / 2^n``."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    return Distribution.from_mapping(
        {n - 2 * k: math.comb(n, k) / 2.0**n for k in range(n + 1)}
    )


def golden_section_minimize(
    f: Callable[[float], float], a: float, b: float, tol: float = FIT_Q_TOL
) -> tuple[float, float, int]:
    """
    Minimize a unimodal ``f`` on ``[a, b]`` until the bracket is narrower than ``tol``.

    Returns ``(x, f(x), evaluations)`` for the best point evaluated.
    """
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    n = 2
    best = (c, fc) if fc <= fd else (d, fd)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
            x, fx = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
            x, fx = d, fd
        n += 1
        if fx < best[1]:
            best = (x, fx)
    return best[0], best[1], n


def model_distribution(schedule_template: StepSchedule, q: float) -> Distribution:
    """Final distribution of ``schedule_template`` run at uniform ``q``, normalized to the survivors."""
    rec = evolve(schedule_template.with_q(q), mode="density")
    return rec.final_distribution.normalized()


def fit_decoherence(measured: Distribution, schedule_template: StepSchedule) -> FitResult:
    """
    Least-squares estimate of a single dephasing probability ``q``.

    Minimizes ``sum_j (p_model(q)(j) - p_measured(j))^2`` on ``[0, 1]``: a
    101-point grid locates the basin, then golden-section search refines it
    inside the neighbouring grid cells.
    """
    if not measured.support or measured.mass <= 0.0:
        raise ValueError("measured distribution is empty")
    if len(schedule_template) == 0:
        raise ValueError("schedule_template has no steps; q is not identifiable")

    cache: dict[float, float] = {}

    def objective(q: float) -> float:
        if q not in cache:
            a, b = _aligned(model_distribution(schedule_template, q), measured)
            cache[q] = float(np.sum((a - b) ** 2))
        return cache[q]

    grid = np.linspace(0.0, 1.0, FIT_GRID_POINTS)
    values = [objective(float(q)) for q in grid]
    k = int(np.argmin(values))
    lo = float(grid[max(k - 1, 0)])
    hi = float(grid[min(k + 1, len(grid) - 1)])
    golden_section_minimize(objective, lo, hi, FIT_Q_TOL)
    q_hat = min(cache, key=lambda q: (cache[q], q))
    return FitResult(q_hat, cache[q_hat], len(cache))


def escape_probability(
    schedule_template: StepSchedule,
    absorber_positions: Iterable[int],
    max_steps: int,
    tol: float = 1e-6,
) -> EscapeEstimate:
    """
    Probability that the walker is still unabsorbed after ``max_steps`` steps.

    The template supplies the initial position and coin state and the coin
    and ``q`` of its first step, which are repeated for ``max_steps`` steps
    with ``absorber_positions`` blocked after every step. Templates with
    ``q = 0`` run as pure states; others fall back to the density-matrix
    driver, whose cost grows as ``max_steps^2`` in memory.

    ``converged`` reports whether the final step removed less than ``tol``.
    """
    if max_steps < 1:
        raise ValueError(f"max_steps must be >= 1, got {max_steps}")
    if len(schedule_template):
        first = schedule_template.steps[0]
        coin, q = first.coin, first.q
    else:
        coin, q = hadamard_coin(), 0.0
    sched = uniform_schedule(
        max_steps,
        coin=coin,
        q=q,
        absorbers=absorber_positions,
        initial_position=schedule_template.initial_position,
        initial_coin=schedule_template.initial_coin,
    )
    rec = evolve(sched, mode="pure" if q == 0.0 else "density")
    last = rec.absorbed[-1]
    return EscapeEstimate(
        remaining_mass=rec.remaining[-1],
        last_increment=last,
        converged=last < tol,
        steps=max_steps,
        per_step_absorbed=rec.absorbed,
    )
