"""
Monte-Carlo unraveling of the dephasing walk.

Each trajectory is a pure state. After every coin-and-shift step the
walker's position is measured with probability ``q`` (collapsing the state
onto the sampled site); absorbers are a two-outcome measurement that either
removes the trajectory or projects it off the blocked sites. Averaged over
trajectories this reproduces the density-matrix channel.

Trajectories are processed in fixed-size chunks, each with its own child of
the root ``SeedSequence``, so results depend only on ``seed`` and not on the
number of workers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .lattice import H, V, Distribution, StepSchedule, WindowOverflowError

__all__ = ["TrajectoryEnsemble", "sample_trajectories", "CHUNK_SIZE"]

CHUNK_SIZE = 16384


@dataclass(frozen=True)
class TrajectoryEnsemble:
    """
    Empirical read-out of ``sample_count`` trajectories.

    ``per_step[k]`` is the histogram of positions measured after ``k`` steps
    among trajectories still alive, normalized to 1; ``empirical`` is the last
    entry. A fully absorbed ensemble has an empty distribution.
    """

    sample_count: int
    seed: int
    empirical: Distribution
    per_step: tuple[Distribution, ...]
    absorbed_fraction: tuple[float, ...]


def _sample_sites(rng: np.random.Generator, probs: np.ndarray) -> np.ndarray:
    cum = np.cumsum(probs, axis=1)
    u = rng.random(probs.shape[0]) * cum[:, -1]
    return np.argmax(cum > u[:, None], axis=1)


def _run_chunk(
    schedule: StepSchedule, n: int, seed_seq: np.random.SeedSequence
) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed_seq)
    lo, hi = schedule.window
    L = hi - lo + 1
    steps = len(schedule)
    counts = np.zeros((steps + 1, L), dtype=np.int64)
    dead_counts = np.zeros(steps + 1, dtype=np.int64)

    psi = np.zeros((n, L, 2), dtype=np.complex128)
    psi[:, schedule.initial_position - lo] = schedule.initial_coin.as_array()
    alive = np.ones(n, dtype=bool)
    rows = np.arange(n)

    counts[0, schedule.initial_position - lo] = n
    for k, step in enumerate(schedule.steps, start=1):
        psi = psi @ step.coin.matrix.T
        if np.any(psi[:, 0, H] != 0) or np.any(psi[:, -1, V] != 0):
            raise WindowOverflowError("trajectory left the lattice window")
        shifted = np.zeros_like(psi)
        shifted[:, :-1, H] = psi[:, 1:, H]
        shifted[:, 1:, V] = psi[:, :-1, V]
        psi = shifted

        if step.q > 0.0:
            hit = alive & (rng.random(n) < step.q)
            idx = rows[hit]
            if idx.size:
                site = _sample_sites(rng, np.sum(np.abs(psi[idx]) ** 2, axis=2))
                keep = psi[idx, site]
                keep /= np.linalg.norm(keep, axis=1, keepdims=True)
                psi[idx] = 0.0
                psi[idx, site] = keep

        blocked = [j - lo for j in step.absorbers if lo <= j <= hi]
        if blocked:
            p_abs = np.sum(np.abs(psi[:, blocked]) ** 2, axis=(1, 2))
            absorbed = alive & (rng.random(n) < p_abs)
            alive &= ~absorbed
            psi[:, blocked] = 0.0
            psi[~alive] = 0.0
            norms = np.linalg.norm(psi[alive].reshape(-1, 2 * L), axis=1)
            psi[alive] /= norms[:, None, None]

        dead_counts[k] = n - int(alive.sum())
        live = rows[alive]
        if live.size:
            site = _sample_sites(rng, np.sum(np.abs(psi[live]) ** 2, axis=2))
            counts[k] += np.bincount(site, minlength=L)
    return counts, dead_counts


def sample_trajectories(
    schedule: StepSchedule,
    samples: int,
    seed: int,
    *,
    workers: int = 1,
    chunk_size: int = CHUNK_SIZE,
) -> TrajectoryEnsemble:
    """
    Sample ``samples`` stochastic trajectories of ``schedule``.

    Parameters
    ----------
    schedule : StepSchedule
    samples : int
        Number of trajectories, at least 1.
    seed : int
        Root seed in ``[0, 2**64)``; equal seeds give identical ensembles.
    workers : int
        Threads used to run chunks concurrently. Does not affect the result.
    chunk_size : int
        Trajectories per chunk. Part of the reproducibility contract: changing
        it changes the random streams.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if chunk_size < 1:
        raise ValueError(f"chunk_size must be >= 1, got {chunk_size}")

    sizes = [chunk_size] * (samples // chunk_size)
    if samples % chunk_size:
        sizes.append(samples % chunk_size)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = list(zip(sizes, children))

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda j: _run_chunk(schedule, *j), jobs))
    else:
        results = [_run_chunk(schedule, *j) for j in jobs]

    counts = sum(r[0] for r in results)
    dead = sum(r[1] for r in results)

    lo, hi = schedule.window
    support = tuple(range(lo, hi + 1))
    per_step = []
    for row in counts:
        total = int(row.sum())
        if total:
            per_step.append(Distribution(support, row / total).nonzero())
        else:
            per_step.append(Distribution((), np.zeros(0)))
    return TrajectoryEnsemble(
        sample_count=samples,
        seed=seed,
        empirical=per_step[-1],
        per_step=tuple(per_step),
        absorbed_fraction=tuple(float(d) / samples for d in dead),
    )
