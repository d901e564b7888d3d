"""
Model of the optical implementation.

Covers the visibility <-> dephasing calibration (computed from a two-step
interferometer simulation), a Gaussian mode-overlap model for displacer
misalignment, and the component-count and loss bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import (
    CoinOperator,
    DensityState,
    PureState,
    WindowOverflowError,
    coin_state,
    hadamard_coin,
    step_density,
    step_pure,
)

__all__ = [
    "CalibrationModel",
    "PHASE_SAMPLES",
    "visibility_from_q",
    "q_from_visibility",
    "misalignment_to_visibility",
    "angle_to_q",
    "element_count",
    "survival_probability",
]

PHASE_SAMPLES = 360
VISIBILITY_TOL = 1e-6

_IDENTITY = CoinOperator(np.eye(2, dtype=np.complex128))
_WINDOW = (-2, 2)


@dataclass(frozen=True)
class CalibrationModel:
    """Gaussian mode-overlap model anchored at full decoherence.

    ``floor`` is the visibility reached at ``zero_visibility_angle``; anything
    at or below it is reported as 0.
    """

    zero_visibility_angle: float = 10.5
    model_kind: str = "gaussian_overlap"
    floor: float = 0.005

    def __post_init__(self) -> None:
        if not self.zero_visibility_angle > 0:
            raise ValueError("zero_visibility_angle must be > 0")
        if not 0.0 < self.floor < 0.05:
            raise ValueError("floor must lie in (0, 0.05)")
        if self.model_kind != "gaussian_overlap":
            raise ValueError(f"unsupported model_kind {self.model_kind!r}")

    @property
    def sigma(self) -> float:
        """Angular width (degrees) with ``V(zero_visibility_angle) = floor``."""
        return self.zero_visibility_angle / math.sqrt(2.0 * math.log(1.0 / self.floor))


def _readout_vector(coin: CoinOperator) -> np.ndarray:
    # u = W2^dag |0, D>, built column by column from the pure step
    lo, hi = _WINDOW
    dim = 2 * (hi - lo + 1)
    w2 = np.zeros((dim, dim), dtype=np.complex128)
    for k in range(dim):
        e = np.zeros(dim, dtype=np.complex128)
        e[k] = 1.0
        basis = PureState(lo, e.reshape(-1, 2))
        try:
            w2[:, k] = step_pure(basis, coin).as_vector()
        except WindowOverflowError:
            # edge states leave the window and never reach mode 0
            pass
    target = PureState.point(0, coin_state("D"), _WINDOW).as_vector()
    return w2.conj().T @ target


def _mode0_curve(q: float, coin: CoinOperator, n_phase: int) -> np.ndarray:
    """Probability of finding ``|D>`` in output mode 0 for each inserted phase."""
    psi = PureState.point(0, coin_state("D"), _WINDOW)
    # first displacer splits the paths; dephasing acts before they recombine
    rho = step_density(DensityState.from_pure(psi), _IDENTITY, q).matrix
    u = _readout_vector(coin)
    phis = 2.0 * np.pi * np.arange(n_phase) / n_phase
    plus_one = np.zeros(rho.shape[0], dtype=bool)
    plus_one[2 * (1 - _WINDOW[0]) : 2 * (1 - _WINDOW[0]) + 2] = True
    phase = np.where(plus_one[None, :], np.exp(1j * phis)[:, None], 1.0)
    v = u[None, :] * phase.conj()
    return np.real(np.einsum("pi,ij,pj->p", v.conj(), rho, v))


def visibility_from_q(
    q: float, coin: CoinOperator | None = None, n_phase: int = PHASE_SAMPLES
) -> float:
    """
    Interference visibility of the two-displacer alignment interferometer.

    ``|D>`` enters mode 0, the first displacer splits it into modes -1 and +1,
    dephasing ``q`` acts between the displacers, a relative phase is swept
    on mode +1, ``coin`` is applied and the second displacer recombines the
    paths into mode 0, which is projected onto ``|D>``. Returns
    ``(p_max - p_min) / (p_max + p_min)`` over the phase sweep.
    """
    q = float(q)
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q!r}")
    p = _mode0_curve(q, coin if coin is not None else hadamard_coin(), n_phase)
    pmax, pmin = float(p.max()), float(p.min())
    if pmax + pmin <= 0.0:
        return 0.0
    return max((pmax - pmin) / (pmax + pmin), 0.0)


def q_from_visibility(visibility: float, coin: CoinOperator | None = None) -> float:
    """Invert :func:`visibility_from_q` by bisection (the map decreases in ``q``)."""
    v = float(visibility)
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {visibility!r}")
    lo, hi = 0.0, 1.0
    if abs(visibility_from_q(lo, coin) - v) < VISIBILITY_TOL:
        return lo
    if abs(visibility_from_q(hi, coin) - v) < VISIBILITY_TOL:
        return hi
    mid = 0.5
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        vm = visibility_from_q(mid, coin)
        if abs(vm - v) < VISIBILITY_TOL:
            break
        if vm > v:
            lo = mid
        else:
            hi = mid
    return mid


def misalignment_to_visibility(
    angle: float, model: CalibrationModel | None = None
) -> float:
    """Visibility ``exp(-angle^2 / (2 sigma^2))`` at a relative displacer angle (degrees)."""
    if model is None:
        model = CalibrationModel()
    if not angle >= 0:
        raise ValueError(f"angle must be >= 0, got {angle!r}")
    vis = math.exp(-(angle**2) / (2.0 * model.sigma**2))
    # the anchor angle lands on the floor up to rounding
    if vis <= model.floor * (1.0 + 1e-9):
        return 0.0
    return vis


def angle_to_q(angle: float, model: CalibrationModel | None = None) -> float:
    """Dephasing probability implied by a displacer misalignment angle."""
    return q_from_visibility(misalignment_to_visibility(angle, model))


def element_count(n: int) -> tuple[int, int]:
    """Optical components for ``n`` steps: this scheme (``2n``) vs. a beamsplitter array (``(n^2+n)/2``)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return 2 * n, (n * n + n) // 2


def survival_probability(n: int, loss_per_step: float) -> float:
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if not 0.0 <= loss_per_step < 1.0:
        raise ValueError(f"loss_per_step must lie in [0, 1), got {loss_per_step!r}")
    return (1.0 - loss_per_step) ** n
