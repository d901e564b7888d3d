"""
Walker states and the coin, shift, dephasing and absorption primitives.

Basis conventions
-----------------
The coin (polarization) index is 0 for ``|H>`` and 1 for ``|V>``. The shift
moves ``|H>`` amplitude from site ``j`` to ``j - 1`` and ``|V>`` amplitude to
``j + 1``. Density matrices use the composite index ``2 * (j - min_pos) + c``.

Every evolution routine returns a new state; inputs are never mutated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "UNITARY_TOL",
    "TRACE_TOL",
    "POSITIVITY_TOL",
    "MASS_TOL",
    "WindowOverflowError",
    "CoinOperator",
    "CoinState",
    "PureState",
    "DensityState",
    "Distribution",
    "Step",
    "StepSchedule",
    "AbsorptionRecord",
    "WalkRecord",
    "hadamard_coin",
    "waveplate_unitary",
    "coin_state",
    "shift_apply",
    "apply_coin",
    "step_pure",
    "dephase",
    "step_density",
    "apply_absorber",
    "position_distribution",
    "uniform_schedule",
    "evolve",
]

UNITARY_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10
MASS_TOL = 1e-10
# explicit coin amplitudes from user input are accepted at this slack, then renormalized
COIN_NORM_TOL = 1e-9

H, V = 0, 1


class WindowOverflowError(RuntimeError):
    """Amplitude would be shifted outside the allocated lattice window."""


# ---------------------------------------------------------------------------
# coins
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoinOperator:
    """A 2x2 unitary acting on the (H, V) coin space."""

    matrix: NDArray[np.complex128]

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=np.complex128)
        if m.shape != (2, 2):
            raise ValueError(f"coin matrix must be 2x2, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("coin matrix has non-finite entries")
        err = np.max(np.abs(m @ m.conj().T - np.eye(2)))
        if err > UNITARY_TOL:
            raise ValueError(f"coin matrix is not unitary (max |UU^dag - I| = {err:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def apply(self, state: "CoinState") -> "CoinState":
        h, v = self.matrix @ state.as_array()
        return CoinState(complex(h), complex(v))

    def __matmul__(self, other: "CoinOperator") -> "CoinOperator":
        return CoinOperator(self.matrix @ other.matrix)


@dataclass(frozen=True)
class CoinState:
    amp_h: complex
    amp_v: complex

    def __post_init__(self) -> None:
        if self.norm_squared > 1.0 + COIN_NORM_TOL:
            raise ValueError(f"coin state norm {self.norm_squared:.6g} exceeds 1")

    @property
    def norm_squared(self) -> float:
        return abs(self.amp_h) ** 2 + abs(self.amp_v) ** 2

    def as_array(self) -> NDArray[np.complex128]:
        return np.array([self.amp_h, self.amp_v], dtype=np.complex128)

    def normalized(self) -> "CoinState":
        n = math.sqrt(self.norm_squared)
        if n == 0.0:
            raise ValueError("cannot normalize the zero coin state")
        return CoinState(self.amp_h / n, self.amp_v / n)


_S2 = 1.0 / math.sqrt(2.0)

_NAMED_COIN_STATES = {
    "H": (1.0, 0.0),
    "V": (0.0, 1.0),
    "D": (_S2, _S2),
    "A": (_S2, -_S2),
    "L": (_S2, 1j * _S2),
    "R": (_S2, -1j * _S2),
}


def coin_state(name: str) -> CoinState:
    """Return a named polarization state (``H``, ``V``, ``D``, ``A``, ``L``, ``R``).

    ``L`` is left-circular, ``(|H> + i|V>)/sqrt(2)``, built directly from its
    amplitudes so it does not depend on any waveplate sign convention.
    """
    try:
        h, v = _NAMED_COIN_STATES[name]
    except KeyError:
        raise ValueError(
            f"unknown coin state {name!r}; expected one of {sorted(_NAMED_COIN_STATES)}"
        ) from None
    return CoinState(complex(h), complex(v))


def hadamard_coin() -> CoinOperator:
    """(1/sqrt 2) [[1, 1], [1, -1]]: ``|H> -> |D>``, ``|V> -> |A>``."""
    return CoinOperator(np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) * _S2)


def waveplate_unitary(kind: str, angle: float) -> CoinOperator:
    """
    Jones matrix of an ideal waveplate with its fast axis at ``angle`` degrees.

    Parameters
    ----------
    kind : {"half", "quarter"}
    angle : float
        Fast-axis angle from horizontal, in degrees.

    Returns
    -------
    CoinOperator
        Half-wave: ``[[cos 2t, sin 2t], [sin 2t, -cos 2t]]``.
        Quarter-wave: ``exp(-i pi/4) [[cos^2 t + i sin^2 t, (1 - i) sin t cos t],
        [(1 - i) sin t cos t, sin^2 t + i cos^2 t]]``.

    Notes
    -----
    The half-wave form drops the global phase ``-i`` so that a plate at 22.5
    degrees is exactly the Hadamard coin.
    """
    if not math.isfinite(angle):
        raise ValueError(f"waveplate angle must be finite, got {angle!r}")
    t = math.radians(angle)
    if kind == "half":
        c, s = math.cos(2 * t), math.sin(2 * t)
        m = np.array([[c, s], [s, -c]], dtype=np.complex128)
    elif kind == "quarter":
        c, s = math.cos(t), math.sin(t)
        off = (1 - 1j) * s * c
        m = np.exp(-1j * math.pi / 4) * np.array(
            [[c * c + 1j * s * s, off], [off, s * s + 1j * c * c]], dtype=np.complex128
        )
    else:
        raise ValueError(f"unknown waveplate kind {kind!r}; expected 'half' or 'quarter'")
    return CoinOperator(m)


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------


def _frozen(a: NDArray) -> NDArray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PureState:
    """
    Coherent walker: one (H, V) amplitude pair per site of ``[min_pos, max_pos]``.

    ``amplitudes`` has shape ``(max_pos - min_pos + 1, 2)``.
    """

    min_pos: int
    amplitudes: NDArray[np.complex128]

    def __post_init__(self) -> None:
        amps = _frozen(self.amplitudes)
        if amps.ndim != 2 or amps.shape[1] != 2 or amps.shape[0] < 1:
            raise ValueError(f"amplitudes must have shape (L, 2), got {amps.shape}")
        object.__setattr__(self, "min_pos", int(self.min_pos))
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def point(
        cls, position: int, coin: CoinState, window: tuple[int, int] | None = None
    ) -> "PureState":
        lo, hi = window if window is not None else (position, position)
        if not lo <= position <= hi:
            raise ValueError(f"position {position} outside window [{lo}, {hi}]")
        amps = np.zeros((hi - lo + 1, 2), dtype=np.complex128)
        amps[position - lo] = coin.as_array()
        return cls(lo, amps)

    @classmethod
    def from_mapping(
        cls, amps: Mapping[int, tuple[complex, complex]], window: tuple[int, int]
    ) -> "PureState":
        lo, hi = window
        arr = np.zeros((hi - lo + 1, 2), dtype=np.complex128)
        for j, (a, b) in amps.items():
            if not lo <= j <= hi:
                raise ValueError(f"position {j} outside window [{lo}, {hi}]")
            arr[j - lo] = (a, b)
        return cls(lo, arr)

    @property
    def max_pos(self) -> int:
        return self.min_pos + self.amplitudes.shape[0] - 1

    @property
    def window(self) -> tuple[int, int]:
        return self.min_pos, self.max_pos

    @property
    def positions(self) -> NDArray[np.int64]:
        return np.arange(self.min_pos, self.max_pos + 1)

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def amplitude(self, position: int) -> tuple[complex, complex]:
        if not self.min_pos <= position <= self.max_pos:
            return 0j, 0j
        h, v = self.amplitudes[position - self.min_pos]
        return complex(h), complex(v)

    def as_vector(self) -> NDArray[np.complex128]:
        """Flattened amplitudes in the composite (position, coin) basis."""
        return self.amplitudes.reshape(-1).copy()

    def with_window(self, lo: int, hi: int) -> "PureState":
        """Re-embed into ``[lo, hi]``; occupied sites outside it are an error."""
        out = np.zeros((hi - lo + 1, 2), dtype=np.complex128)
        for j in range(self.min_pos, self.max_pos + 1):
            row = self.amplitudes[j - self.min_pos]
            if lo <= j <= hi:
                out[j - lo] = row
            elif np.any(row != 0):
                raise ValueError(f"occupied site {j} outside window [{lo}, {hi}]")
        return PureState(lo, out)


@dataclass(frozen=True)
class DensityState:
    """
    Mixed walker state over ``[min_pos, max_pos]``.

    ``matrix`` is ``2L x 2L`` in the composite (position, coin) basis.
    """

    min_pos: int
    matrix: NDArray[np.complex128]

    def __post_init__(self) -> None:
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2 or m.shape[0] == 0:
            raise ValueError(f"density matrix must be 2L x 2L, got shape {m.shape}")
        object.__setattr__(self, "min_pos", int(self.min_pos))
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_pure(cls, state: PureState) -> "DensityState":
        v = state.as_vector()
        return cls(state.min_pos, np.outer(v, v.conj()))

    @property
    def n_sites(self) -> int:
        return self.matrix.shape[0] // 2

    @property
    def max_pos(self) -> int:
        return self.min_pos + self.n_sites - 1

    @property
    def window(self) -> tuple[int, int]:
        return self.min_pos, self.max_pos

    @property
    def positions(self) -> NDArray[np.int64]:
        return np.arange(self.min_pos, self.max_pos + 1)

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def blocks(self) -> NDArray[np.complex128]:
        """View as ``(L, 2, L, 2)``: ``[i, a, j, c] = <i,a| rho |j,c>``."""
        L = self.n_sites
        return self.matrix.reshape(L, 2, L, 2)


# ---------------------------------------------------------------------------
# distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Distribution:
    """Position probabilities ``probabilities[k] = p(support[k])``."""

    support: tuple[int, ...]
    probabilities: NDArray[np.float64]

    def __post_init__(self) -> None:
        sup = tuple(int(j) for j in self.support)
        p = np.array(self.probabilities, dtype=np.float64, copy=True)
        if p.shape != (len(sup),):
            raise ValueError("support and probabilities must have equal length")
        if len(set(sup)) != len(sup):
            raise ValueError("support positions must be distinct")
        if np.any(~np.isfinite(p)) or np.any(p < 0):
            raise ValueError("probabilities must be finite and non-negative")
        p.setflags(write=False)
        object.__setattr__(self, "support", sup)
        object.__setattr__(self, "probabilities", p)

    @classmethod
    def from_mapping(cls, probs: Mapping[int, float]) -> "Distribution":
        keys = sorted(probs)
        return cls(tuple(keys), np.array([probs[k] for k in keys], dtype=np.float64))

    @property
    def mass(self) -> float:
        return float(np.sum(self.probabilities))

    def __getitem__(self, position: int) -> float:
        try:
            return float(self.probabilities[self.support.index(position)])
        except ValueError:
            return 0.0

    def as_dict(self, drop_zeros: bool = True) -> dict[int, float]:
        return {
            j: float(p)
            for j, p in zip(self.support, self.probabilities)
            if not (drop_zeros and p == 0.0)
        }

    def nonzero(self) -> "Distribution":
        return Distribution.from_mapping(self.as_dict(drop_zeros=True))

    def normalized(self) -> "Distribution":
        m = self.mass
        if m <= 0:
            raise ValueError("cannot normalize a zero-mass distribution")
        return Distribution(self.support, self.probabilities / m)


def position_distribution(state: PureState | DensityState) -> Distribution:
    """Marginal position distribution over the state's window (unnormalized)."""
    if isinstance(state, PureState):
        p = np.sum(np.abs(state.amplitudes) ** 2, axis=1)
    elif isinstance(state, DensityState):
        diag = np.real(np.diagonal(state.matrix)).reshape(-1, 2)
        p = np.maximum(diag.sum(axis=1), 0.0)
    else:
        raise TypeError(f"expected PureState or DensityState, got {type(state).__name__}")
    return Distribution(tuple(range(state.min_pos, state.max_pos + 1)), p)


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------


def _shift_rows(a: NDArray[np.complex128]) -> NDArray[np.complex128]:
    # a has shape (L, 2, ...): axis 0 is position, axis 1 the coin
    if np.any(a[0, H] != 0) or np.any(a[-1, V] != 0):
        raise WindowOverflowError("shift would move amplitude outside the lattice window")
    out = np.zeros_like(a)
    out[:-1, H] = a[1:, H]
    out[1:, V] = a[:-1, V]
    return out


def shift_apply(state: PureState) -> PureState:
    """Conditional shift: ``|j,H> -> |j-1,H>``, ``|j,V> -> |j+1,V>``.

    Raises
    ------
    WindowOverflowError
        If an occupied edge site would be pushed off the window.
    """
    return PureState(state.min_pos, _shift_rows(state.amplitudes))


def apply_coin(state: PureState, coin: CoinOperator) -> PureState:
    return PureState(state.min_pos, state.amplitudes @ coin.matrix.T)


def step_pure(state: PureState, coin: CoinOperator) -> PureState:
    """One walk step ``W = S C``."""
    return shift_apply(apply_coin(state, coin))


def _check_q(q: float) -> float:
    q = float(q)
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"dephasing probability q must lie in [0, 1], got {q!r}")
    return q


def _dephase_blocks(r4: NDArray[np.complex128], q: float) -> NDArray[np.complex128]:
    if q == 0.0:
        return r4
    out = r4 * (1.0 - q)
    idx = np.arange(r4.shape[0])
    out[idx, :, idx, :] = r4[idx, :, idx, :]
    return out


def dephase(rho: DensityState, q: float) -> DensityState:
    """
    Position dephasing ``(1-q) rho + q sum_i P_i rho P_i`` with ``P_i = |i><i| (x) 1``.

    Coherences between different sites are scaled by ``1 - q``; the 2x2 coin
    block of each site is untouched.
    """
    q = _check_q(q)
    L = rho.n_sites
    return DensityState(rho.min_pos, _dephase_blocks(rho.blocks(), q).reshape(2 * L, 2 * L))


def step_density(rho: DensityState, coin: CoinOperator, q: float) -> DensityState:
    """``dephase(W rho W^dag, q)`` with ``W = S C``, done blockwise in O(L^2)."""
    q = _check_q(q)
    L = rho.n_sites
    c = coin.matrix
    r4 = np.einsum("ab,ibjd,cd->iajc", c, rho.blocks(), c.conj())
    r4 = _shift_rows(r4)
    r4 = _shift_rows(r4.transpose(2, 3, 0, 1)).transpose(2, 3, 0, 1)
    r4 = _dephase_blocks(r4, q)
    return DensityState(rho.min_pos, np.ascontiguousarray(r4).reshape(2 * L, 2 * L))


def apply_absorber(
    state: PureState | DensityState, positions: Iterable[int]
) -> tuple[PureState | DensityState, float]:
    """
    Remove all weight at ``positions``; return the new state and the mass removed.

    The returned state is not renormalized. Positions outside the window hold
    no weight and are ignored.
    """
    lo, hi = state.window
    rows = sorted({int(j) - lo for j in positions if lo <= int(j) <= hi})
    if not rows:
        return state, 0.0
    if isinstance(state, PureState):
        amps = state.amplitudes.copy()
        removed = float(np.sum(np.abs(amps[rows]) ** 2))
        amps[rows] = 0.0
        return PureState(state.min_pos, amps), removed
    if isinstance(state, DensityState):
        r4 = state.blocks().copy()
        removed = float(np.real(sum(np.trace(r4[i, :, i, :]) for i in rows)))
        r4[rows, :, :, :] = 0.0
        r4[:, :, rows, :] = 0.0
        L = state.n_sites
        return DensityState(state.min_pos, r4.reshape(2 * L, 2 * L)), removed
    raise TypeError(f"expected PureState or DensityState, got {type(state).__name__}")


# ---------------------------------------------------------------------------
# schedules and the driver
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Step:
    coin: CoinOperator
    q: float = 0.0
    absorbers: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "q", _check_q(self.q))
        object.__setattr__(self, "absorbers", frozenset(int(j) for j in self.absorbers))


@dataclass(frozen=True)
class StepSchedule:
    """The full program of a walk: one :class:`Step` per time step."""

    steps: tuple[Step, ...]
    initial_position: int = 0
    initial_coin: CoinState = field(default_factory=lambda: coin_state("L"))

    def __post_init__(self) -> None:
        steps = tuple(self.steps)
        for s in steps:
            if not isinstance(s, Step):
                raise TypeError(f"schedule entries must be Step, got {type(s).__name__}")
        if abs(self.initial_coin.norm_squared - 1.0) > COIN_NORM_TOL:
            raise ValueError(
                f"initial coin state must be normalized (|psi|^2 = {self.initial_coin.norm_squared:.6g})"
            )
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "initial_position", int(self.initial_position))
        object.__setattr__(self, "initial_coin", self.initial_coin.normalized())

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def qs(self) -> tuple[float, ...]:
        return tuple(s.q for s in self.steps)

    @property
    def window(self) -> tuple[int, int]:
        n = len(self.steps)
        return self.initial_position - n, self.initial_position + n

    def with_q(self, q: float) -> "StepSchedule":
        """Same program with a single dephasing probability at every step."""
        return StepSchedule(
            tuple(Step(s.coin, q, s.absorbers) for s in self.steps),
            self.initial_position,
            self.initial_coin,
        )

    def with_absorbers(self, positions: Iterable[int]) -> "StepSchedule":
        pos = frozenset(positions)
        return StepSchedule(
            tuple(Step(s.coin, s.q, pos) for s in self.steps),
            self.initial_position,
            self.initial_coin,
        )

    def initial_pure(self) -> PureState:
        return PureState.point(self.initial_position, self.initial_coin, self.window)


def uniform_schedule(
    n_steps: int,
    *,
    coin: CoinOperator | None = None,
    q: float = 0.0,
    absorbers: Iterable[int] = (),
    initial_position: int = 0,
    initial_coin: CoinState | None = None,
) -> StepSchedule:
    """Schedule with the same coin, ``q`` and absorbers at every step.

    Defaults reproduce the standard experiment: Hadamard coins, ``|L>`` start at 0.
    """
    if n_steps < 0:
        raise ValueError(f"n_steps must be >= 0, got {n_steps}")
    step = Step(coin if coin is not None else hadamard_coin(), q, frozenset(absorbers))
    return StepSchedule(
        (step,) * n_steps,
        initial_position,
        initial_coin if initial_coin is not None else coin_state("L"),
    )


@dataclass(frozen=True)
class AbsorptionRecord:
    per_step_absorbed: tuple[float, ...]
    cumulative_absorbed: float
    remaining_mass: float


@dataclass(frozen=True)
class WalkRecord:
    """
    Output of :func:`evolve`.

    ``distributions[k]`` is the (unnormalized) position distribution after
    ``k`` steps, so index 0 is the initial point mass. ``absorbed[k]`` and
    ``cumulative[k]`` refer to step ``k + 1``.
    """

    mode: str
    distributions: tuple[Distribution, ...]
    absorbed: tuple[float, ...]
    cumulative: tuple[float, ...]
    remaining: tuple[float, ...]
    final_state: PureState | DensityState

    @property
    def n_steps(self) -> int:
        return len(self.distributions) - 1

    @property
    def final_distribution(self) -> Distribution:
        return self.distributions[-1]

    @property
    def absorption(self) -> AbsorptionRecord:
        return AbsorptionRecord(
            self.absorbed,
            self.cumulative[-1] if self.cumulative else 0.0,
            self.remaining[-1],
        )


def evolve(schedule: StepSchedule, mode: str = "pure") -> WalkRecord:
    """
    Run ``schedule`` and record the distribution after every step.

    Each step applies the coin, the shift, dephasing (density mode only) and
    then the step's absorbers. The window is fixed up front to
    ``initial_position +/- len(schedule)``.

    Parameters
    ----------
    schedule : StepSchedule
    mode : {"pure", "density"}
        Pure mode requires ``q == 0`` at every step. Density mode stores a
        dense ``2(2N+1)``-dimensional matrix; it is meant for N up to a few
        hundred. Use :func:`qwalk.trajectories.sample_trajectories` beyond that.

    Raises
    ------
    ValueError
        Unknown mode, or pure mode with a dephasing step.
    """
    if mode not in ("pure", "density"):
        raise ValueError(f"mode must be 'pure' or 'density', got {mode!r}")
    if mode == "pure":
        bad = [k + 1 for k, s in enumerate(schedule.steps) if s.q != 0.0]
        if bad:
            raise ValueError(
                f"pure mode cannot represent dephasing; steps {bad} have q > 0 "
                "(use mode='density')"
            )

    state: PureState | DensityState = schedule.initial_pure()
    if mode == "density":
        state = DensityState.from_pure(state)

    dists = [position_distribution(state)]
    absorbed: list[float] = []
    cumulative: list[float] = []
    remaining = [dists[0].mass]
    total = 0.0
    for s in schedule.steps:
        if mode == "pure":
            state = step_pure(state, s.coin)
        else:
            state = step_density(state, s.coin, s.q)
        state, removed = apply_absorber(state, s.absorbers)
        total += removed
        absorbed.append(removed)
        cumulative.append(total)
        d = position_distribution(state)
        dists.append(d)
        remaining.append(d.mass)
    return WalkRecord(
        mode, tuple(dists), tuple(absorbed), tuple(cumulative), tuple(remaining), state
    )

