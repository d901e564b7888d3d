"""
Experiment configuration files.

A config is a UTF-8 JSON object::

    {
      "version": 1,
      "steps": 5,
      "initial_coin": "L",                # or [[re, im], [re, im]]
      "initial_position": 0,
      "coin": "hadamard",                 # or a half-wave angle, or a per-step list
      "q": 0.0,                           # or a per-step list
      "absorbers": [-1],                  # ints, or {"position", "from_step", "to_step"}
      "mode": "pure",                     # pure | density | trajectories
      "samples": 10000,
      "seed": 0
    }

Only ``version`` and ``steps`` are required. Unknown keys are rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from .lattice import (
    CoinOperator,
    CoinState,
    Step,
    StepSchedule,
    coin_state,
    hadamard_coin,
    waveplate_unitary,
)

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config", "MODES"]

CONFIG_VERSION = 1
MODES = ("pure", "density", "trajectories")
_NAMED_STATES = ("H", "V", "D", "A", "L", "R")
_FIELDS = (
    "version",
    "steps",
    "initial_coin",
    "initial_position",
    "coin",
    "q",
    "absorbers",
    "mode",
    "samples",
    "seed",
)


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"config field '{field}': {message}")
        self.field = field


def _is_int(x: Any) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _is_number(x: Any) -> bool:
    return (isinstance(x, (int, float)) and not isinstance(x, bool)) and math.isfinite(x)


@dataclass(frozen=True)
class Absorber:
    position: int
    from_step: int = 1
    to_step: int | None = None

    def active(self, step: int) -> bool:
        return self.from_step <= step and (self.to_step is None or step <= self.to_step)


@dataclass(frozen=True)
class ExperimentConfig:
    steps: int
    version: int = CONFIG_VERSION
    initial_coin: Any = "L"
    initial_position: int = 0
    coin: Any = "hadamard"
    q: Any = 0.0
    absorbers: tuple[Absorber, ...] = field(default_factory=tuple)
    mode: str = "pure"
    samples: int = 10000
    seed: int = 0

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["absorbers"] = [asdict(a) for a in self.absorbers]
        return {k: d[k] for k in _FIELDS}

    def with_overrides(self, **kw: Any) -> "ExperimentConfig":
        """Return a revalidated copy with the non-``None`` keyword values replaced."""
        kw = {k: v for k, v in kw.items() if v is not None}
        return parse_config({**self.to_dict(), **kw})

    def coins(self) -> list[CoinOperator]:
        raw = self.coin if isinstance(self.coin, list) else [self.coin] * self.steps
        return [_coin_operator(c) for c in raw]

    def qs(self) -> list[float]:
        return [float(x) for x in self.q] if isinstance(self.q, list) else [float(self.q)] * self.steps

    def initial_coin_state(self) -> CoinState:
        if isinstance(self.initial_coin, str):
            return coin_state(self.initial_coin)
        (hr, hi), (vr, vi) = self.initial_coin
        return CoinState(complex(hr, hi), complex(vr, vi))

    def schedule(self) -> StepSchedule:
        coins, qs = self.coins(), self.qs()
        steps = []
        for k in range(1, self.steps + 1):
            blocked = frozenset(a.position for a in self.absorbers if a.active(k))
            steps.append(Step(coins[k - 1], qs[k - 1], blocked))
        return StepSchedule(tuple(steps), self.initial_position, self.initial_coin_state())


def _coin_operator(spec: Any) -> CoinOperator:
    if spec == "hadamard":
        return hadamard_coin()
    return waveplate_unitary("half", float(spec))


def _check_coin_entry(x: Any) -> None:
    if x == "hadamard" or _is_number(x):
        return
    raise ConfigError("coin", f"expected 'hadamard' or a half-wave angle in degrees, got {x!r}")


def _check_q_entry(x: Any) -> None:
    if not _is_number(x) or not 0.0 <= x <= 1.0:
        raise ConfigError("q", f"dephasing probability must be a number in [0, 1], got {x!r}")


def _parse_absorber(x: Any) -> Absorber:
    if _is_int(x):
        return Absorber(x)
    if not isinstance(x, dict):
        raise ConfigError("absorbers", f"entry must be an integer or an object, got {x!r}")
    extra = set(x) - {"position", "from_step", "to_step"}
    if extra:
        raise ConfigError("absorbers", f"unknown keys {sorted(extra)}")
    pos = x.get("position")
    if not _is_int(pos):
        raise ConfigError("absorbers", f"'position' must be an integer, got {pos!r}")
    start = x.get("from_step", 1)
    stop = x.get("to_step")
    if not _is_int(start) or start < 1:
        raise ConfigError("absorbers", f"'from_step' must be an integer >= 1, got {start!r}")
    if stop is not None and (not _is_int(stop) or stop < start):
        raise ConfigError("absorbers", f"'to_step' must be null or an integer >= from_step, got {stop!r}")
    return Absorber(pos, start, stop)


def parse_config(raw: Any) -> ExperimentConfig:
    """Validate a decoded JSON object and build an :class:`ExperimentConfig`.

    Raises
    ------
    ConfigError
        Naming the first invalid field.
    """
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a JSON object")
    unknown = [k for k in raw if k not in _FIELDS]
    if unknown:
        raise ConfigError(unknown[0], "unknown field")

    if "version" not in raw:
        raise ConfigError("version", "missing (expected 1)")
    if raw["version"] != CONFIG_VERSION or not _is_int(raw["version"]):
        raise ConfigError("version", f"unsupported version {raw['version']!r} (expected 1)")

    if "steps" not in raw:
        raise ConfigError("steps", "missing")
    steps = raw["steps"]
    if not _is_int(steps) or steps < 0:
        raise ConfigError("steps", f"must be an integer >= 0, got {steps!r}")

    init = raw.get("initial_coin", "L")
    if isinstance(init, str):
        if init not in _NAMED_STATES:
            raise ConfigError("initial_coin", f"unknown named state {init!r}; expected one of {list(_NAMED_STATES)}")
    else:
        ok = (
            isinstance(init, list)
            and len(init) == 2
            and all(isinstance(c, list) and len(c) == 2 and all(_is_number(x) for x in c) for c in init)
        )
        if not ok:
            raise ConfigError("initial_coin", "must be a named state or [[re, im], [re, im]]")
        norm = sum(x * x for c in init for x in c)
        if abs(norm - 1.0) > 1e-9:
            raise ConfigError("initial_coin", f"amplitudes must be normalized (|psi|^2 = {norm:.12g})")
        init = [[float(x) for x in c] for c in init]

    pos = raw.get("initial_position", 0)
    if not _is_int(pos):
        raise ConfigError("initial_position", f"must be an integer, got {pos!r}")

    coin = raw.get("coin", "hadamard")
    if isinstance(coin, list):
        if len(coin) != steps:
            raise ConfigError("coin", f"per-step list has {len(coin)} entries, expected {steps}")
        for c in coin:
            _check_coin_entry(c)
    else:
        _check_coin_entry(coin)

    q = raw.get("q", 0.0)
    if isinstance(q, list):
        if len(q) != steps:
            raise ConfigError("q", f"per-step list has {len(q)} entries, expected {steps}")
        for x in q:
            _check_q_entry(x)
        q = [float(x) for x in q]
    else:
        _check_q_entry(q)
        q = float(q)

    absorbers = raw.get("absorbers", [])
    if not isinstance(absorbers, list):
        raise ConfigError("absorbers", "must be a list")
    absorbers = tuple(_parse_absorber(a) for a in absorbers)

    mode = raw.get("mode", "pure")
    if mode not in MODES:
        raise ConfigError("mode", f"must be one of {list(MODES)}, got {mode!r}")
    if mode == "pure" and any(x != 0.0 for x in (q if isinstance(q, list) else [q])):
        raise ConfigError("q", "pure mode requires q = 0 at every step (use density or trajectories)")

    samples = raw.get("samples", 10000)
    if not _is_int(samples) or samples < 1:
        raise ConfigError("samples", f"must be an integer >= 1, got {samples!r}")

    seed = raw.get("seed", 0)
    if not _is_int(seed) or not 0 <= seed < 2**64:
        raise ConfigError("seed", f"must be an unsigned 64-bit integer, got {seed!r}")

    return ExperimentConfig(
        steps=steps,
        version=CONFIG_VERSION,
        initial_coin=init,
        initial_position=pos,
        coin=coin,
        q=q,
        absorbers=absorbers,
        mode=mode,
        samples=samples,
        seed=seed,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from None
    return parse_config(raw)
