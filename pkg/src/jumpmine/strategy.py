"""Per-block participation rules for miner classes."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class AlwaysOn:
    pass


@dataclass(frozen=True)
class ThresholdJumper:
    """Join when difficulty drops below ``attack_in * base``, leave above ``attack_out * base``."""

    attack_in: float = 0.95
    attack_out: float = 1.45
    base_difficulty: float = 4.0

    def __post_init__(self):
        if not self.attack_in < self.attack_out:
            raise ValueError(f"attack_in ({self.attack_in}) must be below attack_out ({self.attack_out})")
        if not self.base_difficulty > 0:
            raise ValueError("base_difficulty must be positive")


@dataclass(frozen=True)
class EpochJumper:
    """Toggle participation at every multiple of ``period`` blocks."""

    period: int = 2016

    def __post_init__(self):
        if self.period < 1:
            raise ValueError(f"period must be >= 1, got {self.period}")


Strategy = Union[AlwaysOn, ThresholdJumper, EpochJumper]


@dataclass(frozen=True)
class MinerSpec:
    id: str
    hashrate: float
    strategy: Strategy = AlwaysOn()

    def __post_init__(self):
        if not (self.hashrate > 0 and math.isfinite(self.hashrate)):
            raise ValueError(f"miner {self.id!r}: hashrate must be positive and finite")

    @property
    def always_on(self) -> bool:
        return isinstance(self.strategy, AlwaysOn)


def initial_participation(spec: MinerSpec) -> bool:
    """State before the first block: only always-on miners start active."""
    return spec.always_on


def decide_participation(spec: MinerSpec, active: bool, next_height: int, prev_difficulty: float) -> bool:
    """Whether ``spec`` mines block ``next_height``, given its current state.

    ``prev_difficulty`` is the difficulty of block ``next_height - 1``.
    Threshold comparisons are strict, so a difficulty exactly on a threshold
    keeps the current state.
    """
    s = spec.strategy
    if isinstance(s, AlwaysOn):
        return True
    if isinstance(s, ThresholdJumper):
        if not active and prev_difficulty < s.attack_in * s.base_difficulty:
            return True
        if active and prev_difficulty > s.attack_out * s.base_difficulty:
            return False
        return active
    if isinstance(s, EpochJumper):
        return not active if next_height % s.period == 0 else active
    raise TypeError(f"unknown strategy {s!r}")
