"""Target/difficulty arithmetic and the difficulty adjustment algorithms.

Difficulties are floats in LZ units (see :mod:`jumpmine.sampler`).  Targets
are Python ints on the 2**224 scale: ``target = 2**224 / (difficulty * 2**40)``.

Retarget functions share one signature, ``f(history, cfg) -> difficulty``,
where ``history`` is the chain so far (oldest first) and the block being
retargeted sits at height ``len(history)``.  Target-space algorithms use exact
integer arithmetic: solve times are converted to fixed-point ticks of
2**-32 s and every division is a floor division performed last.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, Sequence

TARGET_SCALE = 2**224
LZ_INT = 2**40
#: Default target ceiling: difficulty 1 in LZ units.
POW_LIMIT = TARGET_SCALE // LZ_INT
TICKS_PER_SECOND = 2**32


class Algorithm(str, Enum):
    BITCOIN = "bitcoin"
    BCH = "bch"
    DIGISHIELD = "digishield"
    BTG = "btg"
    IMPROVED = "improved"


DEFAULT_WINDOWS = {
    Algorithm.BITCOIN: 2016,
    Algorithm.BCH: 144,
    Algorithm.DIGISHIELD: 17,
    Algorithm.BTG: 45,
    Algorithm.IMPROVED: 45,
}


@dataclass(frozen=True)
class DaaConfig:
    """Parameters for one difficulty adjustment algorithm.

    ``window`` defaults per algorithm (2016, 144, 17, 45, 45).  The clamp and
    DigiShield fields are only read by the algorithm they belong to.
    """

    algorithm: Algorithm
    target_block_time: float = 600.0
    window: int = 0
    adjust: float = 0.998
    pow_limit: int = POW_LIMIT
    bitcoin_clamp: tuple[float, float] = (0.25, 4.0)
    bch_clamp: tuple[float, float] = (0.5, 2.0)
    digishield_damping: int = 4
    digishield_max_up_pct: int = 16
    digishield_max_down_pct: int = 32
    digishield_mtp: int = 11
    # improved DAA guards: (blocks, time limit in units of T, cap numerator, cap denominator)
    surge_guards: tuple[tuple[int, float, int, int], ...] = ((5, 1.5, 1, 4), (10, 5.0, 1, 2), (10, 10.0, 2, 3))
    fall_guard: tuple[int, int] = (13, 10)
    sum_time_floor_div: int = 6

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        if not self.window:
            object.__setattr__(self, "window", DEFAULT_WINDOWS[self.algorithm])
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if not (self.target_block_time > 0 and math.isfinite(self.target_block_time)):
            raise ValueError(f"target_block_time must be positive, got {self.target_block_time}")
        if not 0 < self.adjust <= 1:
            raise ValueError(f"adjust must lie in (0, 1], got {self.adjust}")
        if not 0 < self.pow_limit < 2**256:
            raise ValueError("pow_limit must be a positive 256-bit integer")
        if self.digishield_damping < 1:
            raise ValueError("digishield_damping must be >= 1")
        if not 0 <= self.digishield_max_up_pct < 100:
            raise ValueError("digishield_max_up_pct must lie in [0, 100)")
        if self.digishield_max_down_pct < 0:
            raise ValueError("digishield_max_down_pct must be >= 0")
        if self.algorithm is Algorithm.IMPROVED:
            longest = max((g[0] for g in self.surge_guards), default=1)
            if self.window < longest:
                raise ValueError(f"improved DAA window must cover its longest guard ({longest} blocks)")
        for name in ("bitcoin_clamp", "bch_clamp"):
            lo, hi = getattr(self, name)
            if not 0 < lo <= 1 <= hi:
                raise ValueError(f"{name} must satisfy 0 < lo <= 1 <= hi, got {(lo, hi)}")


@lru_cache(maxsize=4096)
def target_from_difficulty(difficulty: float, unit: int = LZ_INT) -> int:
    """``floor(2**224 / (difficulty * unit))``; pass ``unit=1`` for absolute difficulty."""
    if not (difficulty > 0 and math.isfinite(difficulty)):
        raise ValueError(f"difficulty must be positive and finite, got {difficulty}")
    num, den = float(difficulty).as_integer_ratio()
    target = (TARGET_SCALE * den) // (num * unit)
    if target == 0:
        raise ValueError(f"difficulty {difficulty} is too large: target would be 0")
    return target


def difficulty_from_target(target: int, unit: int = LZ_INT) -> float:
    if target <= 0:
        raise ValueError(f"target must be positive, got {target}")
    return TARGET_SCALE / (target * unit)


@dataclass(frozen=True, slots=True)
class BlockRecord:
    """One mined block.  ``ticks`` and ``target`` are derived once on creation."""

    height: int
    difficulty: float
    solve_time: float
    winner: str
    attacker_active: bool
    total_hashrate: float
    active: tuple[str, ...] = ()
    ticks: int = field(init=False, repr=False, compare=False)
    target: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "ticks", ticks(self.solve_time))
        object.__setattr__(self, "target", target_from_difficulty(self.difficulty))


def min_difficulty(cfg: DaaConfig) -> float:
    return difficulty_from_target(cfg.pow_limit)


def ticks(seconds: float) -> int:
    return round(seconds * TICKS_PER_SECOND)


def _finish(next_target: int, cfg: DaaConfig) -> float:
    return difficulty_from_target(max(1, min(next_target, cfg.pow_limit)))


def _require(history: Sequence[BlockRecord]) -> None:
    if not history:
        raise ValueError("difficulty adjustment needs at least one block of history")


def next_difficulty_bitcoin(history: Sequence[BlockRecord], cfg: DaaConfig) -> float:
    _require(history)
    height = len(history)
    prev = history[-1].difficulty
    if height % cfg.window:
        return prev
    window = history[-cfg.window:]
    if len(window) < cfg.window:
        raise ValueError(f"retarget at height {height} needs {cfg.window} blocks, have {len(window)}")
    actual = math.fsum(r.solve_time for r in window)
    lo, hi = cfg.bitcoin_clamp
    ratio = min(max(cfg.window * cfg.target_block_time / actual, lo), hi)
    return max(prev * ratio, min_difficulty(cfg))


def next_difficulty_bch(history: Sequence[BlockRecord], cfg: DaaConfig) -> float:
    """Window work over window timespan, step-clamped against the previous block.

    ``mean(d) * n * T / sum(solve_time)``; with a constant-difficulty window
    this is ``prev * n*T / sum``.  Multiplying ``prev`` by the window ratio
    every block instead would re-apply the same error ``n`` times and does
    not converge.
    """
    _require(history)
    window = history[-cfg.window:]
    n = len(window)
    actual = math.fsum(r.solve_time for r in window)
    raw = math.fsum(r.difficulty for r in window) * cfg.target_block_time / actual
    prev = history[-1].difficulty
    lo, hi = cfg.bch_clamp
    return max(min(max(raw, prev * lo), prev * hi), min_difficulty(cfg))


def _median(values: list[int]) -> int:
    ordered = sorted(values)
    return ordered[len(ordered) // 2]


def _mtp_timespan(history: Sequence[BlockRecord], n: int, mtp: int) -> int:
    """Ticks between the median-time-past of the tip and of the block ``n`` back.

    Timestamps are cumulative solve times; the chain starts at time 0.
    """
    segment = history[-(n + mtp):]
    stamps = [0]
    for r in segment:
        stamps.append(stamps[-1] + r.ticks)
    # stamps[0] is the time before segment[0]; only treat it as a block time at genesis
    first = 0 if len(segment) == len(history) else 1

    def mtp_at(j: int) -> int:
        return _median(stamps[max(first, j - mtp + 1): j + 1])

    last = len(stamps) - 1
    return mtp_at(last) - mtp_at(max(first, last - n))


def next_difficulty_digishield(history: Sequence[BlockRecord], cfg: DaaConfig) -> float:
    """Mean window target scaled by a damped, clamped timespan ratio.

    With ``digishield_mtp > 1`` the timespan is measured between
    median-time-past values, as deployed Zcash does, which lags the window
    by about half the median span.
    """
    _require(history)
    window = history[-cfg.window:]
    n = len(window)
    avg_target = sum(r.target for r in window) // n
    expected = n * ticks(cfg.target_block_time)
    if cfg.digishield_mtp > 1:
        actual = _mtp_timespan(history, n, cfg.digishield_mtp)
    else:
        actual = sum(r.ticks for r in window)
    k = cfg.digishield_damping
    # k * damped timespan, where damped = expected + (actual - expected) / k
    damped_k = (k - 1) * expected + actual
    scaled = damped_k * 100
    lo = k * expected * (100 - cfg.digishield_max_up_pct)
    hi = k * expected * (100 + cfg.digishield_max_down_pct)
    scaled = min(max(scaled, lo), hi)
    return _finish(avg_target * scaled // (k * expected * 100), cfg)


def next_difficulty_btg_weighted(history: Sequence[BlockRecord], cfg: DaaConfig) -> float:
    """Linearly weighted mean solve time (newest weighted ``n``) times mean target."""
    _require(history)
    window = history[-cfg.window:]
    n = len(window)
    weighted = sum(i * r.ticks for i, r in enumerate(window, start=1))
    sum_target = sum(r.target for r in window)
    a_num, a_den = float(cfg.adjust).as_integer_ratio()
    t = ticks(cfg.target_block_time)
    return _finish((2 * weighted * sum_target * a_den) // (n * n * (n + 1) * t * a_num), cfg)


def next_target_improved(history: Sequence[BlockRecord], cfg: DaaConfig) -> int:
    _require(history)
    n = cfg.window
    window = list(history[-n:])
    if len(window) < n:
        window = [window[0]] * (n - len(window)) + window
    times = [r.ticks for r in window]
    targets = [r.target for r in window]
    t = ticks(cfg.target_block_time)

    # sum_time is carried scaled by the floor divisor so the floor guard stays exact
    f = cfg.sum_time_floor_div
    sum_time6 = f * sum(i * st for i, st in enumerate(times, start=1))
    sum_time6 = max(sum_time6, n * n * t)
    sum_target = sum(targets)
    a_num, a_den = float(cfg.adjust).as_integer_ratio()
    next_target = (2 * sum_time6 * sum_target * a_num) // (f * n * (n + 1) * n * t * a_den)

    # first guard whose time window is fast enough caps the target; later ones are skipped
    for blocks, limit, cap_num, cap_den in cfg.surge_guards:
        l_num, l_den = float(limit).as_integer_ratio()
        if sum(times[-blocks:]) * l_den <= l_num * t:
            avg_target = sum(targets[-blocks:]) // blocks
            next_target = min(next_target, avg_target * cap_num // cap_den)
            break

    fall_num, fall_den = cfg.fall_guard
    next_target = min(next_target, targets[-1] * fall_num // fall_den)
    return max(1, min(next_target, cfg.pow_limit))


def next_difficulty_improved(history: Sequence[BlockRecord], cfg: DaaConfig) -> float:
    return difficulty_from_target(next_target_improved(history, cfg))


RETARGET: dict[Algorithm, Callable[[Sequence[BlockRecord], DaaConfig], float]] = {
    Algorithm.BITCOIN: next_difficulty_bitcoin,
    Algorithm.BCH: next_difficulty_bch,
    Algorithm.DIGISHIELD: next_difficulty_digishield,
    Algorithm.BTG: next_difficulty_btg_weighted,
    Algorithm.IMPROVED: next_difficulty_improved,
}


def next_difficulty(history: Sequence[BlockRecord], cfg: DaaConfig) -> float:
    return RETARGET[cfg.algorithm](history, cfg)
