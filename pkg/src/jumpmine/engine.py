"""Block-by-block simulation loop.

For every height: update each miner's participation from the previous
block's difficulty, sum the active hashrate, retarget, sample the solve time,
pick the winner, append the record.  Height 0 is mined at the genesis
difficulty and never calls the retarget function.

Two independent streams are derived from the seed: substream 0 feeds solve
times, substream 1 feeds winner selection, so the solve-time sequence does
not depend on how many miners compete.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from itertools import accumulate
from typing import Callable, Sequence

from .difficulty import BlockRecord, DaaConfig, next_difficulty
from .sampler import LZ, RngStream, get_solve_time
from .strategy import (
    AlwaysOn,
    EpochJumper,
    MinerSpec,
    ThresholdJumper,
    decide_participation,
    initial_participation,
)


def worker_hashrate(base_difficulty: float = 4.0, target_block_time: float = 600.0) -> float:
    """Hashrate that finds blocks every ``target_block_time`` seconds at ``base_difficulty``."""
    return base_difficulty * LZ / target_block_time


@dataclass(frozen=True)
class SimConfig:
    daa: DaaConfig
    miners: tuple[MinerSpec, ...]
    num_blocks: int
    seed: int = 0
    genesis_difficulty: float = 4.0

    def __post_init__(self):
        object.__setattr__(self, "miners", tuple(self.miners))
        if self.num_blocks < 1:
            raise ValueError(f"num_blocks must be >= 1, got {self.num_blocks}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not self.genesis_difficulty > 0:
            raise ValueError("genesis_difficulty must be positive")
        if not any(m.always_on for m in self.miners):
            raise ValueError("at least one always-on miner is required")
        ids = [m.id for m in self.miners]
        if len(set(ids)) != len(ids):
            raise ValueError(f"miner ids must be unique, got {ids}")


@dataclass
class ChainState:
    records: list[BlockRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def total_time(self) -> float:
        return sum(r.solve_time for r in self.records)


def _simulate(config: SimConfig, next_rand: Callable[[], float]) -> ChainState:
    miners = config.miners
    winner_rng = RngStream(config.seed, substream=1)
    states = [initial_participation(m) for m in miners]
    records: list[BlockRecord] = []
    prev_difficulty = config.genesis_difficulty

    for height in range(config.num_blocks):
        if height > 0:
            states = [decide_participation(m, s, height, prev_difficulty) for m, s in zip(miners, states)]
        active = [m for m, s in zip(miners, states) if s]
        total = sum(m.hashrate for m in active)
        if total <= 0:
            raise RuntimeError(f"no active hashrate at height {height}")

        difficulty = next_difficulty(records, config.daa) if records else config.genesis_difficulty
        solve_time = get_solve_time(total, next_rand(), difficulty)

        cum = list(accumulate(m.hashrate for m in active))
        pick = bisect.bisect_right(cum, winner_rng.random() * cum[-1])
        winner = active[min(pick, len(active) - 1)]

        records.append(BlockRecord(
            height=height,
            difficulty=difficulty,
            solve_time=solve_time,
            winner=winner.id,
            attacker_active=any(not m.always_on for m in active),
            total_hashrate=total,
            active=tuple(m.id for m in active),
        ))
        prev_difficulty = difficulty
    return ChainState(records)


def run(config: SimConfig) -> ChainState:
    rng = RngStream(config.seed)
    return _simulate(config, rng.random)


def replay_rand_sequence(config: SimConfig, rands: Sequence[float]) -> ChainState:
    """Run with caller-supplied uniform draws for the solve times."""
    if len(rands) != config.num_blocks:
        raise ValueError(f"expected {config.num_blocks} rands, got {len(rands)}")
    it = iter(rands)
    return _simulate(config, lambda: next(it))


def standard_miners(
    attacker: str = "threshold",
    multiple: float = 1.0,
    base_difficulty: float = 4.0,
    target_block_time: float = 600.0,
    attack_in: float = 0.95,
    attack_out: float = 1.45,
    period: int = 2016,
) -> tuple[MinerSpec, ...]:
    """One honest miner at the worker hashrate plus an optional jumper at ``multiple`` times it."""
    hr = worker_hashrate(base_difficulty, target_block_time)
    miners = [MinerSpec("honest", hr, AlwaysOn())]
    if attacker == "threshold":
        miners.append(MinerSpec("attacker", hr * multiple, ThresholdJumper(attack_in, attack_out, base_difficulty)))
    elif attacker == "epoch":
        miners.append(MinerSpec("attacker", hr * multiple, EpochJumper(period)))
    elif attacker != "none":
        raise ValueError(f"unknown attacker kind {attacker!r}")
    return tuple(miners)

