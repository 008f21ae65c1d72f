"""Per-miner-class statistics from a simulated chain."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

from .difficulty import BlockRecord
from .strategy import MinerSpec


@dataclass
class ClassStats:
    id: str
    hashrate: float
    relative_hashrate: float
    blocks_won: int
    active_time_s: float
    avg_block_time_s: float | None
    efficiency: float


@dataclass
class AttackEpisode:
    start_height: int
    end_height: int
    mean_difficulty: float


@dataclass
class RunSummary:
    num_blocks: int
    total_time_s: float
    classes: dict[str, ClassStats] = field(default_factory=dict)
    attack_episodes: list[AttackEpisode] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "num_blocks": self.num_blocks,
            "total_time_s": self.total_time_s,
            "classes": {k: asdict(v) for k, v in self.classes.items()},
            "attack_episodes": [asdict(e) for e in self.attack_episodes],
        }


def attack_episodes(records: Sequence[BlockRecord]) -> list[AttackEpisode]:
    """Maximal runs of consecutive attacker-active blocks."""
    episodes = []
    start = None
    for i, r in enumerate(records):
        if r.attacker_active and start is None:
            start = i
        if start is not None and (not r.attacker_active or i == len(records) - 1):
            end = i if r.attacker_active else i - 1
            run = records[start:end + 1]
            episodes.append(AttackEpisode(
                run[0].height, run[-1].height, math.fsum(b.difficulty for b in run) / len(run)))
            start = None
    return episodes


def _was_active(r: BlockRecord, m: MinerSpec) -> bool:
    # hand-built records may carry only the aggregate attacker flag
    return m.id in r.active if r.active else r.attacker_active


def summarize(records: Iterable[BlockRecord], miners: Sequence[MinerSpec],
              worker_hashrate: float | None = None) -> RunSummary:
    """Blocks won, active time, average block time and efficiency per miner class.

    Efficiency is ``1 / (avg_block_time * hashrate / worker_hashrate)``: blocks
    per second of active mining per worker-unit of hashrate.  The worker
    hashrate defaults to the first always-on miner's.
    """
    records = list(records)
    if not records:
        raise ValueError("cannot summarize an empty chain")
    if worker_hashrate is None:
        worker_hashrate = next(m.hashrate for m in miners if m.always_on)

    total_time = math.fsum(r.solve_time for r in records)
    summary = RunSummary(num_blocks=len(records), total_time_s=total_time)
    for m in miners:
        won = sum(1 for r in records if r.winner == m.id)
        if m.always_on:
            active_time = total_time
        else:
            active_time = math.fsum(r.solve_time for r in records if _was_active(r, m))
        rel = m.hashrate / worker_hashrate
        avg = active_time / won if won else None
        eff = 1.0 / (avg * rel) if avg else 0.0
        summary.classes[m.id] = ClassStats(m.id, m.hashrate, rel, won, active_time, avg, eff)
    summary.attack_episodes = attack_episodes(records)
    return summary


def difficulty_series(records: Iterable[BlockRecord]) -> list[tuple[int, float, float, bool]]:
    """(height, difficulty, total hashrate, attacker active) per block, for plotting."""
    return [(r.height, r.difficulty, r.total_hashrate, r.attacker_active) for r in records]
