"""Shared helpers for the experiment scripts."""
from __future__ import annotations

import statistics
from concurrent.futures import ProcessPoolExecutor

from jumpmine.engine import SimConfig, run
from jumpmine.metrics import summarize


def summarize_run(cfg: SimConfig) -> dict:
    s = summarize(run(cfg).records, cfg.miners)
    return {k: (c.avg_block_time_s, c.efficiency) for k, c in s.classes.items()}


def run_all(configs, jobs: int = 1) -> list[dict]:
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(summarize_run, configs))
    return [summarize_run(c) for c in configs]


def mean_sd(xs) -> str:
    xs = [x for x in xs if x is not None]
    if not xs:
        return "n/a"
    sd = statistics.stdev(xs) if len(xs) > 1 else 0.0
    return f"{statistics.fmean(xs):.6g} +- {sd:.2g}"
