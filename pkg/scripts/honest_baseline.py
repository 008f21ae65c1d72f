#!/usr/bin/env python3
"""Mean solve time of a lone always-on miner under each DAA."""
import argparse
import statistics

from jumpmine.difficulty import Algorithm, DaaConfig
from jumpmine.engine import SimConfig, standard_miners, run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--blocks", type=int, default=100_000)
    ap.add_argument("--seeds", type=int, default=3)
    args = ap.parse_args()
    for alg in Algorithm:
        cfg = DaaConfig(alg)
        means = []
        for seed in range(1, args.seeds + 1):
            chain = run(SimConfig(cfg, standard_miners("none"), args.blocks, seed=seed))
            means.append(chain.total_time / args.blocks)
        goal = cfg.target_block_time / cfg.adjust
        m = statistics.fmean(means)
        print(f"{alg.value:<11} mean solve time {m:8.1f}s  (T/adjust {goal:.1f}s, off by {100 * (m / goal - 1):+.1f}%)")


if __name__ == "__main__":
    main()
