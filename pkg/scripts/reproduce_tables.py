#!/usr/bin/env python3
"""Average block time and mining efficiency per miner class under the jumping attack.

Runs every DAA at 1x and 3x attacker hashrate over several seeds and prints
one row per (DAA, multiple, class) with mean +- sd across seeds, plus the
attacker/honest efficiency ratio.  Bitcoin uses the epoch jumper, the others
the threshold jumper.

    python3 scripts/reproduce_tables.py --seeds 10 --blocks 100000 --jobs 4
"""
import argparse
import statistics

from _common import mean_sd, run_all
from jumpmine.difficulty import Algorithm, DaaConfig
from jumpmine.engine import SimConfig, standard_miners


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--blocks", type=int, default=100_000)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--daa", nargs="*", default=[a.value for a in Algorithm])
    args = ap.parse_args()

    print(f"{'daa':<11}{'mult':>5}  {'class':<9}{'avg block time (s)':>24}{'efficiency':>26}")
    for daa in args.daa:
        attacker = "epoch" if daa == "bitcoin" else "threshold"
        for mult in (1.0, 3.0):
            configs = [SimConfig(DaaConfig(daa), standard_miners(attacker, mult), args.blocks, seed=s)
                       for s in range(1, args.seeds + 1)]
            results = run_all(configs, args.jobs)
            for cls in ("attacker", "honest"):
                avgs = [r[cls][0] for r in results]
                effs = [r[cls][1] for r in results]
                print(f"{daa:<11}{mult:>5g}  {cls:<9}{mean_sd(avgs):>24}{mean_sd(effs):>26}")
            ratio = statistics.fmean(r["attacker"][1] for r in results) / statistics.fmean(r["honest"][1] for r in results)
            ahead = sum(r["attacker"][1] > r["honest"][1] for r in results)
            print(f"{'':<16}attacker/honest efficiency {ratio:.3f}, attacker ahead in {ahead}/{len(results)} seeds")


if __name__ == "__main__":
    main()
