#!/usr/bin/env python3
"""Attacker/honest efficiency under the improved DAA with subsets of its guards.

Shows which of the surge guards and the fall guard help or hurt the jumping
attacker, and the honest-only mean solve time for each variant.
"""
import argparse
import statistics

from _common import run_all
from jumpmine.difficulty import Algorithm, DaaConfig
from jumpmine.engine import SimConfig, standard_miners

LAST5, LAST10_HALF, LAST10_TWO_THIRDS = (5, 1.5, 1, 4), (10, 5.0, 1, 2), (10, 10.0, 2, 3)

VARIANTS = {
    "all guards": dict(),
    "no surge guards": dict(surge_guards=()),
    "1.5T and 5T only": dict(surge_guards=(LAST5, LAST10_HALF)),
    "10T guard with < not <=": dict(surge_guards=(LAST5, LAST10_HALF, (10, 9.999, 2, 3))),
    "no fall guard": dict(fall_guard=(10**6, 1)),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--blocks", type=int, default=50_000)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--multiple", type=float, default=1.0)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    for name, kw in VARIANTS.items():
        daa = DaaConfig(Algorithm.IMPROVED, **kw)
        attacked = run_all([SimConfig(daa, standard_miners("threshold", args.multiple), args.blocks, seed=s)
                            for s in range(1, args.seeds + 1)], args.jobs)
        honest = run_all([SimConfig(daa, standard_miners("none"), args.blocks, seed=s)
                          for s in range(1, args.seeds + 1)], args.jobs)
        ratio = (statistics.fmean(r["attacker"][1] for r in attacked)
                 / statistics.fmean(r["honest"][1] for r in attacked))
        alone = statistics.fmean(r["honest"][0] for r in honest)
        print(f"{name:<26} attacker/honest {ratio:.3f}   honest-only mean solve time {alone:.1f}s")


if __name__ == "__main__":
    main()
