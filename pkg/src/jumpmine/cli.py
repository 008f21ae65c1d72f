"""Command-line front end: ``jumpmine simulate | sweep | analyze``.

Exit codes: 0 success, 1 a sweep run failed, 2 usage or config error,
3 I/O error.

Output files (column names are fixed):

simulate
    ``series.csv``   height,difficulty,solve_time,total_hashrate,attacker_active,winner
    ``summary.json`` scenario, seed, config echo and per-class statistics
    ``plot/difficulty.csv``, ``plot/hashrate.csv``, ``plot/attack.csv``
                     two-column (height, value) series, one file per curve
    ``headers.csv``  with ``--emit-headers``: height,time,difficulty
    ``plot.svg``     with ``--svg``
sweep
    ``comparison.csv`` scenario,seed,class,blocks_won,avg_block_time,efficiency
    ``rollup.csv``     scenario,class,runs,mean/std of avg_block_time and efficiency
    ``runs/<scenario>/seed<k>/summary.json``
analyze
    ``solve_times.csv`` height,solve_time,negative
    ``regions.csv``     start_height,end_height,mean_solve_time,mean_relative_difficulty
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import chaindata
from .config import ConfigError, Scenario, bundled_scenarios, load_manifest, load_scenario
from .engine import ChainState, run
from .metrics import difficulty_series, summarize

EXIT_OK, EXIT_RUN_FAILED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

SERIES_COLUMNS = ["height", "difficulty", "solve_time", "total_hashrate", "attacker_active", "winner"]


class _Usage(Exception):
    pass


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def series_csv(chain: ChainState) -> str:
    return _csv(([r.height, repr(r.difficulty), repr(r.solve_time), repr(r.total_hashrate),
                  int(r.attacker_active), r.winner] for r in chain), SERIES_COLUMNS)


def read_series_truth(path: Path) -> dict[int, bool]:
    with open(path, newline="") as fh:
        return {int(row["height"]): row["attacker_active"] == "1" for row in csv.DictReader(fh)}


def svg_chart(chain: ChainState, width: int = 900, height: int = 300, max_points: int = 2000) -> str:
    """Difficulty and hashrate polylines with attack periods shaded."""
    recs = chain.records
    step = max(1, len(recs) // max_points)
    pts = recs[::step]
    n = max(1, len(recs) - 1)

    def line(values, color):
        top = max(values) or 1.0
        coords = " ".join(f"{p.height * width / n:.1f},{height - v / top * (height - 10):.1f}"
                          for p, v in zip(pts, values))
        return f'<polyline fill="none" stroke="{color}" stroke-width="1" points="{coords}"/>'

    shades = []
    for r in pts:
        if r.attacker_active:
            shades.append(f'<rect x="{r.height * width / n:.1f}" y="0" width="{max(1.0, step * width / n):.1f}" '
                          f'height="{height}" fill="orange" opacity="0.25"/>')
    body = "".join(shades) + line([p.difficulty for p in pts], "blue") + line([p.total_hashrate for p in pts], "green")
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">{body}</svg>\n')


def _summary_doc(sc: Scenario, chain: ChainState) -> dict:
    summary = summarize(chain.records, sc.sim.miners)
    daa = sc.sim.daa
    return {
        "scenario": sc.name,
        "seed": sc.sim.seed,
        "config": {
            "daa": daa.algorithm.value,
            "target_block_time": daa.target_block_time,
            "window": daa.window,
            "adjust": daa.adjust,
            "num_blocks": sc.sim.num_blocks,
            "base_difficulty": sc.base_difficulty,
            "genesis_difficulty": sc.sim.genesis_difficulty,
            "attacker": sc.attacker,
            "attacker_multiple": sc.attacker_multiple,
            "miners": [{"id": m.id, "hashrate": m.hashrate, "strategy": type(m.strategy).__name__}
                       for m in sc.sim.miners],
        },
        "summary": summary.to_dict(),
    }


def write_simulation(sc: Scenario, chain: ChainState, out: Path, emit_headers: bool = False,
                     svg: bool = False) -> dict:
    doc = _summary_doc(sc, chain)
    _write(out / "series.csv", series_csv(chain))
    _write(out / "summary.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    series = difficulty_series(chain.records)
    _write(out / "plot" / "difficulty.csv", _csv(((h, repr(d)) for h, d, _, _ in series), ["height", "difficulty"]))
    _write(out / "plot" / "hashrate.csv", _csv(((h, repr(hr)) for h, _, hr, _ in series), ["height", "total_hashrate"]))
    _write(out / "plot" / "attack.csv", _csv(((h, int(a)) for h, _, _, a in series), ["height", "attacker_active"]))
    if emit_headers:
        _write(out / "headers.csv", chaindata.emit_headers(chaindata.chain_to_headers(chain.records)))
    if svg:
        _write(out / "plot.svg", svg_chart(chain))
    return doc


def _overrides(args) -> dict[str, str]:
    ov = {}
    for item in args.set or []:
        if "=" not in item:
            raise _Usage(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        ov[k.strip()] = v
    if args.seed is not None:
        ov["seed"] = str(args.seed)
    if args.num_blocks is not None:
        ov["num_blocks"] = str(args.num_blocks)
    return ov


def cmd_simulate(args) -> int:
    sc = load_scenario(args.config, _overrides(args))
    chain = run(sc.sim)
    doc = write_simulation(sc, chain, Path(args.out), args.emit_headers, args.svg)
    for cid, st in doc["summary"]["classes"].items():
        avg = st["avg_block_time_s"]
        avg_txt = "n/a" if avg is None else f"{avg:.1f}s"
        print(f"{sc.name} seed={sc.sim.seed} {cid}: blocks={st['blocks_won']} avg={avg_txt} "
              f"efficiency={st['efficiency']:.6f}")
    return EXIT_OK


def _sweep_one(job):
    sc, seed, out = job
    sc = replace(sc, sim=replace(sc.sim, seed=seed))
    chain = run(sc.sim)
    summary = summarize(chain.records, sc.sim.miners)
    run_dir = out / "runs" / sc.name / f"seed{seed}"
    _write(run_dir / "summary.json", json.dumps(_summary_doc(sc, chain), indent=2, sort_keys=True) + "\n")
    return [(sc.name, seed, c.id, c.blocks_won, c.avg_block_time_s, c.efficiency)
            for c in summary.classes.values()]


def _fmt(x):
    return "" if x is None else repr(x)


def cmd_sweep(args) -> int:
    manifest = load_manifest(Path(args.manifest))
    out = Path(args.out)
    jobs = [(sc, seed, out) for sc in manifest.scenarios for seed in manifest.seeds]
    results = []
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_sweep_one, j) for j in jobs]
            for job, fut in zip(jobs, futures):
                try:
                    results.append(fut.result())
                except Exception as e:  # noqa: BLE001 - reported with the run name
                    print(f"run {job[0].name} seed={job[1]} failed: {e}", file=sys.stderr)
                    pool.shutdown(cancel_futures=True)
                    return EXIT_RUN_FAILED
    else:
        for job in jobs:
            try:
                results.append(_sweep_one(job))
            except OSError:
                raise
            except Exception as e:  # noqa: BLE001
                print(f"run {job[0].name} seed={job[1]} failed: {e}", file=sys.stderr)
                return EXIT_RUN_FAILED

    rows = [row for res in results for row in res]
    _write(out / "comparison.csv", _csv(
        ([s, seed, c, won, _fmt(avg), repr(eff)] for s, seed, c, won, avg, eff in rows),
        ["scenario", "seed", "class", "blocks_won", "avg_block_time", "efficiency"]))

    groups: dict[tuple[str, str], list] = {}
    for s, _, c, _, avg, eff in rows:
        groups.setdefault((s, c), []).append((avg, eff))
    rollup = []
    for (s, c), vals in groups.items():
        avgs = [a for a, _ in vals if a is not None]
        effs = [e for _, e in vals]
        rollup.append([s, c, len(vals),
                       _fmt(statistics.fmean(avgs) if avgs else None),
                       _fmt(statistics.stdev(avgs) if len(avgs) > 1 else 0.0 if avgs else None),
                       repr(statistics.fmean(effs)),
                       repr(statistics.stdev(effs) if len(effs) > 1 else 0.0)])
        print(f"{s} {c}: efficiency {statistics.fmean(effs):.6f} over {len(vals)} runs")
    _write(out / "rollup.csv", _csv(rollup, ["scenario", "class", "runs", "mean_avg_block_time",
                                             "std_avg_block_time", "mean_efficiency", "std_efficiency"]))
    return EXIT_OK


def cmd_analyze(args) -> int:
    try:
        with open(args.data, "rb") as fh:
            raw = fh.read()
    except OSError as e:
        print(f"cannot read {args.data}: {e.strerror}", file=sys.stderr)
        return EXIT_IO
    try:
        rows = chaindata.parse_headers(raw, args.format)
    except chaindata.HeaderFormatError as e:
        print(f"{args.data}: {e}", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out)
    sts = chaindata.solve_times(rows) if len(rows) >= 2 else []
    _write(out / "solve_times.csv", _csv(([s.height, repr(s.solve_time), int(s.negative)] for s in sts),
                                         ["height", "solve_time", "negative"]))
    try:
        regions = chaindata.detect_attack_regions(rows, args.window, args.low_frac, args.burst_frac, args.burst_span)
    except ValueError as e:
        raise _Usage(str(e)) from None
    _write(out / "regions.csv", chaindata.emit_regions(regions))
    print(f"{len(regions)} attack regions")
    if args.truth:
        precision, recall = chaindata.region_overlap_scores(regions, read_series_truth(Path(args.truth)))
        print(f"precision={precision:.3f} recall={recall:.3f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jumpmine", description="Jumping-mining simulator and chain analyzer")
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario")
    sim.add_argument("--config", default="btg_equal",
                     help=f"scenario file or bundled name ({', '.join(bundled_scenarios())})")
    sim.add_argument("--out", required=True)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--num-blocks", type=int)
    sim.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any scenario key")
    sim.add_argument("--emit-headers", action="store_true", help="also write headers.csv for analyze")
    sim.add_argument("--svg", action="store_true", help="also write plot.svg")
    sim.set_defaults(func=cmd_simulate)

    sw = sub.add_parser("sweep", help="run every scenario x seed of a manifest")
    sw.add_argument("--config", "--manifest", dest="manifest", required=True)
    sw.add_argument("--out", required=True)
    sw.add_argument("--jobs", type=int, default=1)
    sw.set_defaults(func=cmd_sweep)

    an = sub.add_parser("analyze", help="detect attack regions in a header export")
    an.add_argument("data")
    an.add_argument("--format", choices=chaindata.FORMATS, default="csv")
    an.add_argument("--out", required=True)
    an.add_argument("--window", type=int, default=144)
    an.add_argument("--low-frac", type=float, default=0.95)
    an.add_argument("--burst-frac", type=float, default=0.5)
    an.add_argument("--burst-span", type=int, default=6)
    an.add_argument("--truth", help="series.csv from simulate, to score the regions")
    an.set_defaults(func=cmd_analyze)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, _Usage) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
