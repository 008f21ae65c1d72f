"""Block-header exports: parsing, solve times, and jumping-attack region detection."""
from __future__ import annotations

import csv
import io
import json
import math
import statistics
from dataclasses import dataclass
from typing import IO, Iterable, NamedTuple, Sequence

from .difficulty import BlockRecord, difficulty_from_target

FORMATS = ("csv", "json_lines")


class HeaderFormatError(ValueError):
    """Malformed header export; ``line`` is 1-based."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def bits_to_target(bits: int) -> int:
    """Decode compact ``nBits``: ``mantissa * 256**(exponent - 3)``."""
    if not 0 <= bits < 2**32:
        raise ValueError(f"compact bits must fit in 32 bits, got {bits:#x}")
    exponent = bits >> 24
    mantissa = bits & 0x007FFFFF
    if bits & 0x00800000:
        raise ValueError(f"compact bits {bits:#010x} encode a negative target")
    if exponent <= 3:
        return mantissa >> (8 * (3 - exponent))
    return mantissa * 256 ** (exponent - 3)


def target_to_bits(target: int) -> int:
    if target <= 0:
        raise ValueError("target must be positive")
    size = (target.bit_length() + 7) // 8
    if size <= 3:
        mantissa = target << (8 * (3 - size))
    else:
        mantissa = target >> (8 * (size - 3))
    if mantissa & 0x00800000:
        mantissa >>= 8
        size += 1
    return (size << 24) | mantissa


@dataclass(frozen=True)
class HeaderRow:
    height: int
    timestamp: int | float
    difficulty: float | None = None
    bits: int | None = None

    def __post_init__(self):
        if (self.difficulty is None) == (self.bits is None):
            raise ValueError(f"height {self.height}: exactly one of difficulty or bits is required")

    @property
    def target(self) -> int | None:
        return bits_to_target(self.bits) if self.bits is not None else None

    @property
    def work(self) -> float:
        """Difficulty as given, or ``2**224 / target`` for compact-bits rows."""
        if self.difficulty is not None:
            return self.difficulty
        return difficulty_from_target(self.target, unit=1)


class SolveTime(NamedTuple):
    height: int
    solve_time: float
    negative: bool


@dataclass(frozen=True)
class AttackRegion:
    start_height: int
    end_height: int
    mean_solve_time_s: float
    mean_relative_difficulty: float


def _number(text: str) -> int | float:
    try:
        return int(text)
    except ValueError:
        return float(text)


def _row(line: int, fields: dict) -> HeaderRow:
    try:
        height = int(fields["height"])
        timestamp = _number(str(fields["time"]).strip())
    except KeyError as e:
        raise HeaderFormatError(line, f"missing column {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        raise HeaderFormatError(line, f"unparseable value: {e}") from None
    diff = fields.get("difficulty")
    bits = fields.get("bits")
    diff = None if diff in (None, "") else diff
    bits = None if bits in (None, "") else bits
    if (diff is None) == (bits is None):
        raise HeaderFormatError(line, "exactly one of 'difficulty' or 'bits' is required")
    try:
        if diff is not None:
            d = float(diff)
            if not (d > 0 and math.isfinite(d)):
                raise ValueError(f"difficulty must be positive, got {diff!r}")
            return HeaderRow(height, timestamp, difficulty=d)
        b = bits if isinstance(bits, int) else int(str(bits), 16)
        bits_to_target(b)
        return HeaderRow(height, timestamp, bits=b)
    except (TypeError, ValueError) as e:
        raise HeaderFormatError(line, str(e)) from None


def parse_headers(stream: IO | str | bytes, fmt: str = "csv") -> list[HeaderRow]:
    """Parse a header export and return rows sorted by height.

    CSV needs a header line with ``height,time`` and ``difficulty`` and/or
    ``bits`` (hex, ``0x`` prefix).  JSON lines use the same keys.
    """
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    text = stream if isinstance(stream, (str, bytes)) else stream.read()
    if isinstance(text, bytes):
        text = text.decode("utf-8")

    rows: list[tuple[int, HeaderRow]] = []
    if fmt == "csv":
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames is not None:
            missing = {"height", "time"} - set(reader.fieldnames)
            if missing or not {"difficulty", "bits"} & set(reader.fieldnames):
                raise HeaderFormatError(1, f"header must name height, time and difficulty or bits; got {reader.fieldnames}")
        for fields in reader:
            line = reader.line_num
            if None in fields or any(v is None for v in fields.values()):
                raise HeaderFormatError(line, "wrong number of fields")
            rows.append((line, _row(line, fields)))
    else:
        for line, raw in enumerate(text.splitlines(), start=1):
            if not raw.strip():
                continue
            try:
                fields = json.loads(raw)
            except json.JSONDecodeError as e:
                raise HeaderFormatError(line, f"invalid JSON: {e.msg}") from None
            if not isinstance(fields, dict):
                raise HeaderFormatError(line, "expected a JSON object")
            rows.append((line, _row(line, fields)))

    rows.sort(key=lambda lr: lr[1].height)
    for (_, a), (line, b) in zip(rows, rows[1:]):
        if a.height == b.height:
            raise HeaderFormatError(line, f"duplicate height {b.height}")
    return [r for _, r in rows]


def emit_headers(rows: Iterable[HeaderRow], fmt: str = "csv") -> str:
    rows = list(rows)
    if fmt == "json_lines":
        out = []
        for r in rows:
            obj: dict = {"height": r.height, "time": r.timestamp}
            if r.bits is not None:
                obj["bits"] = f"0x{r.bits:08x}"
            else:
                obj["difficulty"] = r.difficulty
            out.append(json.dumps(obj))
        return "".join(line + "\n" for line in out)
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    cols = ["height", "time"]
    if any(r.difficulty is not None for r in rows) or not rows:
        cols.append("difficulty")
    if any(r.bits is not None for r in rows):
        cols.append("bits")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        rec = {"height": r.height, "time": repr(r.timestamp),
               "difficulty": "" if r.difficulty is None else repr(r.difficulty),
               "bits": "" if r.bits is None else f"0x{r.bits:08x}"}
        w.writerow([rec[c] for c in cols])
    return buf.getvalue()


def chain_to_headers(records: Iterable[BlockRecord], start_time: float = 0.0) -> list[HeaderRow]:
    """Synthetic export of a simulated chain; each timestamp is the cumulative solve time."""
    rows = []
    t = start_time
    for r in records:
        t += r.solve_time
        rows.append(HeaderRow(r.height, t, difficulty=r.difficulty))
    return rows


def solve_times(rows: Sequence[HeaderRow]) -> list[SolveTime]:
    """Timestamp differences between consecutive heights; negatives kept and flagged."""
    if len(rows) < 2:
        raise ValueError("need at least two header rows to compute solve times")
    out = []
    for prev, cur in zip(rows, rows[1:]):
        if cur.height != prev.height + 1:
            continue
        st = cur.timestamp - prev.timestamp
        out.append(SolveTime(cur.height, st, st < 0))
    return out


def detect_attack_regions(
    rows: Sequence[HeaderRow],
    window: int = 144,
    low_frac: float = 0.95,
    burst_frac: float = 0.5,
    burst_span: int = 6,
) -> list[AttackRegion]:
    """Flag spans where difficulty is low and blocks then arrive in a burst.

    Height ``h`` is flagged when ``difficulty(h) / median(difficulty over the
    trailing window)`` is below ``low_frac`` and the mean solve time of
    blocks ``h .. h+burst_span-1`` is below ``burst_frac`` times the file-wide
    median solve time.  Negative solve times are left out of both means and
    medians.  Runs of consecutive flagged heights become one region.
    """
    if window < 3:
        raise ValueError(f"window must be >= 3, got {window}")
    if not 0 < low_frac < 1 or not 0 < burst_frac < 1:
        raise ValueError("low_frac and burst_frac must lie in (0, 1)")
    if burst_span < 1:
        raise ValueError("burst_span must be >= 1")
    if len(rows) < 2:
        return []

    diffs = [r.work for r in rows]
    st_by_height = {s.height: s.solve_time for s in solve_times(rows) if not s.negative}
    if not st_by_height:
        return []
    file_median = statistics.median(st_by_height.values())
    burst_limit = burst_frac * file_median

    rel = []
    flagged = []
    for i, r in enumerate(rows):
        rel.append(diffs[i] / statistics.median(diffs[max(0, i - window + 1):i + 1]))
        local = [st_by_height[h] for h in range(r.height, r.height + burst_span) if h in st_by_height]
        flagged.append(bool(local) and rel[i] < low_frac and statistics.fmean(local) < burst_limit)

    regions = []
    i = 0
    while i < len(rows):
        if not flagged[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(rows) and flagged[j + 1] and rows[j + 1].height == rows[j].height + 1:
            j += 1
        sts = [st_by_height[rows[k].height] for k in range(i, j + 1) if rows[k].height in st_by_height]
        regions.append(AttackRegion(
            rows[i].height, rows[j].height,
            statistics.fmean(sts) if sts else math.nan,
            statistics.fmean(rel[i:j + 1]),
        ))
        i = j + 1
    return regions


def emit_regions(regions: Iterable[AttackRegion]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["start_height", "end_height", "mean_solve_time", "mean_relative_difficulty"])
    for g in regions:
        w.writerow([g.start_height, g.end_height, repr(g.mean_solve_time_s), repr(g.mean_relative_difficulty)])
    return buf.getvalue()


def region_overlap_scores(regions: Sequence[AttackRegion], attacker_active: dict[int, bool]) -> tuple[float, float]:
    """Region-level (precision, recall) against per-height ground truth.

    A detected region is a hit if it covers at least one attacker-active
    height; a true episode is recalled if any detected region touches it.
    """
    heights = sorted(attacker_active)
    episodes = []
    start = None
    for h in heights:
        if attacker_active[h] and start is None:
            start = h
        if start is not None and (not attacker_active[h] or h == heights[-1]):
            episodes.append((start, h if attacker_active[h] else h - 1))
            start = None
    hits = sum(any(attacker_active.get(h, False) for h in range(g.start_height, g.end_height + 1)) for g in regions)
    precision = hits / len(regions) if regions else 0.0
    recalled = sum(any(g.start_height <= e and s <= g.end_height for g in regions) for s, e in episodes)
    recall = recalled / len(episodes) if episodes else 0.0
    return precision, recall
