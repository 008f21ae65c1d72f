"""Scenario and sweep files.

A scenario is one INI section of flat keys::

    [scenario]
    name = btg_equal
    daa = btg
    target_block_time = 600
    attacker = threshold
    attacker_multiple = 1
    num_blocks = 100000
    seed = 1

Every DaaConfig constant can be set; see ``SCENARIO_KEYS``.  A sweep manifest
has a ``[sweep]`` section (``seeds``, optional ``num_blocks``) and one
``[scenario NAME]`` section per scenario; keys in an optional ``[common]``
section apply to every scenario.  A scenario section may name a
base file with ``config = FILE`` (a path relative to the manifest, or a bundled
scenario name) and override keys on top of it.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping

from .difficulty import Algorithm, DaaConfig
from .engine import SimConfig, standard_miners

DAA_ALIASES = {
    "bitcoin": Algorithm.BITCOIN, "btc": Algorithm.BITCOIN,
    "bch": Algorithm.BCH, "bitcoin_cash": Algorithm.BCH,
    "digishield": Algorithm.DIGISHIELD, "zcash": Algorithm.DIGISHIELD,
    "btg": Algorithm.BTG, "bitcoin_gold": Algorithm.BTG,
    "improved": Algorithm.IMPROVED,
}


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _int(v: str) -> int:
    return int(v, 0)


def _pair(v: str) -> tuple[float, float]:
    lo, hi = (float(x) for x in v.split(","))
    return lo, hi


def _int_pair(v: str) -> tuple[int, int]:
    a, b = (int(x) for x in v.split(","))
    return a, b


def _guards(v: str) -> tuple[tuple[int, float, int, int], ...]:
    # "5:1.5:1/4; 10:5:1/2; 10:10:2/3"
    out = []
    for part in filter(None, (p.strip() for p in v.split(";"))):
        blocks, limit, cap = part.split(":")
        num, den = cap.split("/")
        out.append((int(blocks), float(limit), int(num), int(den)))
    return tuple(out)


DAA_KEYS = {
    "target_block_time": float,
    "window": int,
    "adjust": float,
    "pow_limit": _int,
    "bitcoin_clamp": _pair,
    "bch_clamp": _pair,
    "digishield_damping": int,
    "digishield_max_up_pct": int,
    "digishield_max_down_pct": int,
    "digishield_mtp": int,
    "surge_guards": _guards,
    "fall_guard": _int_pair,
    "sum_time_floor_div": int,
}

RUN_KEYS = {
    "name": str,
    "daa": str,
    "num_blocks": int,
    "seed": _int,
    "base_difficulty": float,
    "genesis_difficulty": float,
    "attacker": str,
    "attacker_multiple": float,
    "attack_in": float,
    "attack_out": float,
    "epoch_period": int,
    "config": str,
}

SCENARIO_KEYS = {**RUN_KEYS, **DAA_KEYS}


@dataclass(frozen=True)
class Scenario:
    name: str
    sim: SimConfig
    base_difficulty: float
    attacker: str
    attacker_multiple: float


def bundled_scenarios() -> list[str]:
    root = resources.files("jumpmine") / "scenarios"
    return sorted(p.name.removesuffix(".cfg") for p in root.iterdir() if p.name.endswith(".cfg"))


def resolve_path(ref: str, base_dir: Path | None = None) -> Path:
    """A file path, or the name of a bundled scenario (with or without ``.cfg``)."""
    p = Path(ref)
    if base_dir is not None and not p.is_absolute() and (base_dir / p).exists():
        return base_dir / p
    if p.exists():
        return p
    bundled = resources.files("jumpmine") / "scenarios" / (ref if ref.endswith(".cfg") else ref + ".cfg")
    if bundled.is_file():
        return Path(str(bundled))
    raise ConfigError("config", f"no such file or bundled scenario: {ref!r}")


def _read_ini(path: Path, default_section: str = "DEFAULT") -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, default_section=default_section)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as e:
        raise ConfigError(str(path), f"cannot read: {e.strerror}") from None
    except configparser.Error as e:
        raise ConfigError(str(path), str(e).splitlines()[0]) from None
    return parser


def read_scenario_file(path: Path) -> dict[str, str]:
    parser = _read_ini(path)
    sections = parser.sections()
    if len(sections) != 1:
        raise ConfigError(str(path), f"expected exactly one section, found {sections}")
    return dict(parser[sections[0]])


def _with_base(raw: Mapping[str, str], base_dir: Path | None, seen: tuple = ()) -> dict[str, str]:
    raw = dict(raw)
    ref = raw.pop("config", None)
    if ref is None:
        return raw
    path = resolve_path(ref, base_dir)
    if path in seen:
        raise ConfigError("config", f"circular reference through {path}")
    base = _with_base(read_scenario_file(path), path.parent, seen + (path,))
    base.update(raw)
    return base


def build_scenario(raw: Mapping[str, str], overrides: Mapping[str, str] | None = None,
                   base_dir: Path | None = None, default_name: str = "scenario") -> Scenario:
    """Turn flat string keys into a validated Scenario; errors name the offending key."""
    merged = _with_base(raw, base_dir)
    merged.update(overrides or {})
    values = {}
    for key, text in merged.items():
        if key not in SCENARIO_KEYS:
            raise ConfigError(key, "unknown key")
        try:
            values[key] = SCENARIO_KEYS[key](text.strip())
        except (TypeError, ValueError) as e:
            raise ConfigError(key, f"cannot parse {text!r}: {e}") from None

    daa_name = values.get("daa", "btg").lower()
    if daa_name not in DAA_ALIASES:
        raise ConfigError("daa", f"unknown algorithm {daa_name!r}; choose from {sorted(DAA_ALIASES)}")
    daa_kw = {k: values[k] for k in DAA_KEYS if k in values}
    try:
        daa = DaaConfig(DAA_ALIASES[daa_name], **daa_kw)
    except ValueError as e:
        raise ConfigError("daa", str(e)) from None

    base = values.get("base_difficulty", 4.0)
    attacker = values.get("attacker", "none")
    multiple = values.get("attacker_multiple", 1.0)
    try:
        miners = standard_miners(
            attacker, multiple, base, daa.target_block_time,
            values.get("attack_in", 0.95), values.get("attack_out", 1.45), values.get("epoch_period", 2016))
    except ValueError as e:
        raise ConfigError("attacker", str(e)) from None
    try:
        sim = SimConfig(daa, miners, values.get("num_blocks", 100_000), values.get("seed", 0),
                        values.get("genesis_difficulty", base))
    except ValueError as e:
        raise ConfigError("num_blocks/seed/genesis_difficulty", str(e)) from None
    return Scenario(values.get("name", default_name), sim, base, attacker, multiple)


def load_scenario(ref: str, overrides: Mapping[str, str] | None = None) -> Scenario:
    path = resolve_path(ref)
    return build_scenario(read_scenario_file(path), overrides, path.parent, default_name=path.stem)


def parse_seeds(text: str) -> list[int]:
    """``"1-10"``, ``"1,2,5"`` or a mix such as ``"0,3-5"``."""
    seeds = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "-" in part:
            lo, hi = (int(x) for x in part.split("-"))
            seeds.extend(range(lo, hi + 1))
        else:
            seeds.append(int(part))
    return seeds


@dataclass(frozen=True)
class RunManifest:
    scenarios: tuple[Scenario, ...]
    seeds: tuple[int, ...]


def load_manifest(path: Path) -> RunManifest:
    parser = _read_ini(path, default_section="\0")
    if "sweep" not in parser:
        raise ConfigError("sweep", "manifest needs a [sweep] section")
    sweep = dict(parser["sweep"])
    try:
        seeds = parse_seeds(sweep.pop("seeds", ""))
    except ValueError as e:
        raise ConfigError("seeds", str(e)) from None
    if not seeds:
        raise ConfigError("seeds", "at least one seed is required")
    sweep.pop("jobs", None)
    unknown = set(sweep) - {"num_blocks"}
    if unknown:
        raise ConfigError("sweep", f"unknown keys {sorted(unknown)}")
    common = dict(parser["common"]) if "common" in parser else {}

    scenarios = []
    for section in parser.sections():
        if section in ("sweep", "common"):
            continue
        if not section.startswith("scenario "):
            raise ConfigError(section, "sections must be [sweep], [common] or [scenario NAME]")
        name = section.removeprefix("scenario ").strip()
        raw = {**common, **parser[section]}
        scenarios.append(build_scenario(raw, {**sweep, "name": name}, path.parent, default_name=name))
    if not scenarios:
        raise ConfigError("scenario", "manifest lists no scenarios")
    names = [s.name for s in scenarios]
    if len(set(names)) != len(names):
        raise ConfigError("scenario", f"duplicate scenario names in {names}")
    return RunManifest(tuple(scenarios), tuple(seeds))
