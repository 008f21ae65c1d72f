import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from jumpmine.difficulty import (
    POW_LIMIT,
    Algorithm,
    BlockRecord,
    DaaConfig,
    difficulty_from_target,
    next_difficulty,
    next_difficulty_bch,
    next_difficulty_bitcoin,
    next_difficulty_btg_weighted,
    next_difficulty_digishield,
    next_target_improved,
    target_from_difficulty,
)

T = 600.0
G = 2**182                     # target at difficulty 4


def chain(solve_times, difficulties=4.0):
    if isinstance(difficulties, (int, float)):
        difficulties = [float(difficulties)] * len(solve_times)
    return [BlockRecord(h, d, s, "honest", False, 1.0) for h, (d, s) in enumerate(zip(difficulties, solve_times))]


# ---------------------------------------------------------------- targets

def test_target_examples():
    assert target_from_difficulty(1.0, unit=1) == 2**224
    assert target_from_difficulty(float(2**224), unit=1) == 1
    assert target_from_difficulty(4.0) == G
    assert target_from_difficulty(1.0) == POW_LIMIT
    with pytest.raises(ValueError):
        target_from_difficulty(float(2**225), unit=1)
    with pytest.raises(ValueError):
        target_from_difficulty(0.0)


@pytest.mark.parametrize("d", [1.0, 3.0, 1e6])
def test_round_trip_examples(d):
    back = difficulty_from_target(target_from_difficulty(d))
    assert abs(back - d) <= d * 2.0**-50


@given(st.floats(min_value=1e-6, max_value=1e30))
def test_round_trip_property(d):
    back = difficulty_from_target(target_from_difficulty(d))
    assert abs(back - d) <= d * 2.0**-50


# ---------------------------------------------------------------- bitcoin

def btc_cfg(**kw):
    return DaaConfig(Algorithm.BITCOIN, **kw)


@pytest.mark.parametrize("per_block,factor", [(T, 1.0), (T / 2, 2.0), (T / 8, 4.0), (T * 10, 0.25)])
def test_bitcoin_retarget_examples(per_block, factor):
    h = chain([per_block] * 2016)
    assert next_difficulty_bitcoin(h, btc_cfg()) == pytest.approx(4.0 * factor, rel=1e-12)


def test_bitcoin_holds_between_boundaries():
    h = chain([T / 3] * 2017)
    assert next_difficulty_bitcoin(h, btc_cfg()) == 4.0
    assert next_difficulty_bitcoin(h[:5], btc_cfg()) == 4.0


def test_bitcoin_insufficient_history_at_boundary():
    # a boundary only happens at height == window, which always has a full window;
    # a shorter history passed at a boundary height is an error
    short = chain([T] * 4)
    short_cfg = btc_cfg(window=4)
    assert next_difficulty_bitcoin(short, short_cfg) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        next_difficulty_bitcoin([], short_cfg)


# ---------------------------------------------------------------- bch

@pytest.mark.parametrize("window_sum,expected", [(144 * T, 4.0), (288 * T, 2.0), (14.4 * T, 8.0)])
def test_bch_examples(window_sum, expected):
    h = chain([window_sum / 144] * 144)
    assert next_difficulty_bch(h, DaaConfig(Algorithm.BCH)) == pytest.approx(expected, rel=1e-12)


def test_bch_bootstrap_uses_available_history():
    assert next_difficulty_bch(chain([T / 1.5]), DaaConfig(Algorithm.BCH)) == pytest.approx(6.0)
    with pytest.raises(ValueError):
        next_difficulty_bch([], DaaConfig(Algorithm.BCH))


# ---------------------------------------------------------------- digishield

DIGI = DaaConfig(Algorithm.DIGISHIELD)


def test_digishield_fixed_point():
    assert next_difficulty_digishield(chain([T] * 40), DIGI) == 4.0


def test_digishield_slow_window_is_damped():
    d = next_difficulty_digishield(chain([2 * T] * 40), DIGI)
    # damped timespan is 1 + (2 - 1)/4 = 1.25 times expected
    assert d == difficulty_from_target(G * 5 // 4)
    assert 4.0 * 0.5 < d < 4.0


def test_digishield_fast_window_hits_upper_clamp():
    d = next_difficulty_digishield(chain([T / 10] * 40), DIGI)
    assert d == difficulty_from_target(G * 84 // 100)


def test_digishield_without_median_time_past():
    cfg = DaaConfig(Algorithm.DIGISHIELD, digishield_mtp=1)
    h = chain([T] * 16 + [5 * T])
    # timespan 21T over 17 blocks, damped to (3*17 + 21)/4 = 18T
    assert next_difficulty_digishield(h, cfg) == difficulty_from_target(G * 18 // 17)


# ---------------------------------------------------------------- btg

def test_btg_fixed_point():
    cfg = DaaConfig(Algorithm.BTG, adjust=1.0)
    assert next_difficulty_btg_weighted(chain([T] * 45), cfg) == 4.0


def test_btg_slow_window_halves():
    cfg = DaaConfig(Algorithm.BTG, adjust=1.0)
    assert next_difficulty_btg_weighted(chain([2 * T] * 45), cfg) == difficulty_from_target(2 * G)


def test_btg_weighted_mean_hand_example():
    # avgT = (1*10 + 2*590)/3 = 396.67 s
    cfg = DaaConfig(Algorithm.BTG, window=2, adjust=1.0)
    d = next_difficulty_btg_weighted(chain([10.0, 590.0]), cfg)
    assert d == difficulty_from_target(math.floor(G * Fraction(1190, 3) / 600))


def test_btg_adjust_lowers_difficulty():
    d = next_difficulty_btg_weighted(chain([T] * 45), DaaConfig(Algorithm.BTG))
    assert d == difficulty_from_target(math.floor(G / Fraction(0.998)))


# ---------------------------------------------------------------- improved: guard branches

def improved_cfg(window=10, adjust=1.0, **kw):
    return DaaConfig(Algorithm.IMPROVED, window=window, adjust=adjust, **kw)


def test_improved_base_retarget():
    # 1.2T everywhere: last-10 sum 12T, no guard fires
    h = chain([1.2 * T] * 10)
    got = next_target_improved(h, improved_cfg(adjust=0.998))
    assert got == math.floor(Fraction(6, 5) * G * Fraction(0.998))


def test_improved_sum_time_floor():
    # weighted sum 12.55T is below the floor N*N*T/6 = 16.67T; the 5T guard fires
    # but its cap G/2 is above the floored result
    h = chain([6.0] * 5 + [186.0] * 5)
    got = next_target_improved(h, improved_cfg())
    assert got == G * 10 // 33
    unfloored = math.floor(Fraction(2, 110) * Fraction(5 * 6 * 15 + 186 * 40, 600) * G)
    assert unfloored < got


def test_improved_last5_cap():
    # last five at 0.2T sum to 1.0T <= 1.5T
    h = chain([T] * 5 + [0.2 * T] * 5)
    assert next_target_improved(h, improved_cfg()) == G // 4


def test_improved_last5_cap_uses_last5_targets():
    diffs = [4.0] * 5 + [2.0, 4.0, 8.0, 4.0, 1.0]
    h = chain([T] * 5 + [0.2 * T] * 5, diffs)
    avg5 = sum(target_from_difficulty(d) for d in diffs[-5:]) // 5
    assert next_target_improved(h, improved_cfg()) == avg5 // 4


def test_improved_last10_half_cap():
    # last ten at 0.45T: last-5 2.25T > 1.5T, last-10 4.5T <= 5T
    h = chain([3 * T] * 10 + [0.45 * T] * 10)
    assert next_target_improved(h, improved_cfg(window=20)) == G // 2


def test_improved_last10_two_thirds_cap():
    # last ten at 0.9T: last-10 9T, between 5T and 10T
    h = chain([3 * T] * 10 + [0.9 * T] * 10)
    assert next_target_improved(h, improved_cfg(window=20)) == G * 2 // 3


def test_improved_two_thirds_cap_is_inclusive():
    # a window of exactly T per block sits on the 10T boundary and is capped
    h = chain([T] * 45)
    assert next_target_improved(h, improved_cfg(window=45)) == G * 2 // 3


def test_improved_fall_guard():
    h = chain([T] * 9 + [20 * T])
    assert next_target_improved(h, improved_cfg()) == G * 13 // 10


def test_improved_pow_limit_clamp():
    h = chain([T] * 9 + [20 * T], 1.0)
    assert next_target_improved(h, improved_cfg()) == POW_LIMIT
    assert next_difficulty(h, improved_cfg()) == 1.0
    custom = improved_cfg(pow_limit=G + 5)
    assert next_target_improved(chain([T] * 9 + [20 * T]), custom) == G + 5


def test_improved_pads_short_history():
    h = chain([2 * T, T])
    padded = chain([2 * T] * 9 + [T])
    assert next_target_improved(h, improved_cfg()) == next_target_improved(padded, improved_cfg())


def test_improved_window_must_cover_guards():
    with pytest.raises(ValueError):
        improved_cfg(window=9)


# ---------------------------------------------------------------- improved vs. listing transcription

def _random_window(rng):
    n = int(rng.integers(10, 61))
    kind = rng.integers(0, 4)
    st_ = rng.exponential(T, n)
    if kind == 1:
        st_[-int(rng.integers(1, 11)):] *= rng.uniform(0.01, 0.4)
    elif kind == 2:
        st_[-1] *= rng.uniform(5, 40)
    elif kind == 3:
        st_ = np.full(n, T * rng.choice([0.5, 1.0, 1.5]))
    st_ = np.maximum(st_, 1e-6)
    d = 4.0 * rng.lognormal(0, 0.4, n)
    if rng.random() < 0.1:
        d[:] = rng.uniform(0.9, 1.3)
    return n, [float(x) for x in st_], [float(x) for x in d], float(rng.choice([1.0, 0.998, 0.9]))


def test_improved_matches_listing_on_1000_windows():
    rng = np.random.default_rng(20200101)
    fired = set()
    for _ in range(1000):
        n, st_, d, adjust = _random_window(rng)
        cfg = improved_cfg(window=n, adjust=adjust)
        got = next_target_improved(chain(st_, d), cfg)
        assert got == oracles.improved_target(d, st_, T, n, adjust, POW_LIMIT)
        fired.add(got == POW_LIMIT)
    assert fired == {True, False}


# ---------------------------------------------------------------- invariants

histories = st.lists(
    st.tuples(st.floats(min_value=1.0, max_value=50.0), st.floats(min_value=1.0, max_value=20 * T)),
    min_size=1, max_size=60)


@settings(max_examples=150, deadline=None)
@given(hist=histories, alg=st.sampled_from(list(Algorithm)))
def test_every_daa_positive_and_within_pow_limit(hist, alg):
    window = {Algorithm.BITCOIN: 4, Algorithm.IMPROVED: 10}.get(alg, 17)
    cfg = DaaConfig(alg, window=window)
    h = chain([s for _, s in hist], [d for d, _ in hist])
    d = next_difficulty(h, cfg)
    assert d > 0 and math.isfinite(d)
    assert target_from_difficulty(d) <= POW_LIMIT + 1


@settings(max_examples=150, deadline=None)
@given(hist=histories)
def test_bch_step_ratio_bounded(hist):
    h = chain([s for _, s in hist], [d for d, _ in hist])
    d = next_difficulty_bch(h, DaaConfig(Algorithm.BCH))
    prev = h[-1].difficulty
    assert prev * 0.5 * (1 - 1e-12) <= d <= prev * 2 * (1 + 1e-12) or d == 1.0


@settings(max_examples=100, deadline=None)
@given(hist=st.lists(st.floats(min_value=1.0, max_value=20 * T), min_size=8, max_size=8))
def test_bitcoin_ratio_bounded(hist):
    cfg = btc_cfg(window=8)
    d = next_difficulty_bitcoin(chain(hist), cfg)
    assert 0.25 - 1e-12 <= d / 4.0 <= 4.0 + 1e-12


@settings(max_examples=200, deadline=None)
@given(hist=histories)
def test_improved_guards_hold(hist):
    cfg = improved_cfg(adjust=0.998)
    h = chain([s for _, s in hist], [d for d, _ in hist])
    got = next_target_improved(h, cfg)
    window = ([h[0]] * 10 + h)[-10:]
    assert got <= window[-1].target * 13 // 10
    if sum(r.ticks for r in window[-5:]) <= 1.5 * 600 * 2**32:
        assert got <= sum(r.target for r in window[-5:]) // 5 // 4


@pytest.mark.parametrize("alg", list(Algorithm))
def test_fixed_point_constant_history(alg):
    cfg = DaaConfig(alg)
    h = chain([T] * (cfg.window + 20))
    d = next_difficulty(h, cfg)
    assert 4.0 * cfg.adjust * (1 - 1e-12) <= d <= 4.0 / cfg.adjust * (1 + 1e-12)
