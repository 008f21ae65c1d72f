"""Block solve-time sampling under the geometric hashing model.

Each hash attempt succeeds independently with probability ``p = 1/(D * LZ)``,
so the number of attempts until success is geometric.  The attempt count is
drawn by inverting the geometric CDF ``P(n) = 1 - (1 - p)**n`` and converted
to seconds by dividing by the network hashrate.

Precision: ``n`` is returned as a float.  At the difficulties used here
(``D * LZ`` around 2**42) typical draws stay below 2**50, well inside the
2**53 range where every integer is representable exactly.
"""
from __future__ import annotations

import math

import numpy as np

#: Difficulty unit: one unit of difficulty is 2**40 expected hashes.
LZ = float(2**40)

# Largest double strictly below 1.0; rand is clamped here so log1p(-rand) stays finite.
_MAX_RAND = math.nextafter(1.0, 0.0)
_EXACT_INT_LIMIT = float(2**53)


class RngStream:
    """Seeded stream of uniform draws in [0, 1).

    Backed by numpy's PCG64 bit generator.  ``substream`` selects an
    independent stream derived from the same seed (0 is the plain seed).
    Draws are fetched in blocks for speed; the sequence is identical to
    drawing one value at a time, so ``position`` always counts the values
    handed out so far.
    """

    _BLOCK = 4096

    def __init__(self, seed: int, substream: int = 0):
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self.substream = substream
        self.position = 0
        spawn_key = (substream,) if substream else ()
        seq = np.random.SeedSequence(self.seed, spawn_key=spawn_key)
        self._gen = np.random.Generator(np.random.PCG64(seq))
        self._buf = np.empty(0)
        self._idx = 0

    def random(self) -> float:
        if self._idx >= len(self._buf):
            self._buf = self._gen.random(self._BLOCK)
            self._idx = 0
        value = float(self._buf[self._idx])
        self._idx += 1
        self.position += 1
        return value

    def draws(self, count: int) -> list[float]:
        return [self.random() for _ in range(count)]


def success_probability(difficulty: float) -> float:
    """Probability that a single hash meets the target at ``difficulty`` (LZ units)."""
    if not (difficulty > 0 and math.isfinite(difficulty)):
        raise ValueError(f"difficulty must be positive and finite, got {difficulty}")
    p = 1.0 / (difficulty * LZ)
    if not p < 1.0:
        raise ValueError(f"difficulty {difficulty} gives success probability {p} >= 1")
    return p


def sample_num_hashes(p: float, rand: float) -> float:
    """Smallest ``n >= 1`` with ``P(n-1) < rand <= P(n)``.

    ``log(1 - p)`` is taken through ``log1p`` so that p near 2**-42 keeps
    full precision.  The float quotient is then nudged by one step when it
    lands on the wrong side of a CDF boundary; the check ``P(n) >= rand`` is
    done in log space, ``n * log(1 - p) <= log(1 - rand)``, which keeps its
    precision for rand close to 1.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if not 0.0 <= rand < 1.0:
        raise ValueError(f"rand must lie in [0, 1), got {rand}")
    rand = min(rand, _MAX_RAND)
    log_q = math.log1p(-p)
    log_r = math.log1p(-rand)
    n = float(max(1, math.ceil(log_r / log_q)))
    if n < _EXACT_INT_LIMIT:
        if n > 1 and (n - 1) * log_q <= log_r:
            n -= 1
        elif n * log_q > log_r:
            n += 1
    return n


def get_solve_time(hashrate: float, rand: float, difficulty: float) -> float:
    """Seconds for a network of ``hashrate`` hashes/s to find a block at ``difficulty``."""
    if not (hashrate > 0 and math.isfinite(hashrate)):
        raise ValueError(f"hashrate must be positive and finite, got {hashrate}")
    return sample_num_hashes(success_probability(difficulty), rand) / hashrate
