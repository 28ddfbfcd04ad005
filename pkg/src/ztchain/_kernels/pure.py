"""Pure-Python kernels: seeded PRNG, batch sampling, stake-weighted selection.

This module is the reference implementation; ``_speedups.pyx`` is a
bit-exact compiled twin. Parity constraints the two must share:

* SplitMix64 state arithmetic is unsigned 64-bit with wrap-around.
* Doubles in [0, 1) come from the top 53 bits: ``(x >> 11) * 2**-53``.
* Cumulative probabilities accumulate left to right as
  ``c += stake[i] / total`` in double precision, and the final entry is
  clamped to exactly 1.0 so every draw in [0, 1] is covered.
* Selection scans left to right and returns the smallest 1-based index
  with ``r <= c[i]``, skipping zero-stake entries (they keep their index
  but are never selectable, even on an exact boundary hit).

Any change here must be mirrored in the .pyx twin; the parity test suite
compares both backends output-for-output.
"""

from __future__ import annotations

from typing import Sequence

BACKEND = "pure"

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_STREAM_SALT = 0x1F123BB5159A55E5
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53

#: stakes must convert to double exactly
MAX_STAKE_TOTAL = 1 << 53


def mix64(z: int) -> int:
    """SplitMix64 output mixer (Stafford variant 13)."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_state(seed: int, stream: int) -> int:
    """Initial generator state for a (seed, stream) pair.

    Streams decorrelate independent draw sequences (per-purpose, per-tick)
    under one simulation seed.
    """
    salted = ((stream & _MASK64) * _GAMMA + _STREAM_SALT) & _MASK64
    return mix64((seed & _MASK64) ^ mix64(salted))


def next_u64(state: int) -> tuple[int, int]:
    """Advance one step; returns (output, new_state)."""
    state = (state + _GAMMA) & _MASK64
    return mix64(state), state


def uniform_fill(seed: int, stream: int, n: int) -> list[float]:
    """n doubles in [0, 1) from the (seed, stream) sequence."""
    state = derive_state(seed, stream)
    out = []
    for _ in range(n):
        state = (state + _GAMMA) & _MASK64
        out.append((mix64(state) >> 11) * _INV_2_53)
    return out


def uniform_range_fill(seed: int, stream: int, n: int, low: float, high: float) -> list[float]:
    """n doubles in [low, high) from the (seed, stream) sequence."""
    state = derive_state(seed, stream)
    span = high - low
    out = []
    for _ in range(n):
        state = (state + _GAMMA) & _MASK64
        out.append(low + ((mix64(state) >> 11) * _INV_2_53) * span)
    return out


def cumulative_probabilities(stakes: Sequence[int]) -> list[float]:
    """Left-to-right cumulative stake shares, last entry clamped to 1.0.

    Callers validate emptiness/zero-total; this kernel assumes a valid
    table.
    """
    total = 0
    for s in stakes:
        total += s
    cum = []
    acc = 0.0
    for s in stakes:
        acc += s / total
        cum.append(acc)
    cum[-1] = 1.0
    return cum


def select_index(cum: Sequence[float], stakes: Sequence[int], r: float) -> int:
    """Smallest 1-based i with r <= cum[i], skipping zero-stake entries."""
    for i, c in enumerate(cum):
        if r <= c and stakes[i] > 0:
            return i + 1
    # unreachable for valid tables: cum[-1] == 1.0 and r <= 1.0
    raise AssertionError("no selectable validator")


def select_many(stakes: Sequence[int], rs: Sequence[float]) -> list[int]:
    cum = cumulative_probabilities(stakes)
    return [select_index(cum, stakes, r) for r in rs]


def selection_counts(stakes: Sequence[int], draws: int, seed: int, stream: int) -> list[int]:
    """Histogram of ``draws`` seeded selections (the hot loop)."""
    cum = cumulative_probabilities(stakes)
    n = len(cum)
    counts = [0] * n
    state = derive_state(seed, stream)
    for _ in range(draws):
        state = (state + _GAMMA) & _MASK64
        r = (mix64(state) >> 11) * _INV_2_53
        for i in range(n):
            if r <= cum[i] and stakes[i] > 0:
                counts[i] += 1
                break
    return counts
