"""Exact Cesàro partial averages of block sequences."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .seqcore import BlockSequence
from .trend import Track

__all__ = [
    "MAX_SCHEDULE",
    "CesaroEstimate",
    "average",
    "boundary_extremes",
    "ones_below",
    "window_extremes",
]

# largest boundary index boundary_extremes will walk
MAX_SCHEDULE = 20_000


def ones_below(s: BlockSequence, n: int) -> int:
    """#{i < n : u_i = 1}, summed over one-blocks clipped at n."""
    if n <= 0:
        return 0
    count = 0
    for start, end, value in s.blocks():
        if start >= n:
            break
        if value:
            count += (n if end is None else min(end, n)) - start
        if end is None:
            break
    return count


def average(s: BlockSequence, n: int) -> Fraction:
    if n < 1:
        raise ValueError("average needs n >= 1")
    return Fraction(ones_below(s, n), n)


@dataclass
class CesaroEstimate:
    """Tail-window extremes of the running average sampled at block ends.

    Running averages have their local maxima at ends of one-blocks and their
    local minima at ends of zero-blocks, so ``lower_track`` / ``upper_track``
    hold exactly the candidates for liminf / limsup.  When the boundary
    stream is finite the sequence is eventually constant and ``eventual``
    holds that constant, which is then the exact limit.
    """

    lower: Fraction
    upper: Fraction
    schedule_indices: list[int]
    values: list[Fraction]
    lower_track: Track = field(repr=False)
    upper_track: Track = field(repr=False)
    eventual: int | None = None

    @property
    def trend(self) -> dict[str, str]:
        return {"lower": self.lower_track.direction(), "upper": self.upper_track.direction()}

    @property
    def gaps(self) -> dict[str, Fraction | None]:
        return {"lower": self.lower_track.last_gap(), "upper": self.upper_track.last_gap()}


def boundary_extremes(s: BlockSequence, k_max: int = 20) -> CesaroEstimate:
    """Averages at the first ``k_max`` boundaries; min/max over the last half."""
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    if k_max > MAX_SCHEDULE:
        raise ValueError(f"k_max={k_max} exceeds the schedule limit {MAX_SCHEDULE}")
    ns, values = [], []
    lows, highs = Track(), Track()
    ones = 0
    prev, value = 0, s.initial_value
    for j, b in enumerate(itertools.islice(s.boundaries(), k_max)):
        if value:
            ones += b - prev
        avg = Fraction(ones, b)
        ns.append(b)
        values.append(avg)
        # the block just closed decides whether b is a local max or min
        (highs if value else lows).append(j, avg)
        prev, value = b, 1 - value
    eventual = None
    if len(ns) < k_max:
        # finite stream: constant from the last boundary on
        eventual = value
        limit = Fraction(eventual)
        return CesaroEstimate(limit, limit, ns, values, lows, highs, eventual)
    half = len(ns) // 2
    tail = values[half:]
    return CesaroEstimate(min(tail), max(tail), ns, values, lows, highs)


def window_extremes(s: BlockSequence, n_lo: int, n_hi: int) -> tuple[Fraction, Fraction]:
    """Exact min and max of ``average(s, n)`` over ``n_lo <= n <= n_hi``.

    Extremes of the running average sit at block ends or at the window
    edges, so only those points are evaluated.
    """
    if not 1 <= n_lo <= n_hi:
        raise ValueError("need 1 <= n_lo <= n_hi")
    candidates = [n_lo, n_hi]
    ones_at = {}
    ones = 0
    prev, value = 0, s.initial_value
    for b in s.boundaries():
        if b > n_hi:
            break
        if value:
            ones += b - prev
        ones_at[b] = ones
        if b >= n_lo:
            candidates.append(b)
        prev, value = b, 1 - value
    lo_val = hi_val = None
    for n in candidates:
        c = ones_at[n] if n in ones_at else ones_below(s, n)
        v = Fraction(c, n)
        lo_val = v if lo_val is None or v < lo_val else lo_val
        hi_val = v if hi_val is None or v > hi_val else hi_val
    return lo_val, hi_val
