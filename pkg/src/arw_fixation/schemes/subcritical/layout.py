"""
Source layout for the gather-and-trap scheme.

The cycle is cut into K consecutive intervals of length floor(c0 ln n); the
remainder is absorbed by the final interval. Each interval's source is its
midpoint (rounded down).
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

from arw_fixation.core.errors import LayoutTooCoarseError, OutOfWindowError


@dataclass(frozen=True)
class SourceLayout:
    n: int
    c0: float
    interval_len: int
    K: int
    starts: Tuple[int, ...]
    lengths: Tuple[int, ...]
    sources: Tuple[int, ...]

    @property
    def r(self) -> int:
        """Trap window width: interval_len rounded down to even."""
        return self.interval_len - (self.interval_len % 2)

    @property
    def intervals(self) -> List[Tuple[int, int]]:
        """Half-open (start, end) boundaries of every interval."""
        return [(s, s + length) for s, length in zip(self.starts, self.lengths)]

    def interval_of(self, x: int) -> int:
        """Index of the interval holding site x."""
        x %= self.n
        return min(x // self.interval_len, self.K - 1)

    def is_source(self, x: int) -> bool:
        return (x % self.n) in self.sources


def make_layout(n: int, c0: float) -> SourceLayout:
    """
    Build the source layout for an n-cycle.

    Raises:
        LayoutTooCoarseError: If floor(c0 ln n) < 2 or n < 2 floor(c0 ln n)
    """
    interval_len = math.floor(c0 * math.log(n)) if n > 1 else 0
    if interval_len < 2:
        raise LayoutTooCoarseError(f"floor({c0} * ln {n}) = {interval_len} is below 2")
    if n < 2 * interval_len:
        raise LayoutTooCoarseError(
            f"n = {n} cannot hold two intervals of length {interval_len} (c0 = {c0})"
        )

    K = n // interval_len
    starts = tuple(i * interval_len for i in range(K))
    lengths = tuple([interval_len] * (K - 1) + [n - (K - 1) * interval_len])
    sources = tuple(s + length // 2 for s, length in zip(starts, lengths))
    return SourceLayout(n, c0, interval_len, K, starts, lengths, sources)


def _signed_offset(x: int, z: int, n: int) -> int:
    return (x - z + n // 2) % n - n // 2


def hit_prob(j: int, layout: SourceLayout, source: Optional[int] = None) -> float:
    """
    Gambler's-ruin chance that a walker from j reaches a source before its neighbours.

    Args:
        j: Start site
        layout: Source layout
        source: Index of the target source (default: the source of j's interval)

    Returns:
        1 - d / gap, where d is the distance from the source and gap the
        distance to the neighbouring source on j's side

    Raises:
        OutOfWindowError: If j lies beyond a neighbouring source
    """
    n = layout.n
    i = layout.interval_of(j) if source is None else source % layout.K
    z = layout.sources[i]
    right_gap = (layout.sources[(i + 1) % layout.K] - z) % n
    left_gap = (z - layout.sources[(i - 1) % layout.K]) % n

    d = _signed_offset(j, z, n)
    if 0 <= d <= right_gap:
        return 1.0 - d / right_gap
    if -left_gap <= d < 0:
        return 1.0 + d / left_gap
    raise OutOfWindowError(f"Site {j} lies outside the window of source {z}")
