"""
Toppling policies.

A policy never sees the instruction stack: it only chooses among the sites
currently in the active-site index, so every policy produces a legal
toppling sequence over the same stack.
"""

from dataclasses import dataclass
from typing import Callable, FrozenSet, List, Optional, Tuple, Union

import numpy as np
from sortedcontainers import SortedSet

from arw_fixation.core.stack import STREAM_POLICY, stream_rng
from arw_fixation.engine.kernels import MODE_LEFTMOST, MODE_RANDOM, MODE_SWEEP


Selector = Callable[[SortedSet], int]

# Uniforms drawn per refill of a random policy's feed
POLICY_BATCH = 4096


@dataclass(frozen=True)
class LeftmostUnstable:
    """Always topple the smallest-index unstable site."""


@dataclass(frozen=True)
class RandomUnstable:
    """Topple a uniformly chosen unstable site; randomness is private to the policy."""
    policy_seed: int = 0


@dataclass(frozen=True)
class SweepCyclic:
    """Sweep upward from site 0, wrapping to 0 after the last unstable site."""


@dataclass(frozen=True)
class Restricted:
    """Wrap another policy and only ever topple sites in `allowed_sites`."""
    inner: "Policy"
    allowed_sites: FrozenSet[int]


Policy = Union[LeftmostUnstable, RandomUnstable, SweepCyclic, Restricted]

POLICY_NAMES = {
    "leftmost": LeftmostUnstable,
    "random": RandomUnstable,
    "sweep": SweepCyclic,
}


def policy_from_name(name: str, policy_seed: int = 0) -> Policy:
    """Build a policy from its CLI name (leftmost, random, sweep)."""
    key = name.strip().lower()
    if key not in POLICY_NAMES:
        raise ValueError(f"Unknown policy '{name}' (choose from {', '.join(POLICY_NAMES)})")
    if key == "random":
        return RandomUnstable(policy_seed)
    return POLICY_NAMES[key]()


def allowed_sites(policy: Policy) -> Optional[FrozenSet[int]]:
    """Intersection of all Restricted layers, or None when unrestricted."""
    allowed = None
    while isinstance(policy, Restricted):
        sites = frozenset(policy.allowed_sites)
        allowed = sites if allowed is None else allowed & sites
        policy = policy.inner
    return allowed


class UniformFeed:
    """
    The private uniform stream of a RandomUnstable policy.

    Uniforms come in fixed batches from a tagged Philox stream, so the
    interpreted selector and the compiled kernel consume the same sequence.
    """

    def __init__(self, policy_seed: int):
        self._rng = stream_rng(policy_seed, STREAM_POLICY)
        self._buffer: List[float] = []
        self._pos = 0

    def batch(self) -> np.ndarray:
        return self._rng.random(POLICY_BATCH)

    def next(self) -> float:
        if self._pos >= len(self._buffer):
            self._buffer = self.batch().tolist()
            self._pos = 0
        u = self._buffer[self._pos]
        self._pos += 1
        return u


def _unwrap(policy: Policy) -> Policy:
    while isinstance(policy, Restricted):
        policy = policy.inner
    return policy


def make_selector(policy: Policy) -> Selector:
    """Fresh selection function for one run (carries the run's private state)."""
    policy = _unwrap(policy)

    if isinstance(policy, LeftmostUnstable):
        return lambda index: index[0]

    if isinstance(policy, RandomUnstable):
        feed = UniformFeed(policy.policy_seed)
        return lambda index: index[int(feed.next() * len(index))]

    if isinstance(policy, SweepCyclic):
        cursor = 0

        def sweep(index: SortedSet) -> int:
            nonlocal cursor
            pos = index.bisect_left(cursor)
            site = index[pos] if pos < len(index) else index[0]
            cursor = site + 1
            return site

        return sweep

    raise TypeError(f"Not a toppling policy: {policy!r}")


def kernel_mode(policy: Policy) -> Tuple[int, Optional[UniformFeed]]:
    """Compiled-kernel selection mode of a policy, with a fresh feed for random ones."""
    policy = _unwrap(policy)
    if isinstance(policy, LeftmostUnstable):
        return MODE_LEFTMOST, None
    if isinstance(policy, RandomUnstable):
        return MODE_RANDOM, UniformFeed(policy.policy_seed)
    if isinstance(policy, SweepCyclic):
        return MODE_SWEEP, None
    raise TypeError(f"Not a toppling policy: {policy!r}")
