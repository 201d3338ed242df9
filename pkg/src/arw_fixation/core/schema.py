"""
Domain types for Activated Random Walk on the cycle Z/nZ.

Key design principles:
1. A site is either Active(k) (k >= 0 active particles) or SLEEPY (exactly
   one sleeping particle). Sleepiness is stored separately from counts, never
   encoded as a negative count.
2. Configuration caches the particle total; every mutation goes through
   methods that keep it consistent (mass conservation).
3. Odometer counters are unbounded Python ints exported as uint64 arrays.
"""

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Iterator, List, Sequence, Tuple, Union

import numpy as np

from arw_fixation.core.errors import InvalidParamsError


# ============================================================================
# PARAMETERS
# ============================================================================

@dataclass(frozen=True)
class Params:
    """Cycle size, density, sleep rate and master seed of one ARW instance."""
    n: int
    mu: float
    lam: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise InvalidParamsError(f"n must be >= 2 (got {self.n})")
        if not 0.0 < self.mu < 1.0:
            raise InvalidParamsError(f"mu must lie in (0, 1) (got {self.mu})")
        if not (self.lam > 0.0 and math.isfinite(self.lam)):
            raise InvalidParamsError(f"lambda must be positive (got {self.lam})")
        object.__setattr__(self, "seed", int(self.seed) & 0xFFFFFFFFFFFFFFFF)

    @property
    def sleep_probability(self) -> float:
        """lambda / (1 + lambda): chance an instruction is a Sleep."""
        return self.lam / (1.0 + self.lam)

    @property
    def subcritical(self) -> bool:
        """True in the regime mu < lambda / (1 + lambda)."""
        return self.mu < self.sleep_probability


# ============================================================================
# INSTRUCTIONS
# ============================================================================

class Instruction(IntEnum):
    """Stack instruction. NULL only ever appears through sleep-masking."""
    JUMP_LEFT = 0
    JUMP_RIGHT = 1
    SLEEP = 2
    NULL = 3

    @property
    def is_jump(self) -> bool:
        return self <= Instruction.JUMP_RIGHT


# ============================================================================
# SITE STATES
# ============================================================================

@dataclass(frozen=True)
class Active:
    """k >= 0 active particles; Active(0) is an empty site."""
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError(f"Active count must be >= 0 (got {self.k})")


@dataclass(frozen=True)
class Sleepy:
    """Exactly one sleeping particle."""


SLEEPY = Sleepy()

SiteState = Union[Active, Sleepy]


# ============================================================================
# CONFIGURATION
# ============================================================================

class Configuration:
    """
    Ring-indexed particle state (the eta of the model).

    Active counts and sleepy flags live in two parallel lists; a sleepy site
    always has active count zero. All site indices are taken modulo n.
    """

    __slots__ = ("n", "active", "sleepy", "particle_total")

    def __init__(self, n: int):
        self.n = n
        self.active: List[int] = [0] * n
        self.sleepy: List[bool] = [False] * n
        self.particle_total = 0

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    @classmethod
    def empty(cls, n: int) -> "Configuration":
        return cls(n)

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "Configuration":
        """All-active configuration with counts[x] particles at x."""
        config = cls(len(counts))
        for x, k in enumerate(counts):
            if k < 0:
                raise ValueError(f"Negative count at site {x}")
            config.active[x] = int(k)
        config.particle_total = sum(config.active)
        return config

    @classmethod
    def from_sites(cls, sites: Sequence[SiteState]) -> "Configuration":
        config = cls(len(sites))
        for x, state in enumerate(sites):
            config.set_site(x, state)
        return config

    @classmethod
    def point_mass(cls, n: int, site: int, count: int) -> "Configuration":
        counts = [0] * n
        counts[site % n] = count
        return cls.from_counts(counts)

    def copy(self) -> "Configuration":
        clone = Configuration(self.n)
        clone.active = list(self.active)
        clone.sleepy = list(self.sleepy)
        clone.particle_total = self.particle_total
        return clone

    # ------------------------------------------------------------------
    # Site access
    # ------------------------------------------------------------------

    def site(self, x: int) -> SiteState:
        x %= self.n
        if self.sleepy[x]:
            return SLEEPY
        return Active(self.active[x])

    def set_site(self, x: int, state: SiteState) -> None:
        """Overwrite one site, keeping particle_total consistent."""
        x %= self.n
        self.particle_total -= self.occupancy(x)
        if isinstance(state, Sleepy):
            self.active[x] = 0
            self.sleepy[x] = True
        else:
            self.active[x] = state.k
            self.sleepy[x] = False
        self.particle_total += self.occupancy(x)

    def occupancy(self, x: int) -> int:
        """Number of particles at x, sleeping or not."""
        x %= self.n
        return 1 if self.sleepy[x] else self.active[x]

    def sites(self) -> Iterator[SiteState]:
        for x in range(self.n):
            yield self.site(x)

    # ------------------------------------------------------------------
    # Aggregates
    # ------------------------------------------------------------------

    def active_sites(self) -> List[int]:
        return [x for x, k in enumerate(self.active) if k > 0]

    @property
    def active_total(self) -> int:
        return sum(self.active)

    @property
    def sleepy_total(self) -> int:
        return sum(self.sleepy)

    def recount(self) -> int:
        """Recompute the particle total from scratch (for invariant checks)."""
        return sum(1 if s else k for k, s in zip(self.active, self.sleepy))

    def key(self) -> Tuple[int, ...]:
        """Hashable canonical form; sleepy sites map to -1 only inside the key."""
        return tuple(-1 if s else k for k, s in zip(self.active, self.sleepy))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.n == other.n and self.active == other.active and self.sleepy == other.sleepy

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        cells = ["z" if s else str(k) for k, s in zip(self.active, self.sleepy)]
        return f"Configuration(n={self.n}, total={self.particle_total}, [{' '.join(cells)}])"


# ============================================================================
# ODOMETER
# ============================================================================

@dataclass
class Odometer:
    """Per-site count of consumed instructions (the odometer h)."""
    h: List[int] = field(default_factory=list)

    @classmethod
    def zeros(cls, n: int) -> "Odometer":
        return cls([0] * n)

    @property
    def n(self) -> int:
        return len(self.h)

    @property
    def total(self) -> int:
        """T = sum over sites of h(x)."""
        return sum(self.h)

    def copy(self) -> "Odometer":
        return Odometer(list(self.h))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.h, dtype=np.int64)

    def dominated_by(self, other: "Odometer") -> bool:
        """Pointwise h(x) <= other.h(x)."""
        return all(a <= b for a, b in zip(self.h, other.h))

    def __getitem__(self, x: int) -> int:
        return self.h[x % len(self.h)]

    def __iter__(self) -> Iterator[int]:
        return iter(self.h)


def counts_from_sites(sites: Iterable[int], n: int) -> List[int]:
    """Occupation counts for a list of (possibly repeated) particle sites."""
    counts = [0] * n
    for x in sites:
        counts[x % n] += 1
    return counts
