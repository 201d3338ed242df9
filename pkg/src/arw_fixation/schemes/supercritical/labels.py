"""
Particle-level X/Y labelled configurations for the stabilization loop.

Particles keep an identity here; `site_view` is the site-level projection
and is updated through the same transition rule as the engine, so the two
never disagree. The compiled loop step works on a ParticleArrays copy and
writes its results back with load_arrays.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from arw_fixation.core.errors import OddCycleError
from arw_fixation.core.schema import Configuration


@dataclass
class LabeledConfig:
    """
    Labelled particles on an even cycle with poles 0 and n/2.

    Attributes:
        position: Site of each particle
        is_x: True for X particles (they follow the stack), False for Y
        asleep: Sleep flag of each particle
        at: Particle indices per site, in arrival order
        site_view: Site-level projection (counts and sleepiness)
    """
    n: int
    position: List[int] = field(default_factory=list)
    is_x: List[bool] = field(default_factory=list)
    asleep: List[bool] = field(default_factory=list)
    at: List[List[int]] = field(default_factory=list)
    site_view: Optional[Configuration] = None

    @property
    def poles(self) -> Tuple[int, int]:
        return 0, self.n // 2

    @property
    def particle_count(self) -> int:
        return len(self.position)

    @property
    def active_count(self) -> int:
        return self.asleep.count(False)

    def all_asleep(self) -> bool:
        return all(self.asleep)

    def relabel(self, x_sites: Sequence[int]) -> None:
        """Make particles on `x_sites` X and every other particle Y."""
        chosen = set(x_sites)
        self.is_x = [p in chosen for p in self.position]

    def project(self) -> Configuration:
        """Recompute the site-level configuration from particle records."""
        config = Configuration(self.n)
        for x, occupants in enumerate(self.at):
            if len(occupants) == 1 and self.asleep[occupants[0]]:
                config.sleepy[x] = True
            else:
                config.active[x] = len(occupants)
        config.particle_total = self.particle_count
        return config


def init_labels(config: Configuration) -> LabeledConfig:
    """
    Expand site counts into one record per particle.

    Non-pole particles are labelled X (the Step A convention).

    Raises:
        OddCycleError: If n is odd
    """
    n = config.n
    if n % 2:
        raise OddCycleError(f"The stabilization loop needs an even cycle (got n = {n})")

    state = LabeledConfig(n=n, at=[[] for _ in range(n)], site_view=config.copy())
    for x in range(n):
        sleeping = bool(config.sleepy[x])
        for _ in range(config.occupancy(x)):
            state.at[x].append(len(state.position))
            state.position.append(x)
            state.asleep.append(sleeping)
    state.relabel([x for x in range(n) if x not in (0, n // 2)])
    return state


@dataclass
class ParticleArrays:
    """
    Numpy view of a LabeledConfig for the compiled loop step.

    Particles at each site form a linked list in arrival order: head[x] is
    the first particle at x, nxt[p] the one after p, tail[x] the last (-1 for none).
    """
    active: np.ndarray
    sleepy: np.ndarray
    position: np.ndarray
    is_x: np.ndarray
    asleep: np.ndarray
    head: np.ndarray
    tail: np.ndarray
    nxt: np.ndarray


def to_arrays(labels: LabeledConfig) -> ParticleArrays:
    n = labels.n
    head = np.full(n, -1, dtype=np.int64)
    tail = np.full(n, -1, dtype=np.int64)
    nxt = np.full(max(labels.particle_count, 1), -1, dtype=np.int64)
    for x, occupants in enumerate(labels.at):
        if occupants:
            head[x], tail[x] = occupants[0], occupants[-1]
            for p, q in zip(occupants, occupants[1:]):
                nxt[p] = q
    view = labels.site_view
    return ParticleArrays(
        active=np.asarray(view.active, dtype=np.int64),
        sleepy=np.asarray(view.sleepy, dtype=np.bool_),
        position=np.asarray(labels.position, dtype=np.int64).reshape(-1),
        is_x=np.asarray(labels.is_x, dtype=np.bool_).reshape(-1),
        asleep=np.asarray(labels.asleep, dtype=np.bool_).reshape(-1),
        head=head,
        tail=tail,
        nxt=nxt,
    )


def load_arrays(labels: LabeledConfig, arrays: ParticleArrays) -> None:
    """Copy the compiled step's results back into the particle records."""
    labels.position[:] = arrays.position.tolist()
    labels.asleep[:] = arrays.asleep.tolist()
    for x in range(labels.n):
        occupants = []
        p = int(arrays.head[x])
        while p >= 0:
            occupants.append(p)
            p = int(arrays.nxt[p])
        labels.at[x] = occupants
    view = labels.site_view
    view.active[:] = arrays.active.tolist()
    view.sleepy[:] = arrays.sleepy.tolist()
