"""
Phase two: barrier/trap exploration around one source, then settlement.

Exploration walks one particle at a time from the centre using fresh jump
instructions, reading (but ignoring) sleeps, until it reaches barrier a or
b. Scanning back from the hit barrier toward the centre, the first site
whose instruction just before the particle's final exit was a Sleep
becomes that particle's trap and the new barrier.

Settlement replays each path over a stack that nulls every sleep except
the designated trap sleeps, so each particle falls asleep at its trap.
"""

import logging
from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from arw_fixation.core.errors import TrapCollisionError
from arw_fixation.core.rules import EFFECT_SLEPT
from arw_fixation.core.schema import Configuration, Odometer, counts_from_sites
from arw_fixation.core.stack import BLOCK_SIZE, InstructionStack
from arw_fixation.engine import kernels
from arw_fixation.engine.toppling import TopplingState, topple

logger = logging.getLogger(__name__)

MAX_EXPLORE_STEPS = 50_000_000


# ============================================================================
# DATA CLASSES
# ============================================================================

@dataclass(frozen=True)
class StackSegment:
    """
    View of the stack around one source.

    Offsets are relative to `center`; exploration at offset d starts at
    instruction base[site] + 1, i.e. just past whatever earlier phases consumed.
    """
    stack: InstructionStack
    n: int
    center: int = 0
    base: Optional[Sequence[int]] = None

    @classmethod
    def standalone(cls, seed: int, lam: float, r: int) -> "StackSegment":
        """Fresh segment on a ring wide enough for a window of width r."""
        return cls(InstructionStack(seed, lam), n=2 * r + 2, center=0)

    def site(self, offset: int) -> int:
        return (self.center + offset) % self.n

    def first_index(self, offset: int) -> int:
        if self.base is None:
            return 1
        return self.base[self.site(offset)] + 1


@dataclass(frozen=True)
class Trap:
    offset: int
    site: int
    sleep_index: int


@dataclass
class TrapRun:
    """Barrier sequences, traps and outcome of one trap-setting run."""
    r: int
    m: int
    a: List[int] = field(default_factory=list)
    b: List[int] = field(default_factory=list)
    traps: List[Trap] = field(default_factory=list)
    hit_left: List[bool] = field(default_factory=list)
    gaps: List[int] = field(default_factory=list)
    explored: int = 0
    success: bool = False
    failure: Optional[str] = None

    @property
    def trap_sleeps(self) -> FrozenSet[Tuple[int, int]]:
        return frozenset((t.site, t.sleep_index) for t in self.traps)


@dataclass
class Settlement:
    config: Configuration
    odometer: Odometer
    T2: int


# ============================================================================
# TRAP SETTING
# ============================================================================

def set_traps(
    r: int, m: int, segment: StackSegment, max_steps: int = MAX_EXPLORE_STEPS
) -> TrapRun:
    """
    Run the trap-setting exploration for m particles at the centre.

    Args:
        r: Window width (even); initial barriers are -r/2 and r/2
        m: Number of particles at the centre
        segment: Stack view around the centre
        max_steps: Exploration read cap; exceeding it counts as failure

    Returns:
        TrapRun; success iff every particle found a trap (site 0 excluded)
    """
    if r % 2 or r < 2:
        raise ValueError(f"r must be a positive even number (got {r})")
    if m < 0:
        raise ValueError(f"m must be >= 0 (got {m})")

    a, b = -(r // 2), r // 2
    run = TrapRun(r=r, m=m, a=[a], b=[b])
    site = segment.site
    half = r // 2
    raw = segment.stack.unmasked()
    rows = np.zeros((r + 1, BLOCK_SIZE), dtype=np.int8)
    row_block = np.full(r + 1, -1, dtype=np.int64)
    pointer = np.array(
        [segment.first_index(d) for d in range(-half, half + 1)], dtype=np.int64
    )
    pending = np.zeros(r + 1, dtype=np.bool_)
    candidate = np.full(r + 1, -1, dtype=np.int64)
    walk = np.zeros(kernels.WALK_SLOTS, dtype=np.int64)

    for i in range(m):
        # Only this particle's exits can make a trap
        pending[:] = False
        candidate[:] = -1
        walk[kernels.WALK_POS] = 0
        while True:
            status = kernels.explore(
                rows, row_block, pointer, pending, candidate, a, b, half, walk, max_steps
            )
            if status != kernels.STATUS_REFILL:
                break
            k = int(walk[kernels.WALK_REFILL]) + half
            block = (int(pointer[k]) - 1) // BLOCK_SIZE
            rows[k] = raw.block_codes(site(k - half), block)
            row_block[k] = block
        run.explored = int(walk[kernels.WALK_STEPS])
        if status == kernels.STATUS_BUDGET:
            run.failure = f"exploration exceeded {max_steps} reads at particle {i + 1}"
            return run

        left = int(walk[kernels.WALK_POS]) == a
        scan = range(a + 1, 0) if left else range(b - 1, 0, -1)
        trap_offset = next((v for v in scan if candidate[v + half] >= 0), None)
        if trap_offset is None:
            run.hit_left.append(left)
            run.failure = f"no trap between barrier and centre for particle {i + 1}"
            return run

        sleep_index = int(candidate[trap_offset + half])
        run.traps.append(Trap(trap_offset, site(trap_offset), sleep_index))
        run.hit_left.append(left)
        if left:
            run.gaps.append(trap_offset - a)
            a = trap_offset
        else:
            run.gaps.append(b - trap_offset)
            b = trap_offset
        run.a.append(a)
        run.b.append(b)

    run.success = True
    return run


# ============================================================================
# SETTLEMENT
# ============================================================================

def run_traps(
    trap_run: TrapRun, segment: StackSegment, state: Optional[TopplingState] = None
) -> Settlement:
    """
    Replay each explored path and execute its designated trap sleep.

    When `state` is given it must hold the m particles at the centre and a
    stack that nulls every sleep except the trap sleeps; otherwise a fresh
    state is built on the segment ring.

    Raises:
        TrapCollisionError: If a particle is not alone at its trap
    """
    if not trap_run.success:
        raise ValueError(f"Cannot settle a failed trap run ({trap_run.failure})")

    if state is None:
        counts = counts_from_sites([segment.center] * trap_run.m, segment.n)
        stack = segment.stack.ignoring_sleeps(spared=trap_run.trap_sleeps)
        state = TopplingState.fresh(Configuration.from_counts(counts), stack)

    h = state.odometer.h
    start_T = state.total_T
    limit = start_T + trap_run.explored + trap_run.m

    for trap in trap_run.traps:
        pos = segment.center
        while True:
            j = h[pos] + 1
            topple(state, pos)
            effect = state.last_effect
            if pos == trap.site and j == trap.sleep_index:
                if effect != EFFECT_SLEPT:
                    raise TrapCollisionError(trap.site, trap.sleep_index)
                break
            if effect >= 0:
                pos = effect
            if state.total_T > limit:
                raise TrapCollisionError(
                    trap.site, trap.sleep_index, "Replay diverged from the explored path"
                )

    return Settlement(config=state.config, odometer=state.odometer, T2=state.total_T - start_T)
