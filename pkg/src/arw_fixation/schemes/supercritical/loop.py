"""
The X/Y stabilization loop on an even cycle with poles 0 and n/2.

One round runs Step A (stabilize X particles away from both poles), Step B
(send the particles at 0 out with 0 open and n/2 frozen) and Step C (the
same with the poles swapped). Rounds repeat until every particle sleeps,
the instruction budget runs out or the round cap is reached.

Every topple is a legal ARW topple on the raw stack of params.seed, so the
loop's odometer is dominated by the stabilizing odometer of that stack,
and equals it when the loop ends with every particle asleep.

Usage:
    report = run_loop(Params(n=40, mu=0.9, lam=0.005, seed=1), max_rounds=100)
    print(report.termination, report.rounds_completed, report.total_instructions)
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple, Union

import numpy as np

from arw_fixation.core import config as arw_config
from arw_fixation.core.errors import BudgetExhaustedError
from arw_fixation.core.rules import sample_initial
from arw_fixation.core.schema import Configuration, Odometer, Params
from arw_fixation.core.stack import BLOCK_SIZE, InstructionStack
from arw_fixation.engine import kernels
from arw_fixation.schemes.supercritical.labels import (
    LabeledConfig,
    init_labels,
    load_arrays,
    to_arrays,
)

logger = logging.getLogger(__name__)


class StepVariant(str, Enum):
    A = "A"
    B = "B"
    C = "C"


class Termination(str, Enum):
    """Why run_loop stopped."""
    ALL_ASLEEP = "all_asleep"
    BUDGET_EXCEEDED = "budget_exceeded"
    MAX_ROUNDS = "max_rounds"


# ============================================================================
# DATA CLASSES
# ============================================================================

@dataclass
class LoopState:
    """Labelled particles plus the odometer and stack they are toppled on."""
    labels: LabeledConfig
    odometer: Odometer
    stack: InstructionStack
    total_T: int = 0
    # Loaded instruction block per site, kept across steps
    rows: Optional[np.ndarray] = field(default=None, repr=False)
    row_block: Optional[np.ndarray] = field(default=None, repr=False)


@dataclass
class StepStats:
    """
    Summary of one stabilization step.

    Attributes:
        variant: Which step ran
        instructions: Instructions consumed by the step
        x_count: Number of X particles at the start of the step
        x_at_far_pole: Active X particles on the frozen pole at the end
            (for Step A, active particles on either pole)
        y_all_active: Every Y particle was active at the end
        arrivals_from_below: X arrivals at the far pole from its left neighbour
        arrivals_from_above: X arrivals at the far pole from its right neighbour
    """
    variant: StepVariant
    instructions: int = 0
    x_count: int = 0
    x_at_far_pole: int = 0
    y_all_active: bool = True
    arrivals_from_below: int = 0
    arrivals_from_above: int = 0

    @property
    def both_arcs(self) -> bool:
        return self.arrivals_from_below > 0 and self.arrivals_from_above > 0


@dataclass
class LoopReport:
    """Outcome of run_loop; total_instructions is a lower bound on T."""
    params: Params
    rounds_completed: int
    per_round_active: List[int]
    total_instructions: int
    termination: Termination
    odometer: Odometer
    final: Configuration
    step_stats: List[StepStats] = field(default_factory=list)
    pole_steps: int = 0
    pole_steps_both_arcs: int = 0

    @property
    def all_asleep(self) -> bool:
        return self.termination == Termination.ALL_ASLEEP

    def sustained_fraction(self, threshold: Optional[float] = None) -> float:
        """
        Share of completed rounds that ended with at least `threshold` active particles.

        Args:
            threshold: Active-count threshold (default mu * n / 2)
        """
        if not self.per_round_active:
            return 0.0
        if threshold is None:
            threshold = self.params.mu * self.params.n / 2
        kept = sum(1 for active in self.per_round_active if active >= threshold)
        return kept / len(self.per_round_active)


# ============================================================================
# STABILIZATION STEPS
# ============================================================================

def _step_sites(n: int, variant: StepVariant) -> Tuple[List[int], frozenset, Optional[int]]:
    """X sites, excluded sites and far pole of a step."""
    r = n // 2
    if variant == StepVariant.A:
        return [x for x in range(n) if x not in (0, r)], frozenset((0, r)), None
    if variant == StepVariant.B:
        return [0], frozenset((r,)), r
    return [r], frozenset((0,)), 0


def _load_block(state: LoopState, x: int, block: int) -> None:
    state.rows[x] = state.stack.block_codes(x, block)
    state.row_block[x] = block


def stabilization_step(
    state: LoopState, variant: StepVariant, budget: Optional[int] = None
) -> StepStats:
    """
    Relabel per `variant` and topple allowed sites holding an active X until none remain.

    Sites are chosen leftmost-first. A jump moves the lowest-index active X
    at the site and wakes a sleeper at the destination; a Sleep only takes
    effect on a site holding exactly one particle.

    Args:
        state: Loop state, updated in place
        variant: Step A, B or C
        budget: Cap on state.total_T (default ARW_DEFAULT_BUDGET)

    Returns:
        StepStats of the step

    Raises:
        BudgetExhaustedError: If total_T reaches budget with active X remaining
    """
    budget = arw_config.DEFAULT_BUDGET if budget is None else budget
    labels = state.labels
    n = labels.n
    x_sites, excluded, far = _step_sites(n, variant)
    labels.relabel(x_sites)

    arrays = to_arrays(labels)
    active_x = np.zeros(n, dtype=np.int64)
    np.add.at(active_x, arrays.position[arrays.is_x & ~arrays.asleep], 1)
    allowed = np.ones(n, dtype=np.bool_)
    allowed[list(excluded)] = False
    stats = StepStats(variant=variant, x_count=int(arrays.is_x.sum()))

    h = state.odometer.as_array()
    member = np.zeros(n, dtype=np.bool_)
    tree = np.zeros(n + 1, dtype=np.int64)
    counters = kernels.new_counters(state.total_T)
    kernels.index_build(tree, member, counters, allowed & (active_x > 0))
    if state.rows is None:
        state.rows = np.zeros((n, BLOCK_SIZE), dtype=np.int8)
        state.row_block = np.full(n, -1, dtype=np.int64)
    start_T = state.total_T

    while True:
        status = kernels.loop_step(
            arrays.active, arrays.sleepy, arrays.position, arrays.is_x, arrays.asleep,
            arrays.head, arrays.tail, arrays.nxt, active_x, allowed, h,
            state.rows, state.row_block, member, tree, -1 if far is None else far,
            counters, int(budget),
        )
        if status != kernels.STATUS_REFILL:
            break
        x = int(counters[kernels.C_REFILL])
        _load_block(state, x, int(h[x]) // BLOCK_SIZE)

    load_arrays(labels, arrays)
    state.odometer.h[:] = h.tolist()
    state.total_T = int(counters[kernels.C_T])
    if status == kernels.STATUS_BUDGET:
        raise BudgetExhaustedError(state.total_T, state)

    stats.instructions = state.total_T - start_T
    stats.arrivals_from_below = int(counters[kernels.C_BELOW])
    stats.arrivals_from_above = int(counters[kernels.C_ABOVE])
    position, is_x, asleep, at = labels.position, labels.is_x, labels.asleep, labels.at
    if far is None:
        stats.x_at_far_pole = sum(
            1 for p, x in enumerate(position) if x in excluded and not asleep[p]
        )
    else:
        stats.x_at_far_pole = sum(1 for p in at[far] if is_x[p] and not asleep[p])
    stats.y_all_active = all(is_x[p] or not asleep[p] for p in range(len(position)))
    return stats


# ============================================================================
# LOOP
# ============================================================================

def run_loop(
    params: Params,
    max_rounds: Optional[int] = None,
    budget: Optional[int] = None,
    initial: Optional[Configuration] = None,
    record_steps: bool = False,
) -> LoopReport:
    """
    Repeat Steps A, B and C until every particle sleeps, the budget or max_rounds.

    Args:
        params: Instance parameters (n must be even)
        max_rounds: Round cap (default ARW_MAX_ROUNDS)
        budget: Instruction cap (default ARW_DEFAULT_BUDGET)
        initial: Initial configuration (default sampled from params)
        record_steps: Keep every StepStats in the report

    Raises:
        OddCycleError: If n is odd
    """
    max_rounds = arw_config.DEFAULT_MAX_ROUNDS if max_rounds is None else max_rounds
    budget = arw_config.DEFAULT_BUDGET if budget is None else budget
    if max_rounds < 0:
        raise ValueError(f"max_rounds must be >= 0 (got {max_rounds})")

    config = sample_initial(params) if initial is None else initial
    labels = init_labels(config)
    state = LoopState(
        labels=labels,
        odometer=Odometer.zeros(params.n),
        stack=InstructionStack(params.seed, params.lam),
    )
    rounds = 0
    per_round_active: List[int] = []
    steps: List[StepStats] = []
    pole_steps = both_arcs = 0

    try:
        while True:
            if labels.all_asleep():
                termination = Termination.ALL_ASLEEP
                break
            if rounds >= max_rounds:
                termination = Termination.MAX_ROUNDS
                break
            for variant in StepVariant:
                stats = stabilization_step(state, variant, budget)
                if record_steps:
                    steps.append(stats)
                if variant != StepVariant.A and stats.x_count:
                    pole_steps += 1
                    both_arcs += stats.both_arcs
            rounds += 1
            per_round_active.append(labels.active_count)
    except BudgetExhaustedError:
        termination = Termination.BUDGET_EXCEEDED

    logger.debug(
        f"Loop on n={params.n}: {termination.value} after {rounds} rounds, "
        f"{state.total_T} instructions"
    )
    return LoopReport(
        params=params,
        rounds_completed=rounds,
        per_round_active=per_round_active,
        total_instructions=state.total_T,
        termination=termination,
        odometer=state.odometer,
        final=labels.project(),
        step_stats=steps,
        pole_steps=pole_steps,
        pole_steps_both_arcs=both_arcs,
    )


def sleepy_interior_count(
    state: Union[LoopState, LabeledConfig, Configuration], interval: Tuple[int, int]
) -> int:
    """
    Number of sleepy sites strictly inside the cyclic interval (lo, hi).

    The interval runs from lo up to hi, wrapping past n - 1.
    """
    if isinstance(state, LoopState):
        state = state.labels
    config = state.site_view if isinstance(state, LabeledConfig) else state
    n = config.n
    lo, hi = interval[0] % n, interval[1] % n
    width = (hi - lo) % n
    return sum(1 for d in range(1, width) if config.sleepy[(lo + d) % n])
