"""
Full gather-and-trap stabilization of a subcritical instance.

Phase one gathers every particle onto a source. Phase two sets traps in a
window of width r around each source and settles the particles there. If
any window fails, the remaining particles are stabilized by the engine
over a stack that keeps every sleep the scheme has not yet consumed, so
the total stays a valid upper bound on T.

Usage:
    report = full_scheme(Params(n=512, mu=0.2, lam=1.0, seed=3), c0=4.0)
    print(report.T, report.overall_success)
"""

import logging
from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Tuple

from arw_fixation.core import config as arw_config
from arw_fixation.core.errors import BudgetExhaustedError
from arw_fixation.core.schema import Configuration, Odometer, Params
from arw_fixation.core.stack import InstructionStack
from arw_fixation.engine.policies import RandomUnstable
from arw_fixation.engine.toppling import BudgetExceeded, stabilize_state
from arw_fixation.schemes.subcritical.gather import gather_phase
from arw_fixation.schemes.subcritical.layout import SourceLayout, make_layout
from arw_fixation.schemes.subcritical.traps import (
    StackSegment,
    TrapRun,
    run_traps,
    set_traps,
)

logger = logging.getLogger(__name__)


@dataclass
class PhaseReport:
    """Instruction counts and per-source outcomes of one scheme run."""
    layout: SourceLayout
    T1: int
    T2: int
    T_fallback: int
    per_interval_success: List[bool]
    source_counts: List[int]
    trap_runs: List[TrapRun]
    final: Configuration
    odometer: Odometer
    scheme_stack: InstructionStack
    spared: FrozenSet[Tuple[int, int]] = field(default_factory=frozenset)

    @property
    def overall_success(self) -> bool:
        return all(self.per_interval_success)

    @property
    def T(self) -> int:
        return self.T1 + self.T2 + self.T_fallback

    @property
    def hit_left(self) -> List[bool]:
        return [hit for run in self.trap_runs for hit in run.hit_left]

    @property
    def gaps(self) -> List[int]:
        return [gap for run in self.trap_runs for gap in run.gaps]


def full_scheme(
    params: Params,
    c0: Optional[float] = None,
    budget: Optional[int] = None,
    initial: Optional[Configuration] = None,
) -> PhaseReport:
    """
    Gather onto sources, set and run traps, and fall back to the engine on failure.

    Args:
        params: Instance parameters (the stack is that of params.seed)
        c0: Interval coefficient (default ARW_DEFAULT_C0)
        budget: Instruction cap over all phases (default ARW_DEFAULT_BUDGET)
        initial: Initial configuration (default sampled from params)

    Returns:
        PhaseReport; `scheme_stack` is the sleep-masked stack on which
        engine stabilization reproduces the report's odometer exactly

    Raises:
        LayoutTooCoarseError: If the layout cannot be built
        BudgetExhaustedError: If the budget runs out
    """
    c0 = arw_config.DEFAULT_C0 if c0 is None else c0
    budget = arw_config.DEFAULT_BUDGET if budget is None else budget
    layout = make_layout(params.n, c0)
    stack = InstructionStack(params.seed, params.lam)

    logger.debug(f"Layout: K={layout.K}, interval_len={layout.interval_len}, r={layout.r}")
    gathered = gather_phase(params, layout, stack=stack, initial=initial, budget=budget)
    state = gathered.state
    base = tuple(state.odometer.h)

    segments = [StackSegment(stack, layout.n, z, base) for z in layout.sources]
    trap_runs = [
        set_traps(layout.r, count, segment)
        for count, segment in zip(gathered.source_counts, segments)
    ]
    success = [run.success for run in trap_runs]
    spared = frozenset().union(*(run.trap_sleeps for run in trap_runs if run.success))

    state.stack = stack.ignoring_sleeps(spared=spared)
    for run, segment in zip(trap_runs, segments):
        if run.success:
            run_traps(run, segment, state)
    T2 = state.total_T - gathered.T1

    T_fallback = 0
    if not all(success):
        failed = success.count(False)
        logger.info(f"Trap setting failed at {failed}/{layout.K} sources; engine completes the run")
        state.stack = stack.with_prefix(state.odometer.h, spared=spared)
        before = state.total_T
        outcome = stabilize_state(state, RandomUnstable(params.seed), budget)
        if isinstance(outcome, BudgetExceeded):
            raise BudgetExhaustedError(outcome.T_at_cap, state)
        T_fallback = state.total_T - before
    elif state.total_T > budget:
        raise BudgetExhaustedError(state.total_T, state)

    scheme_stack = state.stack
    if all(success):
        scheme_stack = stack.with_prefix(state.odometer.h, spared=spared)

    return PhaseReport(
        layout=layout,
        T1=gathered.T1,
        T2=T2,
        T_fallback=T_fallback,
        per_interval_success=success,
        source_counts=gathered.source_counts,
        trap_runs=trap_runs,
        final=state.config,
        odometer=state.odometer,
        scheme_stack=scheme_stack,
        spared=spared,
    )
