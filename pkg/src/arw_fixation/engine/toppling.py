"""
Policy-driven toppling engine.

Every topple consumes instruction (x, h(x) + 1) from the stack, applies it,
and advances the odometer and total T by one, whether or not the
instruction changed the configuration.

Runs without a trace or a site filter go through the compiled kernel in
engine.kernels; traced or filtered runs take the interpreted loop, which
topples the same sites in the same order.

Usage:
    outcome = stabilize(Params(n=64, mu=0.3, lam=1.0, seed=7), RandomUnstable(1))
    if isinstance(outcome, Stabilized):
        print(outcome.T)
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Union

import numpy as np
from sortedcontainers import SortedSet

from arw_fixation.core import config as arw_config
from arw_fixation.core.errors import BudgetExhaustedError, IllegalToppleError
from arw_fixation.core.rules import EFFECT_ILLEGAL, apply_code, sample_initial
from arw_fixation.core.schema import Configuration, Odometer, Params
from arw_fixation.core.stack import BLOCK_SIZE, InstructionStack
from arw_fixation.engine import kernels
from arw_fixation.engine.policies import (
    Policy,
    RandomUnstable,
    allowed_sites,
    kernel_mode,
    make_selector,
)

logger = logging.getLogger(__name__)

# Site-level filter: may site x be toppled right now?
SiteFilter = Callable[[Configuration, int], bool]


# ============================================================================
# STATE AND OUTCOMES
# ============================================================================

@dataclass
class TopplingState:
    """Configuration, odometer and stack of one run; total_T == odometer.total."""
    config: Configuration
    odometer: Odometer
    stack: InstructionStack
    total_T: int = 0
    trace: Optional[List[int]] = None
    last_effect: int = 0

    @classmethod
    def fresh(
        cls, config: Configuration, stack: InstructionStack, record_trace: bool = False
    ) -> "TopplingState":
        return cls(
            config=config,
            odometer=Odometer.zeros(config.n),
            stack=stack,
            trace=[] if record_trace else None,
        )


@dataclass
class Stabilized:
    T: int
    final: Configuration
    odometer: Odometer


@dataclass
class BudgetExceeded:
    """Censored run: T_at_cap is a lower bound on the true T."""
    T_at_cap: int
    partial: Configuration
    odometer: Odometer = field(default_factory=Odometer)


Outcome = Union[Stabilized, BudgetExceeded]


# ============================================================================
# TOPPLING
# ============================================================================

def topple(state: TopplingState, x: int) -> TopplingState:
    """
    Consume and apply the next instruction at x.

    The effect code (destination site, or an EFFECT_* constant) is left in
    state.last_effect.

    Raises:
        IllegalToppleError: If x holds no active particle
    """
    x %= state.config.n
    if state.config.active[x] == 0:
        raise IllegalToppleError(x)
    h = state.odometer.h
    j = h[x] + 1
    state.last_effect = apply_code(state.config, x, state.stack.draw_code(x, j))
    h[x] = j
    state.total_T += 1
    if state.trace is not None:
        state.trace.append(x)
    return state


def _drive_compiled(
    state: TopplingState, policy: Policy, budget: int, eligible_site: List[bool]
) -> bool:
    config = state.config
    stack = state.stack
    n = config.n
    active = np.asarray(config.active, dtype=np.int64)
    sleepy = np.asarray(config.sleepy, dtype=np.bool_)
    h = state.odometer.as_array()
    eligible = np.asarray(eligible_site, dtype=np.bool_)
    rows = np.zeros((n, BLOCK_SIZE), dtype=np.int8)
    row_block = np.full(n, -1, dtype=np.int64)
    member = np.zeros(n, dtype=np.bool_)
    tree = np.zeros(n + 1, dtype=np.int64)
    counters = kernels.new_counters(state.total_T)
    kernels.index_build(tree, member, counters, eligible & (active > 0))
    mode, feed = kernel_mode(policy)
    uniforms = feed.batch() if feed is not None else np.zeros(0)

    while True:
        status = kernels.drive(
            active, sleepy, h, rows, row_block, eligible, member, tree, mode, uniforms,
            counters, int(budget),
        )
        if status == kernels.STATUS_REFILL:
            x = int(counters[kernels.C_REFILL])
            block = int(h[x]) // BLOCK_SIZE
            rows[x] = stack.block_codes(x, block)
            row_block[x] = block
        elif status == kernels.STATUS_UNIFORMS:
            uniforms = feed.batch()
            counters[kernels.C_UNIFORM] = 0
        else:
            break

    config.active[:] = active.tolist()
    config.sleepy[:] = sleepy.tolist()
    state.odometer.h[:] = h.tolist()
    state.total_T = int(counters[kernels.C_T])
    return status == kernels.STATUS_DONE


def _drive(
    state: TopplingState,
    policy: Policy,
    budget: int,
    allowed: Optional[Iterable[int]] = None,
    site_filter: Optional[SiteFilter] = None,
) -> bool:
    """
    Topple policy-selected sites until none is eligible or total_T hits budget.

    Returns True when no eligible site remains.
    """
    config = state.config
    n = config.n
    active = config.active
    h = state.odometer.h
    draw = state.stack.draw_code
    trace = state.trace

    restricted = allowed_sites(policy)
    if allowed is not None:
        allowed = frozenset(x % n for x in allowed)
        restricted = allowed if restricted is None else restricted & allowed
    eligible_site = [True] * n if restricted is None else [x in restricted for x in range(n)]
    if site_filter is None and trace is None:
        return _drive_compiled(state, policy, budget, eligible_site)

    if site_filter is None:
        def eligible(x: int) -> bool:
            return eligible_site[x] and active[x] > 0
    else:
        def eligible(x: int) -> bool:
            return eligible_site[x] and active[x] > 0 and site_filter(config, x)

    select = make_selector(policy)
    index = SortedSet(x for x in range(n) if eligible(x))
    T = state.total_T

    while index:
        if T >= budget:
            state.total_T = T
            return False
        x = select(index)
        j = h[x] + 1
        dest = apply_code(config, x, draw(x, j))
        if dest == EFFECT_ILLEGAL:
            raise IllegalToppleError(x, f"Policy selected site {x} with no active particle")
        h[x] = j
        T += 1
        if trace is not None:
            trace.append(x)
        if not eligible(x):
            index.discard(x)
        if dest >= 0 and eligible(dest):
            index.add(dest)

    state.total_T = T
    return True


def stabilize_state(
    state: TopplingState, policy: Optional[Policy] = None, budget: Optional[int] = None
) -> Outcome:
    """Run an existing state to stability under an unrestricted policy."""
    policy = policy if policy is not None else RandomUnstable(0)
    if allowed_sites(policy) is not None:
        raise ValueError("stabilize needs an unrestricted policy; use restricted_stabilize")
    budget = arw_config.DEFAULT_BUDGET if budget is None else budget
    if budget < 0:
        raise ValueError(f"budget must be >= 0 (got {budget})")

    if _drive(state, policy, budget):
        return Stabilized(T=state.total_T, final=state.config, odometer=state.odometer)
    logger.debug(f"Budget of {budget} instructions reached with {state.config.active_total} active")
    return BudgetExceeded(T_at_cap=state.total_T, partial=state.config, odometer=state.odometer)


def stabilize(
    params: Params,
    policy: Optional[Policy] = None,
    budget: Optional[int] = None,
    initial: Optional[Configuration] = None,
    stack: Optional[InstructionStack] = None,
) -> Outcome:
    """
    Stabilize an ARW instance from its (sampled or given) initial configuration.

    Args:
        params: Cycle size, density, sleep rate and seed
        policy: Toppling policy (default RandomUnstable(0))
        budget: Instruction cap (default ARW_DEFAULT_BUDGET)
        initial: Initial configuration (default sample_initial(params)); copied
        stack: Instruction stack (default the unmasked stack of params.seed)

    Returns:
        Stabilized with the exact T, or BudgetExceeded at the cap
    """
    config = sample_initial(params) if initial is None else initial.copy()
    stack = InstructionStack(params.seed, params.lam) if stack is None else stack
    state = TopplingState.fresh(config, stack)
    return stabilize_state(state, policy, budget)


def restricted_stabilize(
    state: TopplingState,
    allowed: Iterable[int],
    stop_predicate: Optional[SiteFilter] = None,
    budget: Optional[int] = None,
    policy: Optional[Policy] = None,
) -> TopplingState:
    """
    Topple only sites in `allowed` until none of them is toppleable.

    Particles on disallowed sites are frozen. `stop_predicate(config, x)`
    further filters which allowed sites count as toppleable; it must depend
    only on the state at x.

    Raises:
        BudgetExhaustedError: If total_T reaches budget first
    """
    allowed = list(allowed)
    if not allowed:
        raise ValueError("restricted_stabilize needs at least one allowed site")
    policy = policy if policy is not None else RandomUnstable(0)
    budget = arw_config.DEFAULT_BUDGET if budget is None else budget

    if not _drive(state, policy, budget, allowed=allowed, site_filter=stop_predicate):
        raise BudgetExhaustedError(state.total_T, state)
    return state

