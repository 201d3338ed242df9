"""
Executable checks of the abelian property, least action and sleep-monotonicity.

Each check returns a Verdict rather than raising; budget overruns make a
check INDETERMINATE, never VIOLATED.
"""

import logging
import random
from enum import Enum
from typing import Iterable, Optional, Tuple

from arw_fixation.core.errors import InvalidMaskError
from arw_fixation.core.rules import sample_initial
from arw_fixation.core.schema import Configuration, Params
from arw_fixation.core.stack import STREAM_POLICY, InstructionStack, derive_seed
from arw_fixation.engine.policies import LeftmostUnstable, Policy
from arw_fixation.engine.toppling import (
    BudgetExceeded,
    TopplingState,
    stabilize,
    topple,
)

logger = logging.getLogger(__name__)

CHECK_BUDGET = 10_000_000


class Verdict(str, Enum):
    """Result of one invariant check."""
    HOLDS = "holds"
    VIOLATED = "violated"
    INDETERMINATE = "indeterminate"
    INVALID_MASK = "invalid_mask"


def _initial(params: Params, initial: Optional[Configuration]) -> Configuration:
    return sample_initial(params) if initial is None else initial


def check_abelian(
    params: Params,
    policy_a: Policy,
    policy_b: Policy,
    budget: int = CHECK_BUDGET,
    initial: Optional[Configuration] = None,
) -> Verdict:
    """Both policies on the identical stack give equal final state, odometer and T."""
    stack = InstructionStack(params.seed, params.lam)
    start = _initial(params, initial)

    first = stabilize(params, policy_a, budget, initial=start, stack=stack)
    second = stabilize(params, policy_b, budget, initial=start, stack=stack)
    if isinstance(first, BudgetExceeded) or isinstance(second, BudgetExceeded):
        return Verdict.INDETERMINATE

    same = (
        first.T == second.T
        and first.final == second.final
        and first.odometer.h == second.odometer.h
    )
    if not same:
        logger.warning(f"Abelian property violated for {params}: T={first.T} vs T={second.T}")
    return Verdict.HOLDS if same else Verdict.VIOLATED


def random_legal_prefix(
    state: TopplingState, length: int, prefix_seed: int = 0
) -> TopplingState:
    """Topple up to `length` uniformly chosen unstable sites; stops early when stable."""
    rng = random.Random(derive_seed(prefix_seed, STREAM_POLICY, 1))
    active = state.config.active
    for _ in range(length):
        unstable = [x for x, k in enumerate(active) if k > 0]
        if not unstable:
            break
        topple(state, rng.choice(unstable))
    return state


def check_least_action(
    params: Params,
    prefix_len: int,
    budget: int = CHECK_BUDGET,
    prefix_seed: int = 0,
    initial: Optional[Configuration] = None,
) -> Verdict:
    """Any legal prefix's odometer is dominated by the stabilizing odometer."""
    if prefix_len < 0:
        raise ValueError(f"prefix_len must be >= 0 (got {prefix_len})")
    stack = InstructionStack(params.seed, params.lam)
    start = _initial(params, initial)

    full = stabilize(params, LeftmostUnstable(), budget, initial=start, stack=stack)
    if isinstance(full, BudgetExceeded):
        return Verdict.INDETERMINATE

    prefix = random_legal_prefix(
        TopplingState.fresh(start.copy(), stack), prefix_len, prefix_seed
    )
    return Verdict.HOLDS if prefix.odometer.dominated_by(full.odometer) else Verdict.VIOLATED


def check_sleep_monotonicity(
    params: Params,
    mask_fraction: float,
    budget: int = CHECK_BUDGET,
    mask_seed: int = 0,
    mask: Iterable[Tuple[int, int]] = (),
    policy: Optional[Policy] = None,
    initial: Optional[Configuration] = None,
) -> Verdict:
    """
    Ignoring sleeps can only increase the odometer.

    Args:
        params: Instance parameters
        mask_fraction: Chance each Sleep draw is nulled
        budget: Cap for each of the two runs
        mask_seed: Seed of the mask coins
        mask: Extra explicit (site, index) pairs to null
        policy: Toppling policy for both runs (default RandomUnstable(0))
        initial: Initial configuration (default sampled from params)

    Returns:
        INVALID_MASK if `mask` names a non-Sleep draw, INDETERMINATE if the
        unmasked run overruns or the masked run overruns below h
    """
    if not 0.0 <= mask_fraction <= 1.0:
        raise ValueError(f"mask_fraction must lie in [0, 1] (got {mask_fraction})")
    stack = InstructionStack(params.seed, params.lam)
    try:
        masked_stack = stack.masked(mask_fraction, mask_seed).with_mask(mask)
    except InvalidMaskError as e:
        logger.warning(f"Rejected sleep mask: {e.message}")
        return Verdict.INVALID_MASK

    start = _initial(params, initial)
    plain = stabilize(params, policy, budget, initial=start, stack=stack)
    if isinstance(plain, BudgetExceeded):
        return Verdict.INDETERMINATE

    masked = stabilize(params, policy, budget, initial=start, stack=masked_stack)
    dominates = plain.odometer.dominated_by(masked.odometer)
    if isinstance(masked, BudgetExceeded):
        return Verdict.HOLDS if dominates else Verdict.INDETERMINATE
    return Verdict.HOLDS if dominates else Verdict.VIOLATED
