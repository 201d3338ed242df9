"""Phase one: walk every particle to a source with all sleeps ignored."""

import logging
from dataclasses import dataclass
from typing import List, Optional

from arw_fixation.core import config as arw_config
from arw_fixation.core.rules import sample_initial
from arw_fixation.core.schema import Configuration, Params
from arw_fixation.core.stack import InstructionStack
from arw_fixation.engine.policies import LeftmostUnstable
from arw_fixation.engine.toppling import TopplingState, restricted_stabilize
from arw_fixation.schemes.subcritical.layout import SourceLayout

logger = logging.getLogger(__name__)


@dataclass
class GatherResult:
    """State after phase one; state.odometer holds the gather odometer."""
    state: TopplingState
    T1: int
    source_counts: List[int]

    @property
    def config(self) -> Configuration:
        return self.state.config


def gather_phase(
    params: Params,
    layout: SourceLayout,
    stack: Optional[InstructionStack] = None,
    initial: Optional[Configuration] = None,
    budget: Optional[int] = None,
) -> GatherResult:
    """
    Topple every non-source site, ignoring sleeps, until all particles sit on sources.

    Particles that start on a source never move.

    Raises:
        BudgetExhaustedError: If the gather overruns the budget
    """
    stack = InstructionStack(params.seed, params.lam) if stack is None else stack
    config = sample_initial(params) if initial is None else initial.copy()
    state = TopplingState.fresh(config, stack.ignoring_sleeps())
    budget = arw_config.DEFAULT_BUDGET if budget is None else budget

    non_sources = [x for x in range(layout.n) if not layout.is_source(x)]
    if config.particle_total and non_sources:
        restricted_stabilize(state, non_sources, budget=budget, policy=LeftmostUnstable())

    counts = [state.config.active[z] for z in layout.sources]
    logger.debug(f"Gathered {sum(counts)} particles onto {layout.K} sources in {state.total_T}")
    return GatherResult(state=state, T1=state.total_T, source_counts=counts)
