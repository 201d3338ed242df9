"""Toppling engine, policies and invariant checks."""

from arw_fixation.engine.policies import (
    LeftmostUnstable,
    Policy,
    RandomUnstable,
    Restricted,
    SweepCyclic,
    policy_from_name,
)
from arw_fixation.engine.toppling import (
    BudgetExceeded,
    Outcome,
    Stabilized,
    TopplingState,
    restricted_stabilize,
    stabilize,
    stabilize_state,
    topple,
)
from arw_fixation.engine.checks import (
    Verdict,
    check_abelian,
    check_least_action,
    check_sleep_monotonicity,
)

__all__ = [
    "LeftmostUnstable",
    "Policy",
    "RandomUnstable",
    "Restricted",
    "SweepCyclic",
    "policy_from_name",
    "BudgetExceeded",
    "Outcome",
    "Stabilized",
    "TopplingState",
    "restricted_stabilize",
    "stabilize",
    "stabilize_state",
    "topple",
    "Verdict",
    "check_abelian",
    "check_least_action",
    "check_sleep_monotonicity",
]
