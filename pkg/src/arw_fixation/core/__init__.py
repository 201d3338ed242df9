"""Core domain types, instruction stacks and ARW transition rules."""

from arw_fixation.core.schema import (
    Active,
    Configuration,
    Instruction,
    Odometer,
    Params,
    SiteState,
    Sleepy,
    SLEEPY,
)
from arw_fixation.core.stack import InstructionStack, derive_seed
from arw_fixation.core.rules import (
    Effect,
    Illegal,
    Moved,
    NoOp,
    Slept,
    apply_instruction,
    is_stable,
    point_mass_initial,
    sample_initial,
)

__all__ = [
    "Active",
    "Configuration",
    "Instruction",
    "Odometer",
    "Params",
    "SiteState",
    "Sleepy",
    "SLEEPY",
    "InstructionStack",
    "derive_seed",
    "Effect",
    "Illegal",
    "Moved",
    "NoOp",
    "Slept",
    "apply_instruction",
    "is_stable",
    "point_mass_initial",
    "sample_initial",
]
