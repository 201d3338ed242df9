"""Gather-and-trap stabilization scheme for the subcritical regime."""

from arw_fixation.schemes.subcritical.layout import SourceLayout, hit_prob, make_layout
from arw_fixation.schemes.subcritical.gather import GatherResult, gather_phase
from arw_fixation.schemes.subcritical.traps import (
    Settlement,
    StackSegment,
    Trap,
    TrapRun,
    run_traps,
    set_traps,
)
from arw_fixation.schemes.subcritical.scheme import PhaseReport, full_scheme

__all__ = [
    "SourceLayout",
    "hit_prob",
    "make_layout",
    "GatherResult",
    "gather_phase",
    "Settlement",
    "StackSegment",
    "Trap",
    "TrapRun",
    "run_traps",
    "set_traps",
    "PhaseReport",
    "full_scheme",
]
