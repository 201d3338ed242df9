"""X/Y stabilization loop for the supercritical regime."""

from arw_fixation.schemes.supercritical.labels import LabeledConfig, init_labels
from arw_fixation.schemes.supercritical.loop import (
    LoopReport,
    LoopState,
    StepStats,
    StepVariant,
    Termination,
    run_loop,
    sleepy_interior_count,
    stabilization_step,
)

__all__ = [
    "LabeledConfig",
    "init_labels",
    "LoopReport",
    "LoopState",
    "StepStats",
    "StepVariant",
    "Termination",
    "run_loop",
    "sleepy_interior_count",
    "stabilization_step",
]
