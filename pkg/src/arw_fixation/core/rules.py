"""
Primitive ARW transition rules on site-level configurations.

apply_instruction mutates the configuration in place and returns it together
with the effect; callers that need the old state copy first.
"""

import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from numba import njit

from arw_fixation.core.schema import Configuration, Instruction, Params
from arw_fixation.core.stack import (
    JUMP_LEFT,
    JUMP_RIGHT,
    SLEEP,
    STREAM_INITIAL,
    stream_rng,
)


# ============================================================================
# EFFECTS
# ============================================================================

@dataclass(frozen=True)
class Moved:
    dest: int


@dataclass(frozen=True)
class Slept:
    pass


@dataclass(frozen=True)
class NoOp:
    pass


@dataclass(frozen=True)
class Illegal:
    pass


Effect = Union[Moved, Slept, NoOp, Illegal]

SLEPT = Slept()
NO_OP = NoOp()
ILLEGAL = Illegal()

# Integer effect codes used on the hot path; a non-negative code is Moved(code)
EFFECT_SLEPT = -1
EFFECT_NOOP = -2
EFFECT_ILLEGAL = -3


# ============================================================================
# INITIAL CONFIGURATIONS
# ============================================================================

def sample_initial(params: Params) -> Configuration:
    """Independent Bernoulli(mu) occupation per site, from the initial-state stream."""
    rng = stream_rng(params.seed, STREAM_INITIAL)
    occupied = rng.random(params.n) < params.mu
    return Configuration.from_counts(occupied.astype(int).tolist())


def point_mass_initial(params: Params, site: int = 0) -> Configuration:
    """All floor(mu * n) particles stacked on one site."""
    return Configuration.point_mass(params.n, site, math.floor(params.mu * params.n))


# ============================================================================
# TRANSITIONS
# ============================================================================

def apply_code(config: Configuration, x: int, code: int) -> int:
    """
    Apply an instruction code at site x in place.

    Returns the destination site for a jump, else one of the EFFECT_* codes.
    """
    active = config.active
    k = active[x]
    if k == 0:
        return EFFECT_ILLEGAL
    if code == JUMP_LEFT or code == JUMP_RIGHT:
        n = config.n
        dest = (x - 1) % n if code == JUMP_LEFT else (x + 1) % n
        active[x] = k - 1
        if config.sleepy[dest]:
            # Wake-up: the sleeper and the arrival are both active now
            config.sleepy[dest] = False
            active[dest] = 2
        else:
            active[dest] += 1
        return dest
    if code == SLEEP and k == 1:
        active[x] = 0
        config.sleepy[x] = True
        return EFFECT_SLEPT
    return EFFECT_NOOP


@njit(cache=True)
def apply_code_arrays(active: np.ndarray, sleepy: np.ndarray, x: int, code: int) -> int:
    """Compiled apply_code over numpy arrays; same effect codes."""
    k = active[x]
    if k == 0:
        return EFFECT_ILLEGAL
    if code == JUMP_LEFT or code == JUMP_RIGHT:
        n = active.shape[0]
        if code == JUMP_LEFT:
            dest = x - 1 if x > 0 else n - 1
        else:
            dest = x + 1 if x < n - 1 else 0
        active[x] = k - 1
        if sleepy[dest]:
            sleepy[dest] = False
            active[dest] = 2
        else:
            active[dest] += 1
        return dest
    if code == SLEEP and k == 1:
        active[x] = 0
        sleepy[x] = True
        return EFFECT_SLEPT
    return EFFECT_NOOP


def effect_from_code(code: int) -> Effect:
    if code >= 0:
        return Moved(code)
    if code == EFFECT_SLEPT:
        return SLEPT
    if code == EFFECT_NOOP:
        return NO_OP
    return ILLEGAL


def apply_instruction(
    config: Configuration, x: int, instr: Instruction
) -> Tuple[Configuration, Effect]:
    """Apply one instruction at x; Illegal leaves the configuration untouched."""
    x %= config.n
    return config, effect_from_code(apply_code(config, x, int(instr)))


def is_stable(config: Configuration) -> bool:
    """True iff no site holds an active particle."""
    return not any(config.active)

