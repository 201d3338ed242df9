"""Tests for primitive ARW transition rules."""

import math

from arw_fixation.core.rules import (
    ILLEGAL,
    NO_OP,
    SLEPT,
    Moved,
    apply_instruction,
    is_stable,
    point_mass_initial,
    sample_initial,
)
from arw_fixation.core.schema import SLEEPY, Active, Configuration, Instruction, Params


def test_sample_initial_is_deterministic():
    """Same (n, mu, seed) gives identical configurations."""
    params = Params(n=500, mu=0.4, lam=1.0, seed=99)
    assert sample_initial(params) == sample_initial(params)


def test_sample_initial_is_bernoulli():
    """Every site starts with zero or one active particle."""
    config = sample_initial(Params(n=300, mu=0.5, lam=1.0, seed=1))
    assert set(config.active) <= {0, 1}
    assert config.sleepy_total == 0


def test_sample_initial_concentration():
    """Totals for n = 10000, mu = 0.3 fall within 4 sd of 3000."""
    tolerance = 4 * math.sqrt(2100)
    inside = sum(
        abs(sample_initial(Params(n=10_000, mu=0.3, lam=1.0, seed=s)).particle_total - 3000)
        <= tolerance
        for s in range(100)
    )
    assert inside >= 99


def test_sample_initial_tiny_density():
    """A density near zero leaves the cycle almost empty."""
    config = sample_initial(Params(n=100, mu=1e-6, lam=1.0, seed=5))
    assert config.particle_total <= 1


def test_initial_does_not_depend_on_lambda():
    """Initial draws come from their own stream."""
    a = sample_initial(Params(n=64, mu=0.5, lam=0.1, seed=3))
    b = sample_initial(Params(n=64, mu=0.5, lam=7.0, seed=3))
    assert a == b


def test_point_mass_initial():
    """Point mass puts floor(mu n) particles at the origin."""
    config = point_mass_initial(Params(n=10, mu=0.55, lam=1.0))
    assert config.active[0] == 5
    assert config.particle_total == 5


def test_sleep_alone_falls_asleep():
    """Sleep with a solitary active particle makes the site sleepy."""
    config = Configuration.from_counts([1, 0, 0])
    config, effect = apply_instruction(config, 0, Instruction.SLEEP)
    assert effect == SLEPT
    assert config.site(0) == SLEEPY
    assert config.particle_total == 1


def test_sleep_with_company_has_no_effect():
    """Sleep at a doubly occupied site is a no-op."""
    config = Configuration.from_counts([2, 0, 0])
    config, effect = apply_instruction(config, 0, Instruction.SLEEP)
    assert effect == NO_OP
    assert config.site(0) == Active(2)


def test_jump_wakes_sleeper():
    """An arrival at a sleepy site yields Active(2)."""
    config = Configuration.from_sites([Active(1), SLEEPY, Active(0)])
    config, effect = apply_instruction(config, 0, Instruction.JUMP_RIGHT)
    assert effect == Moved(1)
    assert config.site(0) == Active(0)
    assert config.site(1) == Active(2)
    assert config.particle_total == config.recount() == 2


def test_jump_left_wraps_around():
    """Jumping left from site 0 lands on site n - 1."""
    config = Configuration.from_counts([1, 0, 0, 0])
    config, effect = apply_instruction(config, 0, Instruction.JUMP_LEFT)
    assert effect == Moved(3)
    assert config.active == [0, 0, 0, 1]


def test_empty_site_is_illegal():
    """Any instruction at a site without active particles is illegal."""
    for instr in Instruction:
        config = Configuration.from_sites([Active(0), SLEEPY])
        before = config.copy()
        for x in (0, 1):
            _, effect = apply_instruction(config, x, instr)
            assert effect == ILLEGAL
        assert config == before


def test_null_is_noop():
    """A nulled instruction at an active site changes nothing."""
    config = Configuration.from_counts([1, 0])
    config, effect = apply_instruction(config, 0, Instruction.NULL)
    assert effect == NO_OP
    assert config.active == [1, 0]


def test_is_stable():
    """Stable iff no site is active."""
    assert is_stable(Configuration.empty(5))
    assert is_stable(Configuration.from_sites([SLEEPY, Active(0), Active(0)]))
    assert not is_stable(Configuration.from_counts([0, 1, 0]))
