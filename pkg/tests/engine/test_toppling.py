"""Tests for the toppling engine."""

import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from arw_fixation.core.errors import BudgetExhaustedError, IllegalToppleError
from arw_fixation.core.rules import EFFECT_NOOP, EFFECT_SLEPT, is_stable, sample_initial
from arw_fixation.core.schema import SLEEPY, Active, Configuration, Instruction, Params
from arw_fixation.core.stack import BLOCK_SIZE, InstructionStack
from arw_fixation.engine.policies import (
    LeftmostUnstable,
    RandomUnstable,
    Restricted,
    SweepCyclic,
)
from arw_fixation.engine.toppling import (
    BudgetExceeded,
    Stabilized,
    TopplingState,
    restricted_stabilize,
    stabilize,
    stabilize_state,
    topple,
)


def test_topple_sleep_alone(seed_where):
    """A solitary particle reading Sleep falls asleep and h(x) advances."""
    seed = seed_where(Instruction.SLEEP)
    state = TopplingState.fresh(
        Configuration.from_counts([1, 0, 0, 0]), InstructionStack(seed, 1.0)
    )
    topple(state, 0)

    assert state.config.site(0) == SLEEPY
    assert state.odometer.h == [1, 0, 0, 0]
    assert state.total_T == 1
    assert state.last_effect == EFFECT_SLEPT


def test_topple_sleep_with_company_still_counts(seed_where):
    """A failed sleep attempt is still a consumed instruction."""
    seed = seed_where(Instruction.SLEEP)
    state = TopplingState.fresh(
        Configuration.from_counts([2, 0, 0, 0]), InstructionStack(seed, 1.0)
    )
    topple(state, 0)

    assert state.config.site(0) == Active(2)
    assert state.odometer[0] == 1
    assert state.total_T == 1
    assert state.last_effect == EFFECT_NOOP


def test_topple_empty_site_is_illegal():
    """Toppling an empty or sleepy site raises IllegalToppleError."""
    state = TopplingState.fresh(
        Configuration.from_sites([Active(0), SLEEPY]), InstructionStack(0, 1.0)
    )
    with pytest.raises(IllegalToppleError) as exc:
        topple(state, 1)
    assert exc.value.site == 1
    assert state.total_T == 0


def test_topple_records_trace():
    """Traced states record every toppled site."""
    state = TopplingState.fresh(
        Configuration.from_counts([3, 0, 0]), InstructionStack(0, 1.0), record_trace=True
    )
    topple(state, 0)
    topple(state, 0)
    assert state.trace == [0, 0]


def test_empty_configuration_stabilizes_immediately():
    """No particles means T = 0."""
    params = Params(n=10, mu=0.5, lam=1.0, seed=1)
    outcome = stabilize(params, initial=Configuration.empty(10))
    assert isinstance(outcome, Stabilized)
    assert outcome.T == 0


def test_stabilized_outcome_is_consistent(small_params):
    """Final state is stable, mass is conserved and T equals the odometer sum."""
    outcome = stabilize(small_params, LeftmostUnstable())
    assert isinstance(outcome, Stabilized)
    assert is_stable(outcome.final)
    assert outcome.T == outcome.odometer.total
    assert outcome.final.recount() == outcome.final.particle_total


def test_lone_particle_mean_time(lone_particle):
    """A lone particle needs (1 + lambda) / lambda instructions on average."""
    trials = 2000
    times = []
    for seed in range(trials):
        params = Params(n=8, mu=0.5, lam=1.0, seed=seed)
        outcome = stabilize(params, LeftmostUnstable(), initial=lone_particle)
        times.append(outcome.T)
    mean = sum(times) / trials
    # Geometric(1/2): variance (1 - p) / p^2 = 2
    assert abs(mean - 2.0) < 4 * math.sqrt(2.0 / trials)


def test_policies_agree_on_same_stack(small_params):
    """Leftmost and Random policies give identical T, final state and odometer."""
    a = stabilize(small_params, LeftmostUnstable())
    b = stabilize(small_params, RandomUnstable(77))
    assert (a.T, a.final, a.odometer.h) == (b.T, b.final, b.odometer.h)


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**32),
    mu=st.sampled_from([0.2, 0.5, 0.8]),
    lam=st.sampled_from([0.2, 1.0, 5.0]),
    n=st.integers(min_value=2, max_value=10),
)
def test_policy_invariance_property(seed, mu, lam, n):
    """Any two shipped policies stabilize to the same odometer."""
    params = Params(n=n, mu=mu, lam=lam, seed=seed)
    a = stabilize(params, SweepCyclic(), budget=500_000)
    b = stabilize(params, RandomUnstable(seed + 1), budget=500_000)
    assume(isinstance(a, Stabilized) and isinstance(b, Stabilized))
    assert a.odometer.h == b.odometer.h
    assert a.final == b.final


def test_budget_exceeded_is_censored():
    """A run that can never fix stops exactly at the budget."""
    params = Params(n=4, mu=0.5, lam=1.0, seed=3)
    stack = InstructionStack(3, 1.0).ignoring_sleeps()
    outcome = stabilize(
        params, initial=Configuration.from_counts([1, 1, 1, 0]), budget=500, stack=stack
    )

    assert isinstance(outcome, BudgetExceeded)
    assert outcome.T_at_cap == 500
    assert outcome.partial.particle_total == 3
    assert outcome.odometer.total == 500


def test_zero_budget_with_particles():
    """A zero budget censors immediately when particles are active."""
    outcome = stabilize(
        Params(n=4, mu=0.5, lam=1.0), initial=Configuration.from_counts([1, 0, 0, 0]), budget=0
    )
    assert isinstance(outcome, BudgetExceeded)
    assert outcome.T_at_cap == 0


def test_stabilize_rejects_restricted_policy(small_params):
    """Full stabilization needs an unrestricted policy."""
    with pytest.raises(ValueError, match="unrestricted"):
        stabilize(small_params, Restricted(LeftmostUnstable(), frozenset({0})))


def test_restricted_to_all_sites_matches_stabilize(small_params):
    """Allowing every site reproduces full stabilization."""
    full = stabilize(small_params, LeftmostUnstable())
    state = TopplingState.fresh(
        sample_initial(small_params), InstructionStack(small_params.seed, small_params.lam)
    )
    restricted_stabilize(state, range(small_params.n))
    assert state.odometer.h == full.odometer.h
    assert state.config == full.final


def test_restricted_single_site():
    """With one allowed site the particle leaves it or sleeps there."""
    for seed in range(30):
        state = TopplingState.fresh(
            Configuration.from_counts([0, 0, 1, 0, 0]), InstructionStack(seed, 1.0)
        )
        restricted_stabilize(state, {2})
        assert state.odometer.h[1] == state.odometer.h[3] == 0
        assert state.config.active[2] == 0
        assert state.config.particle_total == 1


def test_restricted_excluding_poles():
    """Excluding 0 and n/2 leaves active particles only at the poles."""
    n = 16
    for seed in range(10):
        state = TopplingState.fresh(Configuration.from_counts([2] * n), InstructionStack(seed, 1.0))
        restricted_stabilize(state, [x for x in range(n) if x not in (0, n // 2)])
        assert all(state.config.active[x] == 0 for x in range(n) if x not in (0, n // 2))
        assert state.config.particle_total == 2 * n


def test_restricted_stop_predicate_filters_sites():
    """Sites rejected by the predicate are never toppled."""
    state = TopplingState.fresh(
        Configuration.from_counts([1, 0, 3, 0, 0, 0]), InstructionStack(1, 1.0)
    )
    only_crowded = lambda config, x: config.active[x] >= 2
    restricted_stabilize(state, {0, 2}, stop_predicate=only_crowded)
    assert state.odometer.h[0] == 0
    assert state.config.active[2] <= 1


def test_restricted_budget_raises():
    """Restricted runs raise when the budget runs out."""
    stack = InstructionStack(2, 1.0).ignoring_sleeps()
    state = TopplingState.fresh(Configuration.from_counts([1, 1, 0]), stack)
    with pytest.raises(BudgetExhaustedError) as exc:
        restricted_stabilize(state, range(3), budget=100)
    assert exc.value.consumed == 100


def test_restricted_needs_sites():
    """An empty allowed set is rejected."""
    state = TopplingState.fresh(Configuration.from_counts([1, 0]), InstructionStack(0, 1.0))
    with pytest.raises(ValueError):
        restricted_stabilize(state, [])


def test_stabilize_state_continues_existing_run(small_params):
    """Stabilizing after a partial run gives the same total odometer."""
    full = stabilize(small_params, LeftmostUnstable())
    state = TopplingState.fresh(
        sample_initial(small_params), InstructionStack(small_params.seed, small_params.lam)
    )
    first = state.config.active_sites()
    if first:
        topple(state, first[0])
    outcome = stabilize_state(state, SweepCyclic())
    assert outcome.odometer.h == full.odometer.h


# ============================================================================
# COMPILED AND INTERPRETED PATHS
# ============================================================================

def _both_paths(config, stack, policy, budget):
    compiled = TopplingState.fresh(config.copy(), stack)
    interpreted = TopplingState.fresh(config.copy(), stack, record_trace=True)
    return stabilize_state(compiled, policy, budget), stabilize_state(interpreted, policy, budget)


def _assert_same_outcome(fast, slow):
    assert type(fast) is type(slow)
    assert fast.odometer.h == slow.odometer.h
    if isinstance(fast, Stabilized):
        assert (fast.T, fast.final) == (slow.T, slow.final)
    else:
        assert (fast.T_at_cap, fast.partial) == (slow.T_at_cap, slow.partial)


@pytest.mark.parametrize("policy", [LeftmostUnstable(), RandomUnstable(5), SweepCyclic()])
def test_compiled_path_matches_interpreted_when_censored(policy):
    """Cut off mid-run, both paths stop on the same configuration and odometer."""
    for seed in range(5):
        params = Params(n=10, mu=0.9, lam=0.01, seed=seed)
        stack = InstructionStack(seed, params.lam)
        fast, slow = _both_paths(sample_initial(params), stack, policy, budget=3000)
        _assert_same_outcome(fast, slow)
        if isinstance(fast, BudgetExceeded):
            assert fast.T_at_cap == 3000


@pytest.mark.parametrize(
    "derive",
    [lambda s: s, lambda s: s.masked(0.6, mask_seed=2), lambda s: s.ignoring_sleeps({(0, 1)})],
)
def test_compiled_path_matches_interpreted_on_masked_stacks(derive):
    """Masked stacks read the same instructions on both paths."""
    for seed in range(8):
        params = Params(n=12, mu=0.6, lam=1.0, seed=seed)
        stack = derive(InstructionStack(seed, params.lam))
        fast, slow = _both_paths(sample_initial(params), stack, RandomUnstable(seed), 20_000)
        _assert_same_outcome(fast, slow)


def test_compiled_path_crosses_block_boundaries():
    """Runs that read several blocks per site still agree with the interpreted loop."""
    config = Configuration.point_mass(6, 0, 5)
    stack = InstructionStack(3, 0.001)
    fast, slow = _both_paths(config, stack, SweepCyclic(), budget=200_000)
    _assert_same_outcome(fast, slow)
    assert max(fast.odometer.h) > 2 * BLOCK_SIZE


def test_restricted_compiled_path_matches_trace():
    """Restricted runs agree between the compiled kernel and the traced loop."""
    n = 16
    allowed = [x for x in range(n) if x not in (0, n // 2)]
    for seed in range(5):
        stack = InstructionStack(seed, 0.5)
        fast = TopplingState.fresh(Configuration.from_counts([2] * n), stack)
        slow = TopplingState.fresh(Configuration.from_counts([2] * n), stack, record_trace=True)
        restricted_stabilize(fast, allowed)
        restricted_stabilize(slow, allowed)
        assert fast.odometer.h == slow.odometer.h
        assert fast.config == slow.config
        assert fast.total_T == slow.total_T == len(slow.trace)
