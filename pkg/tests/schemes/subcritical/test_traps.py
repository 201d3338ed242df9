"""Tests for trap setting and settlement."""

import pytest
from scipy import stats

from arw_fixation.core.rules import is_stable
from arw_fixation.core.schema import Configuration, Instruction, Params
from arw_fixation.core.stack import InstructionStack
from arw_fixation.engine.policies import LeftmostUnstable
from arw_fixation.engine.toppling import Stabilized, stabilize
from arw_fixation.experiments.stats import proportion_interval
from arw_fixation.schemes.subcritical.traps import StackSegment, run_traps, set_traps


def _check_invariants(run):
    half = run.r // 2
    assert run.a[0] == -half and run.b[0] == half
    for i in range(1, len(run.a)):
        moved_a = run.a[i] > run.a[i - 1]
        moved_b = run.b[i] < run.b[i - 1]
        assert moved_a != moved_b
        assert run.a[i] >= run.a[i - 1] and run.b[i] <= run.b[i - 1]
    offsets = [t.offset for t in run.traps]
    assert len(set(offsets)) == len(offsets)
    assert all(-half < v < half and v != 0 for v in offsets)


def test_no_particles_is_success():
    """m = 0 succeeds with the initial barriers."""
    run = set_traps(20, 0, StackSegment.standalone(1, 1.0, 20))
    assert run.success
    assert (run.a, run.b) == ([-10], [10])


def test_rejects_odd_width():
    """The window width must be even."""
    with pytest.raises(ValueError):
        set_traps(21, 1, StackSegment.standalone(1, 1.0, 21))


def test_barrier_and_trap_invariants():
    """Barriers move monotonically, one per particle, and traps are distinct."""
    for seed in range(30):
        run = set_traps(40, 8, StackSegment.standalone(seed, 1.0, 40))
        _check_invariants(run)
        if run.success:
            assert len(run.traps) == 8
            assert run.a[-1] < 0 < run.b[-1]


def test_trap_sleep_precedes_exit():
    """Each designated index is a raw Sleep at its trap site."""
    segment = StackSegment.standalone(4, 1.0, 40)
    run = set_traps(40, 6, segment)
    for trap in run.traps:
        assert segment.stack.raw(trap.site, trap.sleep_index) == Instruction.SLEEP


def test_success_rate_subcritical():
    """beta = 0.2 below lambda / (1 + lambda) = 0.5 succeeds almost always."""
    runs = [set_traps(60, 12, StackSegment.standalone(seed, 1.0, 60)) for seed in range(40)]
    assert sum(run.success for run in runs) >= 36


@pytest.mark.slow
def test_success_rate_and_mean_gap_at_width_200():
    """r = 200, beta = 0.3, lambda = 1: near-certain success and short barrier advances."""
    runs = [set_traps(200, 60, StackSegment.standalone(seed, 1.0, 200)) for seed in range(200)]
    low, high = proportion_interval(sum(run.success for run in runs), len(runs))
    assert high >= 0.95

    gaps = [g for run in runs for g in run.gaps]
    assert sum(gaps) / len(gaps) <= 1.1 * 2.0
    lefts = [hit for run in runs for hit in run.hit_left]
    assert 0.4 <= sum(lefts) / len(lefts) <= 0.6


def test_exploration_cap_fails_the_run():
    """Running out of reads fails the run at the current particle."""
    run = set_traps(40, 8, StackSegment.standalone(1, 1.0, 40), max_steps=5)
    assert not run.success
    assert run.failure == "exploration exceeded 5 reads at particle 1"
    assert run.explored >= 5
    assert run.traps == []


def test_exploration_reads_past_consumed_instructions():
    """With a base odometer, every trap sleep lies beyond the consumed prefix."""
    stack = InstructionStack(5, 1.0)
    segment = StackSegment(stack, n=42, center=7, base=[250] * 42)
    run = set_traps(40, 6, segment)
    assert run.traps
    for trap in run.traps:
        assert trap.sleep_index > 250
        assert trap.site == (7 + trap.offset) % 42
        assert stack.raw(trap.site, trap.sleep_index) == Instruction.SLEEP


def test_gap_is_geometric_with_mean_two():
    """With lambda = 1 the first barrier advance averages (1 + lambda) / lambda."""
    gaps, lefts = [], []
    for seed in range(500):
        run = set_traps(20, 1, StackSegment.standalone(seed, 1.0, 20))
        if run.success:
            gaps.append(run.gaps[0])
            lefts.append(run.hit_left[0])
    mean = sum(gaps) / len(gaps)
    assert 1.0 <= mean <= 2.0 + 4 * (2.0 / len(gaps)) ** 0.5

    # Empirical CDF stays above the Geometric(1/2) CDF up to sampling slack
    for k in range(1, 6):
        empirical = sum(g <= k for g in gaps) / len(gaps)
        bound = stats.geom.cdf(k, 0.5)
        assert empirical >= bound - 4 * (bound * (1 - bound) / len(gaps)) ** 0.5

    share = sum(lefts) / len(lefts)
    assert abs(share - 0.5) < 4 * (0.25 / len(lefts)) ** 0.5


def test_single_particle_settles_at_trap():
    """m = 1 ends with one sleeper at the trap and nothing else."""
    segment = StackSegment.standalone(3, 1.0, 20)
    run = set_traps(20, 1, segment)
    assert run.success
    settled = run_traps(run, segment)

    trap = run.traps[0]
    assert settled.config.sleepy[trap.site]
    assert settled.config.particle_total == 1
    assert settled.config.sleepy_total == 1
    assert settled.T2 == settled.odometer.total


def test_settlement_is_stable_and_distinct():
    """Successful runs settle every particle alone at its own trap."""
    checked = 0
    for seed in range(20):
        segment = StackSegment.standalone(seed, 1.0, 40)
        run = set_traps(40, 8, segment)
        if not run.success:
            continue
        settled = run_traps(run, segment)
        assert is_stable(settled.config)
        sleepers = [x for x in range(segment.n) if settled.config.sleepy[x]]
        assert sorted(sleepers) == sorted(t.site for t in run.traps)
        checked += 1
    assert checked > 0


def test_settlement_dominates_engine():
    """The engine on the raw stack never needs more than the trap scheme."""
    for seed in range(10):
        segment = StackSegment.standalone(seed, 1.0, 40)
        run = set_traps(40, 6, segment)
        if not run.success:
            continue
        settled = run_traps(run, segment)
        params = Params(n=segment.n, mu=0.5, lam=1.0, seed=seed)
        outcome = stabilize(
            params,
            LeftmostUnstable(),
            initial=Configuration.point_mass(segment.n, 0, 6),
            stack=segment.stack,
        )
        assert isinstance(outcome, Stabilized)
        assert outcome.odometer.dominated_by(settled.odometer)


def test_failed_run_cannot_settle():
    """Settling a failed run is refused."""
    segment = StackSegment.standalone(0, 1.0, 4)
    run = set_traps(4, 5, segment)
    assert not run.success
    with pytest.raises(ValueError, match="failed trap run"):
        run_traps(run, segment)
