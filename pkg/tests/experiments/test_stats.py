"""Tests for the censoring-aware statistics."""

import math

import numpy as np
import pytest

from arw_fixation.experiments.stats import (
    gap_dominance,
    hit_left_fraction,
    log_slope,
    lone_particle_mean,
    lone_particle_pvalue,
    mean_with_stderr,
    normalized_by_n_log2,
    proportion_interval,
    scatter_then_sleep_probability,
    summarize,
    within_stderr,
)


def test_summarize_counts_censored_values_as_lower_bounds():
    """Censored entries enter the median at their recorded value."""
    summary = summarize([1, 2, 3, 100], [False, False, False, True])
    assert summary.samples == 4
    assert summary.censored == 1
    assert summary.median == pytest.approx(2.5)
    assert summary.censored_fraction == 0.25
    assert summary.median_valid
    assert not summary.p95_valid


def test_median_is_invalid_at_half_censored():
    """Half or more censored samples make the median meaningless."""
    summary = summarize([5, 5], [True, False])
    assert not summary.median_valid


def test_summarize_empty_and_mismatched():
    """No samples gives NaN; mismatched lengths are an error."""
    empty = summarize([], [])
    assert empty.samples == 0
    assert math.isnan(empty.median)
    assert not empty.median_valid
    with pytest.raises(ValueError, match="same length"):
        summarize([1, 2], [False])


def test_normalized_by_n_log2():
    """Divides by n (ln n)^2."""
    n = 100
    assert normalized_by_n_log2(n * math.log(n) ** 2, n) == pytest.approx(1.0)


def test_mean_with_stderr_and_within():
    """Standard error uses the sample standard deviation."""
    mean, se = mean_with_stderr([1.0, 3.0])
    assert mean == 2.0
    assert se == pytest.approx(1.0)
    assert within_stderr([1.0, 3.0], 5.0, k=4.0)
    assert not within_stderr([1.0, 3.0], 7.0, k=4.0)
    assert mean_with_stderr([4.0]) == (4.0, math.inf)


def test_proportion_interval_contains_estimate():
    """Both the exact and the normal interval bracket the observed share."""
    low, high = proportion_interval(50, 100)
    assert low < 0.5 < high
    low, high = proportion_interval(5_000, 10_000)
    assert low < 0.5 < high
    assert high - low < 0.05
    with pytest.raises(ValueError, match="positive"):
        proportion_interval(0, 0)


def test_lone_particle_mean():
    """Mean of Geometric(lambda / (1 + lambda))."""
    assert lone_particle_mean(1.0) == 2.0
    assert lone_particle_mean(0.5) == pytest.approx(3.0)


def test_gap_dominance_accepts_small_gaps():
    """Gaps of zero sit far below any geometric tail."""
    result = gap_dominance([0] * 200, 1.0)
    assert result.holds
    assert result.sample_size == 200


def test_gap_dominance_flags_heavy_tail():
    """Gaps far larger than geometric fail the comparison."""
    result = gap_dominance([30] * 500, 1.0)
    assert not result.holds
    assert result.worst_excess > 0.9


def test_gap_dominance_empty():
    """No gaps never fails."""
    assert gap_dominance([], 1.0).holds


def test_hit_left_fraction():
    """Share and its binomial standard error."""
    p, se = hit_left_fraction([True, False, True, False])
    assert p == 0.5
    assert se == pytest.approx(0.25)
    p, se = hit_left_fraction([])
    assert math.isnan(p)


def test_scatter_then_sleep_probability():
    """(lambda / (1 + lambda))^m, with m bounded by n."""
    assert scatter_then_sleep_probability(4, 2, 1.0) == pytest.approx(0.25)
    assert scatter_then_sleep_probability(4, 0, 1.0) == 1.0
    with pytest.raises(ValueError, match="m must lie"):
        scatter_then_sleep_probability(4, 5, 1.0)


def test_log_slope_recovers_exponential_rate():
    """Exact exponentials have their rate as slope."""
    ns = [10, 20, 30, 40]
    slope, stderr = log_slope(ns, [math.exp(0.3 * n) for n in ns])
    assert slope == pytest.approx(0.3)
    assert stderr == pytest.approx(0.0, abs=1e-9)


def test_lone_particle_pvalue_accepts_geometric_samples():
    """Samples drawn from the law itself are not rejected."""
    rng = np.random.default_rng(3)
    samples = rng.geometric(0.5, size=5_000)
    assert lone_particle_pvalue(samples, 1.0) > 1e-3


def test_lone_particle_pvalue_rejects_wrong_law():
    """A constant T is nothing like a geometric law."""
    assert lone_particle_pvalue([5] * 1_000, 1.0) < 1e-6
