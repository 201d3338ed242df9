"""
Censoring-aware summary statistics for trial records.

A censored T is a lower bound at the budget cap. It takes part in medians
and percentiles as that lower bound, so a median is only reported as valid
when fewer than half of the samples are censored.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import stats


@dataclass
class CensoredSummary:
    """Median and 95th percentile of T with the censoring fraction."""
    samples: int
    censored: int
    median: float
    p95: float

    @property
    def censored_fraction(self) -> float:
        return self.censored / self.samples if self.samples else 0.0

    @property
    def median_valid(self) -> bool:
        return self.samples > 0 and self.censored_fraction < 0.5

    @property
    def p95_valid(self) -> bool:
        return self.samples > 0 and self.censored_fraction < 0.05


def summarize(values: Sequence[int], censored: Sequence[bool]) -> CensoredSummary:
    """Summarize T values, censored entries counting as their lower bound."""
    if len(values) != len(censored):
        raise ValueError("values and censored flags must have the same length")
    if not values:
        return CensoredSummary(samples=0, censored=0, median=math.nan, p95=math.nan)
    data = np.asarray(values, dtype=float)
    return CensoredSummary(
        samples=len(values),
        censored=int(sum(bool(c) for c in censored)),
        median=float(np.median(data)),
        p95=float(np.percentile(data, 95)),
    )


def normalized_by_n_log2(value: float, n: int) -> float:
    """value / (n (ln n)^2)."""
    return value / (n * math.log(n) ** 2)


def mean_with_stderr(values: Sequence[float]) -> Tuple[float, float]:
    data = np.asarray(values, dtype=float)
    if data.size < 2:
        return float(data.mean()) if data.size else math.nan, math.inf
    return float(data.mean()), float(data.std(ddof=1) / math.sqrt(data.size))


def within_stderr(values: Sequence[float], target: float, k: float = 4.0) -> bool:
    """True iff the sample mean lies within k standard errors of target."""
    mean, se = mean_with_stderr(values)
    return abs(mean - target) <= k * se


def proportion_interval(
    successes: int, trials: int, confidence: float = 0.999
) -> Tuple[float, float]:
    """
    Confidence interval for a success probability.

    Normal approximation from 10^4 trials up, exact binomial bounds below.
    """
    if trials <= 0:
        raise ValueError(f"trials must be positive (got {trials})")
    if trials >= 10_000:
        p = successes / trials
        z = stats.norm.ppf(0.5 + confidence / 2)
        half = z * math.sqrt(p * (1 - p) / trials)
        return max(0.0, p - half), min(1.0, p + half)
    ci = stats.binomtest(successes, trials).proportion_ci(
        confidence_level=confidence, method="exact"
    )
    return float(ci.low), float(ci.high)


# ============================================================================
# LAWS
# ============================================================================

def lone_particle_pvalue(samples: Sequence[int], lam: float) -> float:
    """
    Kolmogorov-Smirnov p-value of T samples against Geometric(lam / (1 + lam)).

    Both distribution functions step only at integers, so the statistic is
    the largest gap over k = 1..max(samples). The continuous-law p-value is
    conservative for a discrete law: a small one is still strong evidence.
    """
    data = np.sort(np.asarray(samples))
    if data.size == 0:
        return math.nan
    ks = np.arange(1, int(data[-1]) + 1)
    ecdf = np.searchsorted(data, ks, side="right") / data.size
    statistic = float(np.max(np.abs(ecdf - stats.geom(lam / (1.0 + lam)).cdf(ks))))
    return float(stats.kstwo.sf(statistic, data.size))


def lone_particle_mean(lam: float) -> float:
    return (1.0 + lam) / lam


@dataclass
class GapDominance:
    """Largest excess of the empirical gap tail over the geometric tail."""
    sample_size: int
    worst_excess: float
    worst_k: Optional[int]
    tolerance: float

    @property
    def holds(self) -> bool:
        return self.worst_excess <= self.tolerance


def gap_dominance(gaps: Sequence[int], lam: float, alpha: float = 1e-3) -> GapDominance:
    """
    Compare P(gap > k) with the tail (1 - p)^k of Geometric(p), p = lam / (1 + lam).

    Gaps are dominated by the geometric law, so the empirical tail may only
    exceed the geometric tail by sampling noise; the tolerance is the
    Dvoretzky-Kiefer-Wolfowitz bound at level alpha.
    """
    size = len(gaps)
    if size == 0:
        return GapDominance(sample_size=0, worst_excess=0.0, worst_k=None, tolerance=math.inf)
    p = lam / (1.0 + lam)
    data = np.asarray(gaps)
    ks = np.arange(0, int(data.max()) + 1)
    empirical = np.array([(data > k).mean() for k in ks])
    excess = empirical - (1.0 - p) ** ks
    worst = int(np.argmax(excess))
    return GapDominance(
        sample_size=size,
        worst_excess=float(excess[worst]),
        worst_k=int(ks[worst]),
        tolerance=math.sqrt(math.log(2.0 / alpha) / (2.0 * size)),
    )


def hit_left_fraction(hit_left: Sequence[bool]) -> Tuple[float, float]:
    """Share of explorations that hit the left barrier, with its standard error."""
    if not hit_left:
        return math.nan, math.inf
    p = sum(bool(h) for h in hit_left) / len(hit_left)
    return p, math.sqrt(p * (1 - p) / len(hit_left))


def scatter_then_sleep_probability(n: int, m: int, lam: float) -> float:
    """
    Chance that m particles spread one per site all fall asleep on their next instruction.

    Its reciprocal is the scale of the exponential upper bound on T.
    """
    if not 0 <= m <= n:
        raise ValueError(f"m must lie in [0, n] (got m={m}, n={n})")
    return (lam / (1.0 + lam)) ** m


def log_slope(ns: Sequence[int], medians: Sequence[float]) -> Tuple[float, float]:
    """Least-squares slope (and its standard error) of ln(median) against n."""
    fit = stats.linregress(np.asarray(ns, dtype=float), np.log(np.asarray(medians, dtype=float)))
    return float(fit.slope), float(fit.stderr)
