"""
Scaling reports over sweep records.

Each report groups records into (mu, lambda) series and summarizes T per n
with censoring-aware medians. Thresholds are pilot-calibrated properties
of the simulator, not constants taken from any proof.

Usage:
    reports = subcritical_scaling_report(preset("subcritical", seed=1, trials=20))
    for report in reports:
        print(report.render())
"""

import logging
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from arw_fixation.core.errors import RegimeWarning
from arw_fixation.experiments.stats import (
    CensoredSummary,
    log_slope,
    normalized_by_n_log2,
    scatter_then_sleep_probability,
    summarize,
)
from arw_fixation.experiments.trials import SweepGrid, TrialRecord, run_grid

logger = logging.getLogger(__name__)

SUBCRITICAL_MAX_RATIO = 2.0
POINTMASS_WINDOW = (4.0, 16.0)
SUPERCRITICAL_MIN_DOUBLING = 10.0


@dataclass
class ScalingPoint:
    n: int
    summary: CensoredSummary
    normalized_median: Optional[float] = None
    sleep_bound_scale: Optional[float] = None

    @property
    def too_censored(self) -> bool:
        return not self.summary.median_valid


@dataclass
class ScalingReport:
    """
    One (mu, lambda) series of a scaling report.

    Attributes:
        kind: subcritical, supercritical or pointmass
        ratios: (n1, n2, ratio) of the statistic the kind compares
        slope: Least-squares slope of ln(median T) against n (supercritical)
        monotone: Valid medians strictly increase with n (supercritical)
        flags: Property violations; empty means the series passed
    """
    kind: str
    mu: float
    lam: float
    points: List[ScalingPoint] = field(default_factory=list)
    ratios: List[Tuple[int, int, float]] = field(default_factory=list)
    slope: Optional[float] = None
    slope_stderr: Optional[float] = None
    monotone: Optional[bool] = None
    flags: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.flags

    @property
    def too_censored_ns(self) -> List[int]:
        return [p.n for p in self.points if p.too_censored]

    def render(self) -> str:
        """Plain-text table of the series."""
        lines = [f"{self.kind} report: mu={self.mu!r}, lambda={self.lam!r}"]
        lines.append(
            f"{'n':>8} {'trials':>7} {'censored':>9} {'median T':>14} {'p95 T':>14} {'norm':>10}"
        )
        for p in self.points:
            norm = "" if p.normalized_median is None else f"{p.normalized_median:.4g}"
            mark = " (too censored)" if p.too_censored else ""
            lines.append(
                f"{p.n:>8} {p.summary.samples:>7} {p.summary.censored_fraction:>9.2%} "
                f"{p.summary.median:>14.6g} {p.summary.p95:>14.6g} {norm:>10}{mark}"
            )
        for n1, n2, ratio in self.ratios:
            lines.append(f"  ratio {n2}/{n1}: {ratio:.4g}")
        if self.slope is not None:
            lines.append(
                f"  slope of ln(median T) vs n: {self.slope:.4g} (se {self.slope_stderr:.2g})"
            )
        if self.monotone is not None:
            lines.append(f"  medians strictly increasing: {self.monotone}")
        lines.append("  PASS" if self.passed else "  FLAGS: " + "; ".join(self.flags))
        return "\n".join(lines)


Series = Dict[Tuple[float, float], Dict[int, List[TrialRecord]]]


def _series(records: Sequence[TrialRecord]) -> Series:
    grouped: Series = defaultdict(lambda: defaultdict(list))
    for record in records:
        if record.error is None:
            grouped[(record.mu, record.lam)][record.n].append(record)
    return grouped


def _summaries(by_n: Dict[int, List[TrialRecord]]) -> List[Tuple[int, CensoredSummary]]:
    return [
        (n, summarize([r.T for r in rows], [r.censored for r in rows]))
        for n, rows in sorted(by_n.items())
    ]


def _records(grid: SweepGrid, records: Optional[Sequence[TrialRecord]], workers: Optional[int]):
    return list(records) if records is not None else run_grid(grid, workers=workers)


def _flag_too_censored(report: ScalingReport) -> None:
    for p in report.points:
        if p.too_censored:
            report.flags.append(
                f"TooCensored: n={p.n} ({p.summary.censored_fraction:.0%} censored)"
            )


# ============================================================================
# SUBCRITICAL
# ============================================================================

def subcritical_scaling_report(
    grid: SweepGrid,
    records: Optional[Sequence[TrialRecord]] = None,
    max_ratio: float = SUBCRITICAL_MAX_RATIO,
    workers: Optional[int] = None,
) -> List[ScalingReport]:
    """
    Per n, median and p95 of T and the normalized median T / (n (ln n)^2).

    A series is flagged when the normalized median grows by more than
    `max_ratio` between consecutive n. Runs the grid unless records are given.
    """
    for _, mu, lam in grid.cells():
        if mu >= lam / (1.0 + lam):
            warnings.warn(
                f"mu={mu} is not below lambda/(1+lambda)={lam / (1 + lam):.4g}",
                RegimeWarning,
                stacklevel=2,
            )

    reports = []
    for (mu, lam), by_n in sorted(_series(_records(grid, records, workers)).items()):
        report = ScalingReport(kind="subcritical", mu=mu, lam=lam)
        for n, summary in _summaries(by_n):
            normalized = normalized_by_n_log2(summary.median, n)
            report.points.append(ScalingPoint(n=n, summary=summary, normalized_median=normalized))
        _flag_too_censored(report)
        valid = [p for p in report.points if not p.too_censored and p.summary.median > 0]
        for prev, nxt in zip(valid, valid[1:]):
            ratio = nxt.normalized_median / prev.normalized_median
            report.ratios.append((prev.n, nxt.n, ratio))
            if ratio > max_ratio:
                report.flags.append(
                    f"normalized median grew {ratio:.3g}x from n={prev.n} to n={nxt.n}"
                )
        reports.append(report)
    return reports


# ============================================================================
# POINT MASS
# ============================================================================

def pointmass_scaling_report(
    grid: SweepGrid,
    records: Optional[Sequence[TrialRecord]] = None,
    window: Tuple[float, float] = POINTMASS_WINDOW,
    workers: Optional[int] = None,
) -> List[ScalingReport]:
    """Median T ratio across each doubling of n must fall inside `window`."""
    low, high = window
    reports = []
    for (mu, lam), by_n in sorted(_series(_records(grid, records, workers)).items()):
        report = ScalingReport(kind="pointmass", mu=mu, lam=lam)
        report.points = [ScalingPoint(n=n, summary=s) for n, s in _summaries(by_n)]
        _flag_too_censored(report)
        valid = {
            p.n: p for p in report.points if not p.too_censored and p.summary.median > 0
        }
        for n in sorted(valid):
            if 2 * n not in valid:
                continue
            ratio = valid[2 * n].summary.median / valid[n].summary.median
            report.ratios.append((n, 2 * n, ratio))
            if not low <= ratio <= high:
                report.flags.append(f"T({2 * n})/T({n}) = {ratio:.3g} outside [{low:g}, {high:g}]")
        reports.append(report)
    return reports


# ============================================================================
# SUPERCRITICAL
# ============================================================================

def supercritical_growth_report(
    grid: SweepGrid,
    records: Optional[Sequence[TrialRecord]] = None,
    min_doubling: float = SUPERCRITICAL_MIN_DOUBLING,
    workers: Optional[int] = None,
) -> List[ScalingReport]:
    """
    Censoring-aware medians of T per n, the slope of ln(median) against n,
    monotonicity and the median ratio across each doubling of n.

    Cells with at least half their trials censored are marked too censored
    and contribute to none of the fitted quantities.
    """
    reports = []
    for (mu, lam), by_n in sorted(_series(_records(grid, records, workers)).items()):
        report = ScalingReport(kind="supercritical", mu=mu, lam=lam)
        for n, summary in _summaries(by_n):
            m = min(n, round(mu * n))
            report.points.append(
                ScalingPoint(
                    n=n,
                    summary=summary,
                    sleep_bound_scale=1.0 / scatter_then_sleep_probability(n, m, lam),
                )
            )
        for n in report.too_censored_ns:
            logger.info(f"n={n} at mu={mu}, lambda={lam} is too censored for a median")
        _flag_too_censored(report)

        valid = [p for p in report.points if not p.too_censored and p.summary.median > 0]
        if len(valid) >= 2:
            report.slope, report.slope_stderr = log_slope(
                [p.n for p in valid], [p.summary.median for p in valid]
            )
            report.monotone = all(
                a.summary.median < b.summary.median for a, b in zip(valid, valid[1:])
            )
            if report.slope <= 0:
                report.flags.append(f"non-positive growth slope {report.slope:.3g}")
            if not report.monotone:
                report.flags.append("medians not strictly increasing in n")

        by_size = {p.n: p for p in valid}
        for n in sorted(by_size):
            if 2 * n in by_size:
                ratio = by_size[2 * n].summary.median / by_size[n].summary.median
                report.ratios.append((n, 2 * n, ratio))
                if ratio < min_doubling:
                    report.flags.append(f"T({2 * n})/T({n}) = {ratio:.3g} below {min_doubling:g}")
        reports.append(report)
    return reports


REPORT_KINDS = {
    "subcritical": subcritical_scaling_report,
    "supercritical": supercritical_growth_report,
    "pointmass": pointmass_scaling_report,
}

