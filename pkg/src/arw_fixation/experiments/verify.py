"""
Verification suite: engine invariants, oracle equivalence and the
statistical properties of both stabilization schemes.

Every check reports counts instead of raising; the suite passes when no
check has a violation.

Usage:
    summary = verify_suite(VerifyConfig(instances=100, seed=1))
    print(summary.table())
"""

import itertools
import logging
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Tuple

import numpy as np

from arw_fixation.core.schema import SLEEPY, Active, Configuration, Odometer, Params
from arw_fixation.core.stack import STREAM_POLICY, InstructionStack, derive_seed
from arw_fixation.engine.checks import (
    Verdict,
    check_abelian,
    check_least_action,
    check_sleep_monotonicity,
)
from arw_fixation.engine.policies import LeftmostUnstable, RandomUnstable, SweepCyclic
from arw_fixation.engine.toppling import Stabilized, stabilize
from arw_fixation.experiments.oracle import exact_expected_T
from arw_fixation.experiments.stats import (
    gap_dominance,
    hit_left_fraction,
    lone_particle_mean,
    lone_particle_pvalue,
    mean_with_stderr,
    proportion_interval,
    within_stderr,
)
from arw_fixation.experiments.trials import trial_seed
from arw_fixation.schemes.subcritical.traps import StackSegment, set_traps
from arw_fixation.schemes.supercritical.labels import init_labels
from arw_fixation.schemes.supercritical.loop import (
    LoopState,
    StepVariant,
    run_loop,
    stabilization_step,
)

logger = logging.getLogger(__name__)


@dataclass
class VerifyConfig:
    """
    Sizes and thresholds of the verification suite.

    Attributes:
        instances: Random instances per engine check
        seed: Master seed of the whole suite
        max_n: Largest cycle for the engine checks (smallest is 2)
        budget: Instruction cap per engine run
        invalid_mask: Extra (site, index) pairs for the monotonicity check;
            naming a non-Sleep draw makes that check fail
        oracle_trials: Monte Carlo trials per start compared with the exact oracle
        oracle_max_n: Largest cycle of the oracle grid
        oracle_max_particles: Most particles in an oracle start
        oracle_lams: Sleep rates of the oracle grid
        oracle_k: Allowed distance of a Monte Carlo mean from the oracle, in SE
        lone_trials: Samples per rate for the lone-particle geometric law
        lone_lams: Sleep rates of the lone-particle law
        statistical: Also run the scheme-level statistical checks
        trap_min_success: Success rate the trap runs must not fall clearly below
        trap_gap_slack: Allowed factor on the mean barrier advance 1 + 1/lambda
    """
    instances: int = 100
    seed: int = 1
    max_n: int = 12
    budget: int = 1_000_000
    invalid_mask: Tuple[Tuple[int, int], ...] = ()
    oracle_trials: int = 2_000
    oracle_max_n: int = 4
    oracle_max_particles: int = 2
    oracle_lams: Tuple[float, ...] = (0.5, 1.0, 2.0)
    oracle_k: float = 5.0
    lone_trials: int = 20_000
    lone_lams: Tuple[float, ...] = (0.1, 1.0, 10.0)
    statistical: bool = True
    trap_width: int = 200
    trap_particles: int = 60
    trap_lam: float = 1.0
    trap_runs: int = 200
    trap_min_success: float = 0.95
    trap_gap_slack: float = 1.1
    step_b_n: int = 200
    step_b_particles: int = 50
    step_b_lam: float = 0.005
    step_b_trials: int = 100
    step_b_fraction: float = 0.9
    step_b_min_successes: int = 90
    loop_n: int = 8


@dataclass
class CheckResult:
    name: str
    holds: int = 0
    violated: int = 0
    indeterminate: int = 0
    invalid_mask: int = 0
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.violated == 0 and self.invalid_mask == 0

    def count(self, verdict: Verdict) -> None:
        if verdict == Verdict.HOLDS:
            self.holds += 1
        elif verdict == Verdict.VIOLATED:
            self.violated += 1
        elif verdict == Verdict.INDETERMINATE:
            self.indeterminate += 1
        else:
            self.invalid_mask += 1


@dataclass
class VerifySummary:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def get(self, name: str) -> Optional[CheckResult]:
        return next((c for c in self.checks if c.name == name), None)

    def table(self) -> str:
        lines = [
            f"{'check':<26} {'holds':>6} {'violated':>9} {'indet.':>7} {'bad mask':>9}  result",
            "-" * 72,
        ]
        for c in self.checks:
            lines.append(
                f"{c.name:<26} {c.holds:>6} {c.violated:>9} {c.indeterminate:>7} "
                f"{c.invalid_mask:>9}  {'PASS' if c.passed else 'FAIL'}"
            )
            if c.detail:
                lines.append(f"    {c.detail}")
        lines.append("-" * 72)
        lines.append("ALL CHECKS PASSED" if self.passed else "VERIFICATION FAILED")
        return "\n".join(lines)


def _instance(config: VerifyConfig, i: int, rng: random.Random) -> Params:
    return Params(
        n=rng.randint(2, config.max_n),
        mu=rng.uniform(0.1, 0.9),
        lam=rng.uniform(0.2, 3.0),
        seed=trial_seed(config.seed, 0, i),
    )


def _verdict(holds: bool) -> Verdict:
    return Verdict.HOLDS if holds else Verdict.VIOLATED


# ============================================================================
# ENGINE CHECKS
# ============================================================================

def _engine_checks(config: VerifyConfig) -> List[CheckResult]:
    rng = random.Random(derive_seed(config.seed, STREAM_POLICY))
    abelian = CheckResult("abelian")
    least_action = CheckResult("least_action")
    monotonicity = CheckResult("sleep_monotonicity")

    for i in range(config.instances):
        params = _instance(config, i, rng)
        abelian.count(
            check_abelian(params, RandomUnstable(i), SweepCyclic(), budget=config.budget)
        )
        least_action.count(
            check_least_action(
                params, prefix_len=rng.randint(0, 50), budget=config.budget, prefix_seed=i
            )
        )
        monotonicity.count(
            check_sleep_monotonicity(
                params,
                mask_fraction=rng.uniform(0.0, 1.0),
                budget=config.budget,
                mask_seed=i,
                mask=config.invalid_mask,
            )
        )
    return [abelian, least_action, monotonicity]


# ============================================================================
# ORACLE EQUIVALENCE
# ============================================================================

ORACLE_SITE_STATES = (Active(0), Active(1), Active(2), SLEEPY)


def oracle_starts(max_n: int, max_particles: int) -> Iterator[Configuration]:
    """
    Every start on cycles of 2..max_n sites with 1..max_particles particles.

    Sites are empty, hold one or two active particles, or are sleepy. Only
    one rotation of each start is kept.
    """
    for n in range(2, max_n + 1):
        for codes in itertools.product(range(len(ORACLE_SITE_STATES)), repeat=n):
            if min(codes[k:] + codes[:k] for k in range(n)) != codes:
                continue
            config = Configuration.from_sites([ORACLE_SITE_STATES[c] for c in codes])
            if 0 < config.particle_total <= max_particles:
                yield config


def _oracle_equivalence(config: VerifyConfig) -> CheckResult:
    result = CheckResult("oracle_equivalence")
    master = derive_seed(config.seed, 1)
    worst: Optional[Tuple[float, str]] = None
    cell = 0
    for lam in config.oracle_lams:
        for start in oracle_starts(config.oracle_max_n, config.oracle_max_particles):
            oracle = exact_expected_T(start.n, start, lam)
            trials = 1 if oracle.expected_T == 0 else config.oracle_trials
            samples = []
            for t in range(trials):
                params = Params(n=start.n, mu=0.5, lam=lam, seed=trial_seed(master, cell, t))
                outcome = stabilize(params, LeftmostUnstable(), config.budget, initial=start)
                if isinstance(outcome, Stabilized):
                    samples.append(outcome.T)
            cell += 1
            if oracle.expected_T == 0:
                result.count(_verdict(samples == [0]))
                continue
            mean, se = mean_with_stderr(samples)
            result.count(_verdict(abs(mean - oracle.expected_T_float) <= config.oracle_k * se))
            score = abs(mean - oracle.expected_T_float) / se if se > 0 else 0.0
            if worst is None or score > worst[0]:
                worst = (score, f"{start!r} at lambda={lam:g}")
    result.detail = f"{cell} starts compared"
    if worst is not None:
        result.detail += f"; largest deviation {worst[0]:.2f} SE at {worst[1]}"
    return result


def _lone_particle_law(config: VerifyConfig) -> CheckResult:
    result = CheckResult("lone_particle_law")
    start = Configuration.from_counts([1, 0, 0, 0])
    details = []
    for cell, lam in enumerate(config.lone_lams):
        samples = []
        for t in range(config.lone_trials):
            params = Params(n=4, mu=0.5, lam=lam, seed=trial_seed(config.seed, 2 + 10 * cell, t))
            outcome = stabilize(params, LeftmostUnstable(), config.budget, initial=start)
            samples.append(outcome.T if isinstance(outcome, Stabilized) else outcome.T_at_cap)
        pvalue = lone_particle_pvalue(samples, lam)
        target = lone_particle_mean(lam)
        result.count(_verdict(pvalue >= 1e-3 and within_stderr(samples, target, k=4.0)))
        details.append(
            f"lambda={lam:g}: KS p {pvalue:.3g}, mean {np.mean(samples):.4g} vs {target:.4g}"
        )
    result.detail = "; ".join(details)
    return result


# ============================================================================
# SCHEME STATISTICS
# ============================================================================

def _trap_statistics(config: VerifyConfig) -> List[CheckResult]:
    success = CheckResult("trap_success_rate")
    mean_gap = CheckResult("trap_mean_gap")
    gaps_check = CheckResult("trap_gap_dominance")
    symmetry = CheckResult("barrier_hit_symmetry")
    gaps: List[int] = []
    hits: List[bool] = []
    successes = 0
    for t in range(config.trap_runs):
        segment = StackSegment.standalone(
            trial_seed(config.seed, 3, t), config.trap_lam, config.trap_width
        )
        run = set_traps(config.trap_width, config.trap_particles, segment)
        successes += run.success
        gaps.extend(run.gaps)
        hits.extend(run.hit_left)

    # A shortfall only fails when the rate is confidently below the target
    low, high = proportion_interval(successes, config.trap_runs)
    success.count(_verdict(high >= config.trap_min_success))
    success.detail = (
        f"{successes}/{config.trap_runs} runs set every trap "
        f"(99.9% interval {low:.3f}-{high:.3f}, target {config.trap_min_success:g})"
    )

    limit = config.trap_gap_slack * lone_particle_mean(config.trap_lam)
    average = float(np.mean(gaps)) if gaps else math.nan
    mean_gap.count(_verdict(average <= limit))
    mean_gap.detail = (
        f"mean barrier advance {average:.3f} over {len(gaps)} traps (limit {limit:.3f})"
    )

    dominance = gap_dominance(gaps, config.trap_lam)
    gaps_check.count(_verdict(dominance.holds))
    gaps_check.detail = (
        f"worst tail excess {dominance.worst_excess:.3g} (tolerance {dominance.tolerance:.3g})"
    )
    p, se = hit_left_fraction(hits)
    symmetry.count(_verdict(abs(p - 0.5) <= 4 * se + 1e-12))
    symmetry.detail = f"left-hit fraction {p:.3f} +/- {se:.3f} over {len(hits)} explorations"
    return [success, mean_gap, gaps_check, symmetry]


def _step_b_statistics(config: VerifyConfig) -> List[CheckResult]:
    retention = CheckResult("step_b_retention")
    arcs = CheckResult("step_b_both_arcs")
    kept = both = 0
    for t in range(config.step_b_trials):
        start = Configuration.point_mass(config.step_b_n, 0, config.step_b_particles)
        state = LoopState(
            labels=init_labels(start),
            odometer=Odometer.zeros(config.step_b_n),
            stack=InstructionStack(trial_seed(config.seed, 4, t), config.step_b_lam),
        )
        stats = stabilization_step(state, StepVariant.B, budget=config.budget * 100)
        if stats.x_at_far_pole >= config.step_b_fraction * stats.x_count and stats.y_all_active:
            kept += 1
        both += stats.both_arcs

    retention.count(_verdict(kept >= config.step_b_min_successes))
    retention.detail = f"{kept}/{config.step_b_trials} trials kept the far-pole fraction"
    arcs.count(_verdict(both >= math.ceil(0.9 * config.step_b_trials)))
    arcs.detail = f"{both}/{config.step_b_trials} trials reached the far pole through both arcs"
    return [retention, arcs]


def _loop_domination(config: VerifyConfig) -> CheckResult:
    result = CheckResult("loop_below_engine")
    for i in range(config.instances):
        params = Params(n=config.loop_n, mu=0.75, lam=1.0, seed=trial_seed(config.seed, 5, i))
        outcome = stabilize(params, LeftmostUnstable(), config.budget)
        if not isinstance(outcome, Stabilized):
            result.count(Verdict.INDETERMINATE)
            continue
        report = run_loop(params, budget=config.budget)
        holds = report.total_instructions <= outcome.T
        if report.all_asleep:
            holds = holds and report.odometer.h == outcome.odometer.h
        result.count(_verdict(holds))
    return result


def verify_suite(config: Optional[VerifyConfig] = None) -> VerifySummary:
    """
    Run every check and collect per-check counts.

    Returns:
        VerifySummary; `passed` is False if any check saw a violation or an
        invalid mask
    """
    config = config or VerifyConfig()
    steps: List[Callable[[VerifyConfig], object]] = [
        _engine_checks,
        _oracle_equivalence,
        _lone_particle_law,
        _loop_domination,
    ]
    if config.statistical:
        steps += [_trap_statistics, _step_b_statistics]

    summary = VerifySummary()
    for step in steps:
        logger.info(f"Running {step.__name__.lstrip('_')}")
        outcome = step(config)
        summary.checks.extend(outcome if isinstance(outcome, list) else [outcome])
    logger.info("Verification passed" if summary.passed else "Verification failed")
    return summary
