"""Trial orchestration, the exact oracle, statistics, reports and verification."""

from arw_fixation.experiments.oracle import OracleResult, exact_expected_T
from arw_fixation.experiments.trials import (
    PRESETS,
    Scheme,
    SweepGrid,
    TrialOutcome,
    TrialRecord,
    preset,
    run_grid,
    run_trials,
    trial_seed,
)
from arw_fixation.experiments.progress import SweepProgress
from arw_fixation.experiments.reports import (
    REPORT_KINDS,
    ScalingReport,
    pointmass_scaling_report,
    subcritical_scaling_report,
    supercritical_growth_report,
)
from arw_fixation.experiments.verify import VerifyConfig, VerifySummary, verify_suite

__all__ = [
    "OracleResult",
    "exact_expected_T",
    "PRESETS",
    "Scheme",
    "SweepGrid",
    "TrialOutcome",
    "TrialRecord",
    "preset",
    "run_grid",
    "run_trials",
    "trial_seed",
    "SweepProgress",
    "REPORT_KINDS",
    "ScalingReport",
    "pointmass_scaling_report",
    "subcritical_scaling_report",
    "supercritical_growth_report",
    "VerifyConfig",
    "VerifySummary",
    "verify_suite",
]
