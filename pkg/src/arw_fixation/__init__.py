"""
arw_fixation - Activated Random Walk fixation times on the cycle

Simulates ARW on Z/nZ with site-wise instruction stacks, stabilizes
configurations under any toppling policy, and runs the constructive
schemes behind the logarithmic (subcritical) and exponential
(supercritical) fixation-time regimes.
"""

__version__ = "1.0.0"

from arw_fixation.core.config import validate_config, get_config_summary
from arw_fixation.core.schema import Configuration, Odometer, Params
from arw_fixation.engine.toppling import stabilize
from arw_fixation.experiments.oracle import exact_expected_T
from arw_fixation.experiments.trials import run_trials
from arw_fixation.experiments.verify import verify_suite
from arw_fixation.schemes.subcritical.scheme import full_scheme
from arw_fixation.schemes.supercritical.loop import run_loop

__all__ = [
    "validate_config",
    "get_config_summary",
    "Configuration",
    "Odometer",
    "Params",
    "stabilize",
    "exact_expected_T",
    "run_trials",
    "verify_suite",
    "full_scheme",
    "run_loop",
]
