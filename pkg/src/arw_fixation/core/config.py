#!/usr/bin/env python3
"""
Configuration for the ARW fixation-time toolkit.
Handles environment variable loading and validation.
"""

import logging
import os
import sys
from typing import List, Optional

# Load environment variables from .env file if present
try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    pass


# =============================================================================
# Parallelism
# =============================================================================

# Worker cap for trial parallelism (defaults to logical cores)
ARW_THREADS: int = int(os.getenv("ARW_THREADS", str(os.cpu_count() or 1)))


# =============================================================================
# Run Limits
# =============================================================================

# Instruction budget per run; supercritical runs are censored here
DEFAULT_BUDGET: int = int(os.getenv("ARW_DEFAULT_BUDGET", "1000000000"))

# Round cap for the stabilization loop
DEFAULT_MAX_ROUNDS: int = int(os.getenv("ARW_MAX_ROUNDS", "1000000"))

# Interval coefficient for the subcritical scheme: interval_len = floor(c0 * ln n)
DEFAULT_C0: float = float(os.getenv("ARW_DEFAULT_C0", "10.0"))


# =============================================================================
# Exact Oracle
# =============================================================================

ORACLE_MAX_STATES: int = int(os.getenv("ARW_ORACLE_MAX_STATES", "1000000"))

# Chains up to this size are also solved in exact rationals
RATIONAL_MAX_STATES: int = int(os.getenv("ARW_RATIONAL_MAX_STATES", "400"))


# =============================================================================
# Output & Logging
# =============================================================================

OUTPUT_DIR: str = os.getenv("ARW_OUTPUT_DIR", "output")

LOG_LEVEL: str = os.getenv("ARW_LOG_LEVEL", "INFO").upper()

# Optional extra log file
LOG_FILE: Optional[str] = os.getenv("ARW_LOG_FILE")


# =============================================================================
# Validation
# =============================================================================

def config_errors() -> List[str]:
    """Collect every configuration problem without exiting."""
    errors = []

    if ARW_THREADS < 1:
        errors.append(f"ARW_THREADS must be >= 1 (got {ARW_THREADS})")

    if DEFAULT_BUDGET < 0:
        errors.append(f"ARW_DEFAULT_BUDGET must be >= 0 (got {DEFAULT_BUDGET})")

    if DEFAULT_MAX_ROUNDS < 0:
        errors.append(f"ARW_MAX_ROUNDS must be >= 0 (got {DEFAULT_MAX_ROUNDS})")

    if DEFAULT_C0 <= 0:
        errors.append(f"ARW_DEFAULT_C0 must be positive (got {DEFAULT_C0})")

    if ORACLE_MAX_STATES < 1:
        errors.append(f"ARW_ORACLE_MAX_STATES must be >= 1 (got {ORACLE_MAX_STATES})")

    if LOG_LEVEL not in logging.getLevelNamesMapping():
        errors.append(f"ARW_LOG_LEVEL '{LOG_LEVEL}' is not a logging level")

    return errors


def validate_config() -> None:
    """
    Validate the environment-derived configuration.
    Raises SystemExit if any value is unusable.
    """
    errors = config_errors()

    if errors:
        print("Configuration Error(s):", file=sys.stderr)
        for error in errors:
            print(f"  - {error}", file=sys.stderr)
        print("\nPlease fix the ARW_* environment variables and try again.", file=sys.stderr)
        sys.exit(1)


def get_config_summary() -> str:
    """Get a summary of the current configuration (for logging)."""
    log_file = LOG_FILE or "stderr only"

    return f"""
ARW Fixation Toolkit Configuration:
  Parallelism:
    - Worker threads: {ARW_THREADS}

  Run limits:
    - Default budget: {DEFAULT_BUDGET}
    - Max loop rounds: {DEFAULT_MAX_ROUNDS}
    - Default c0: {DEFAULT_C0}

  Oracle:
    - Max states: {ORACLE_MAX_STATES}
    - Rational solve up to: {RATIONAL_MAX_STATES} states

  Output:
    - Output directory: {OUTPUT_DIR}
    - Log level: {LOG_LEVEL}
    - Log file: {log_file}
"""


if __name__ == "__main__":
    print("Validating configuration...")
    validate_config()
    print("Configuration is valid!")
    print(get_config_summary())
