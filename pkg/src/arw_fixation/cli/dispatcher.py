#!/usr/bin/env python3
"""
Command-line entry point for the ARW fixation-time toolkit.

Data rows go to standard output (or --out); logs go to standard error.
Exit codes: 0 on success, 1 on usage, I/O or model errors, 2 when the
verification suite fails.
"""

import argparse
import contextlib
import json
import logging
import sys
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, TextIO, Tuple

from arw_fixation.cli.records import FORMATS, read_records, write_records
from arw_fixation.core import config as arw_config
from arw_fixation.core.errors import ARWError
from arw_fixation.core.schema import Configuration, Params
from arw_fixation.engine.policies import POLICY_NAMES
from arw_fixation.experiments.oracle import exact_expected_T
from arw_fixation.experiments.progress import SweepProgress
from arw_fixation.experiments.reports import REPORT_KINDS
from arw_fixation.experiments.trials import (
    PRESETS,
    Scheme,
    SweepGrid,
    TrialRecord,
    preset,
    run_grid,
    run_trials,
)
from arw_fixation.experiments.verify import VerifyConfig, verify_suite
from arw_fixation.schemes.subcritical.scheme import full_scheme
from arw_fixation.schemes.supercritical.loop import run_loop

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VERIFY_FAILED = 2

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class CliParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with status 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


# =============================================================================
# Argument types
# =============================================================================

def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def _float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")


def _mask_pairs(text: str) -> Tuple[Tuple[int, int], ...]:
    """Parse 'x:j,x:j' into (site, index) pairs."""
    try:
        pairs = []
        for part in text.split(","):
            if part.strip():
                x, j = part.split(":")
                pairs.append((int(x), int(j)))
        return tuple(pairs)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected site:index pairs, got '{text}'")


# =============================================================================
# Helpers
# =============================================================================

def setup_logging(verbose: bool = False) -> None:
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if arw_config.LOG_FILE:
        handlers.append(logging.FileHandler(arw_config.LOG_FILE))
    logging.basicConfig(
        level=logging.DEBUG if verbose else arw_config.LOG_LEVEL,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )
    logging.captureWarnings(True)


@contextlib.contextmanager
def _sink(path: Optional[str]) -> Iterator[TextIO]:
    if path is None:
        yield sys.stdout
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        yield f


def _emit(records: Sequence[TrialRecord], fmt: str, out: Optional[str]) -> None:
    with _sink(out) as sink:
        count = write_records(records, fmt, sink)
    logger.info(f"Wrote {count} record(s) as {fmt} to {out or 'stdout'}")


def _grid_from_file(path: str) -> List[Tuple[int, float, float]]:
    """Cells from a JSON-lines file using the record field names n, mu, lambda."""
    cells: List[Tuple[int, float, float]] = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            row = json.loads(line)
            cell = (int(row["n"]), float(row["mu"]), float(row["lambda"]))
            if cell not in cells:
                cells.append(cell)
    return cells


def _build_grid(args: argparse.Namespace) -> SweepGrid:
    if args.preset:
        grid = preset(args.preset, seed=args.seed, trials=args.trials)
    elif args.grid_file:
        cells = _grid_from_file(args.grid_file)
        grid = SweepGrid(ns=[], mus=[], lams=[], trials=args.trials or 10, explicit_cells=cells)
    else:
        if not (args.n and args.mu and args.lam):
            raise ValueError("give --n, --mu and --lambda lists, --grid-file or --preset")
        grid = SweepGrid(ns=args.n, mus=args.mu, lams=args.lam, trials=args.trials or 10)

    overrides = {"seed": args.seed}
    for name in ("budget", "c0", "max_rounds"):
        if getattr(args, name, None) is not None:
            overrides[name] = getattr(args, name)
    if getattr(args, "scheme", None):
        overrides["scheme"] = Scheme(args.scheme)
    if getattr(args, "policy", None):
        overrides["policy"] = args.policy
    for key, value in overrides.items():
        setattr(grid, key, value)
    return grid


# =============================================================================
# Commands
# =============================================================================

def cmd_run(args: argparse.Namespace) -> int:
    params = Params(n=args.n, mu=args.mu, lam=args.lam, seed=args.seed)
    records = run_trials(
        params,
        args.trials,
        scheme=Scheme(args.scheme),
        budget=args.budget,
        policy=args.policy,
        c0=args.c0,
        max_rounds=args.max_rounds,
        workers=args.workers,
        wall_clock=args.wall_clock,
    )
    _emit(records, args.format, args.out)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    grid = _build_grid(args)
    progress = None
    if args.progress_id:
        progress = SweepProgress(
            args.progress_id, Path(arw_config.OUTPUT_DIR), grid.cells(), grid.trials
        )
    records = run_grid(grid, workers=args.workers, progress=progress, wall_clock=args.wall_clock)
    _emit(records, args.format, args.out)
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    if args.records:
        fmt = "jsonl" if args.records.endswith(".jsonl") else "csv"
        with open(args.records, encoding="utf-8", newline="") as f:
            records = read_records(f, fmt)
        cells = sorted({(r.n, r.mu, r.lam) for r in records})
        grid = SweepGrid(ns=[], mus=[], lams=[], explicit_cells=cells)
    else:
        # no grid flags: use the preset of the same name
        if not args.preset and not args.grid_file and not args.n:
            args.preset = args.kind
        elif args.scheme is None and args.kind == "pointmass" and not args.preset:
            args.scheme = Scheme.POINTMASS.value
        grid = _build_grid(args)
        records = run_grid(grid, workers=args.workers)

    reports = REPORT_KINDS[args.kind](grid, records=records)
    print("\n\n".join(report.render() for report in reports))

    if args.xlsx:
        from arw_fixation.integrations.workbook import export_reports

        export_reports(reports, args.xlsx, records=records)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    config = VerifyConfig(
        instances=args.instances,
        seed=args.seed,
        max_n=args.max_n,
        invalid_mask=args.invalid_mask,
        oracle_trials=args.oracle_trials,
        oracle_max_n=args.oracle_max_n,
        lone_trials=args.lone_trials,
        statistical=not args.no_statistical,
    )
    if args.budget is not None:
        config.budget = args.budget
    summary = verify_suite(config)
    print(summary.table())
    return EXIT_OK if summary.passed else EXIT_VERIFY_FAILED


def cmd_scheme(args: argparse.Namespace) -> int:
    params = Params(n=args.n, mu=args.mu, lam=args.lam, seed=args.seed)
    report = full_scheme(params, c0=args.c0, budget=args.budget)
    succeeded = sum(report.per_interval_success)
    print(f"T={report.T}")
    print(f"T1={report.T1}")
    print(f"T2={report.T2}")
    print(f"T_fallback={report.T_fallback}")
    print(f"sources={report.layout.K}")
    print(f"interval_len={report.layout.interval_len}")
    print(f"trap_successes={succeeded}/{report.layout.K}")
    print(f"overall_success={str(report.overall_success).lower()}")
    return EXIT_OK


def cmd_loop(args: argparse.Namespace) -> int:
    params = Params(n=args.n, mu=args.mu, lam=args.lam, seed=args.seed)
    report = run_loop(params, max_rounds=args.max_rounds, budget=args.budget)
    print(f"termination={report.termination.value}")
    print(f"rounds={report.rounds_completed}")
    print(f"total_instructions={report.total_instructions}")
    print(f"final_active={report.final.active_total}")
    print(f"sustained_fraction={report.sustained_fraction()!r}")
    print(f"pole_steps_both_arcs={report.pole_steps_both_arcs}/{report.pole_steps}")
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    counts = [0] * args.n
    for x in args.occupied:
        if not 0 <= x < args.n:
            raise ValueError(f"occupied site {x} is outside 0..{args.n - 1}")
        counts[x] += 1
    result = exact_expected_T(args.n, Configuration.from_counts(counts), args.lam)
    exact = str(result.expected_T) if result.exact else "n/a"
    print(f"expected_T={exact} float={result.expected_T_float!r} states={result.state_count}")
    return EXIT_OK


# =============================================================================
# Parser
# =============================================================================

def _add_instance(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--n", type=int, required=required, help="Cycle size")
    p.add_argument("--mu", type=float, required=required, help="Particle density in (0, 1)")
    p.add_argument("--lambda", dest="lam", type=float, required=required, help="Sleep rate")
    p.add_argument("--seed", type=int, default=0, help="Master seed (default: 0)")


def _add_limits(p: argparse.ArgumentParser) -> None:
    p.add_argument("--budget", type=int, default=None,
                   help=f"Instruction cap per run (default: {arw_config.DEFAULT_BUDGET})")
    p.add_argument("--c0", type=float, default=None,
                   help=f"Subcritical interval coefficient (default: {arw_config.DEFAULT_C0})")
    p.add_argument("--max-rounds", type=int, default=None,
                   help=f"Loop round cap (default: {arw_config.DEFAULT_MAX_ROUNDS})")


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=FORMATS, default="csv", help="Record format (default: csv)")
    p.add_argument("--out", default=None, help="Output file (default: standard output)")
    p.add_argument("--wall-clock", action="store_true", help="Measure wall_ms per trial")
    p.add_argument("--workers", type=int, default=None,
                   help=f"Worker processes (default: ARW_THREADS={arw_config.ARW_THREADS})")


def _add_trial_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--policy", choices=sorted(POLICY_NAMES), default="random",
                   help="Toppling policy for direct runs (default: random)")
    p.add_argument("--scheme", choices=[s.value for s in Scheme], default="direct",
                   help="How each trial stabilizes (default: direct)")


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=_int_list, default=None, help="Comma list of cycle sizes")
    p.add_argument("--mu", type=_float_list, default=None, help="Comma list of densities")
    p.add_argument("--lambda", dest="lam", type=_float_list, default=None,
                   help="Comma list of sleep rates")
    p.add_argument("--grid-file", default=None,
                   help="JSON-lines file of cells with fields n, mu, lambda")
    p.add_argument("--preset", choices=sorted(PRESETS), default=None, help="Named grid")
    p.add_argument("--trials", type=int, default=None, help="Trials per cell (default: 10)")
    p.add_argument("--seed", type=int, default=0, help="Master seed (default: 0)")


def build_parser() -> CliParser:
    common = CliParser(add_help=False)
    common.add_argument("--verbose", action="store_true", help="Enable debug logging")

    parser = CliParser(
        prog="arw-fixation",
        description="Activated random walk fixation times on the cycle",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Ten direct trials, CSV on stdout
  %(prog)s run --n 1024 --mu 0.2 --lambda 1.0 --seed 7 --trials 10

  # Grid sweep to a file
  %(prog)s sweep --n 256,512,1024 --mu 0.3 --lambda 2.0 --trials 50 --out output/sub.csv

  # Exact expected T for two particles on a 3-cycle
  %(prog)s oracle --n 3 --occupied 0,1 --lambda 1.0

  # Verification suite (exit 2 on failure)
  %(prog)s verify --instances 100 --seed 1

  # Supercritical growth report with a workbook
  %(prog)s report --kind supercritical --preset supercritical --trials 20 --xlsx out.xlsx

Environment Variables:
  ARW_THREADS             Worker cap (default: logical cores)
  ARW_DEFAULT_BUDGET      Instruction budget per run
  ARW_MAX_ROUNDS          Stabilization loop round cap
  ARW_DEFAULT_C0          Subcritical interval coefficient
  ARW_ORACLE_MAX_STATES   Oracle state-space cap
  ARW_OUTPUT_DIR          Directory for progress files
  ARW_LOG_LEVEL           Log level (default: INFO)
  ARW_LOG_FILE            Extra log file
        """,
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("run", parents=[common], help="Independent trials of one instance")
    _add_instance(p)
    p.add_argument("--trials", type=int, default=1, help="Number of trials (default: 1)")
    _add_limits(p)
    _add_trial_options(p)
    _add_output(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", parents=[common], help="Trials over a parameter grid")
    _add_grid(p)
    _add_limits(p)
    _add_trial_options(p)
    _add_output(p)
    p.add_argument("--progress-id", default=None,
                   help="Write sweep_<id>_state.json progress files to ARW_OUTPUT_DIR")
    p.set_defaults(func=cmd_sweep, scheme=None, policy=None)

    p = sub.add_parser("report", parents=[common], help="Scaling report over a grid")
    p.add_argument("--kind", choices=sorted(REPORT_KINDS), required=True, help="Report type")
    _add_grid(p)
    _add_limits(p)
    _add_trial_options(p)
    p.add_argument("--records", default=None, help="Build the report from a CSV/JSONL file")
    p.add_argument("--xlsx", default=None, help="Also export the report to this workbook")
    p.add_argument("--workers", type=int, default=None, help="Worker processes")
    p.set_defaults(func=cmd_report, scheme=None, policy=None)

    p = sub.add_parser("verify", parents=[common], help="Run the verification suite")
    p.add_argument("--instances", type=int, default=100, help="Instances per check (default: 100)")
    p.add_argument("--seed", type=int, default=1, help="Master seed (default: 1)")
    p.add_argument("--budget", type=int, default=None, help="Instruction cap per engine run")
    p.add_argument("--max-n", type=int, default=12, help="Largest cycle for engine checks")
    p.add_argument("--oracle-trials", type=int, default=2_000,
                   help="Oracle Monte Carlo trials per start (default: 2000)")
    p.add_argument("--oracle-max-n", type=int, default=4,
                   help="Largest cycle of the oracle grid (default: 4)")
    p.add_argument("--lone-trials", type=int, default=20_000, help="Lone-particle law samples")
    p.add_argument("--no-statistical", action="store_true",
                   help="Skip the scheme-level statistical checks")
    p.add_argument("--invalid-mask", type=_mask_pairs, default=(),
                   help="Extra site:index sleep-mask pairs for the monotonicity check")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scheme", parents=[common], help="One gather-and-trap scheme run")
    _add_instance(p)
    p.add_argument("--c0", type=float, default=None, help="Interval coefficient")
    p.add_argument("--budget", type=int, default=None, help="Instruction cap")
    p.set_defaults(func=cmd_scheme)

    p = sub.add_parser("loop", parents=[common], help="One X/Y stabilization loop run")
    _add_instance(p)
    p.add_argument("--max-rounds", type=int, default=None, help="Round cap")
    p.add_argument("--budget", type=int, default=None, help="Instruction cap")
    p.set_defaults(func=cmd_loop)

    p = sub.add_parser("oracle", parents=[common], help="Exact expected T on a small cycle")
    p.add_argument("--n", type=int, required=True, help="Cycle size")
    p.add_argument("--occupied", type=_int_list, required=True,
                   help="Comma list of occupied sites (repeat a site to stack particles)")
    p.add_argument("--lambda", dest="lam", type=float, required=True, help="Sleep rate")
    p.set_defaults(func=cmd_oracle)

    return parser


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse argv and run the selected command.

    Returns:
        Exit code (0 ok, 1 error, 2 verification failure)
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_ERROR

    setup_logging(args.verbose)
    arw_config.validate_config()
    logger.debug(arw_config.get_config_summary())

    try:
        return args.func(args)
    except (ARWError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_ERROR
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return EXIT_ERROR
    except KeyboardInterrupt:
        logger.warning("Interrupted by user")
        return 130


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
