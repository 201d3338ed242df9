"""
Trial orchestration over single parameter points and sweep grids.

Each trial gets its own 64-bit seed derived from (master seed, cell index,
trial index), so results do not depend on worker count or completion
order. Trials run in a process pool and are gathered in (cell, trial)
order.

Usage:
    records = run_trials(Params(n=256, mu=0.2, lam=1.0, seed=7), trials=10)
    grid = SweepGrid(ns=[16, 24, 32], mus=[0.9], lams=[0.005], trials=20, scheme=Scheme.LOOP)
    records = run_grid(grid)
"""

import itertools
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from arw_fixation.core import config as arw_config
from arw_fixation.core.errors import ARWError, BudgetExhaustedError
from arw_fixation.core.rules import point_mass_initial
from arw_fixation.core.schema import Params
from arw_fixation.engine.policies import policy_from_name
from arw_fixation.engine.toppling import Stabilized, stabilize
from arw_fixation.experiments.progress import SweepProgress
from arw_fixation.schemes.subcritical.scheme import full_scheme
from arw_fixation.schemes.supercritical.loop import run_loop

logger = logging.getLogger(__name__)


class Scheme(str, Enum):
    """How a trial stabilizes its instance."""
    DIRECT = "direct"
    SUBCRITICAL = "subcritical"
    LOOP = "loop"
    POINTMASS = "pointmass"


class TrialOutcome(str, Enum):
    FIXED = "fixed"
    CENSORED = "censored"


# ============================================================================
# DATA CLASSES
# ============================================================================

@dataclass
class TrialRecord:
    """
    One trial's result.

    Attributes:
        T: Instruction count; exact when FIXED, a lower bound when CENSORED
        sleepers: Sleepy sites in the final (or partial) configuration
        rounds: Completed loop rounds (loop scheme only)
        wall_ms: Wall-clock milliseconds, 0 unless timing was requested
        error: Message of an error that ended the trial early
    """
    n: int
    mu: float
    lam: float
    seed: int
    trial: int
    scheme: str
    T: int
    outcome: str
    sleepers: int
    rounds: Optional[int] = None
    wall_ms: int = 0
    cell: int = 0
    error: Optional[str] = None

    @property
    def censored(self) -> bool:
        return self.outcome == TrialOutcome.CENSORED.value

    def to_row(self) -> Dict[str, Any]:
        """Output fields under their file-format names."""
        return {
            "n": self.n,
            "mu": self.mu,
            "lambda": self.lam,
            "seed": self.seed,
            "trial": self.trial,
            "scheme": self.scheme,
            "T": self.T,
            "outcome": self.outcome,
            "sleepers": self.sleepers,
            "rounds": self.rounds,
            "wall_ms": self.wall_ms,
        }


@dataclass
class SweepGrid:
    """Cartesian grid of (n, mu, lambda) cells, each run for `trials` trials."""
    ns: Sequence[int]
    mus: Sequence[float]
    lams: Sequence[float]
    trials: int = 10
    budget: Optional[int] = None
    scheme: Scheme = Scheme.DIRECT
    seed: int = 0
    policy: str = "random"
    c0: Optional[float] = None
    max_rounds: Optional[int] = None
    explicit_cells: Optional[List[Tuple[int, float, float]]] = None

    def cells(self) -> List[Tuple[int, float, float]]:
        """(n, mu, lambda) per cell; explicit cells replace the Cartesian product."""
        if self.explicit_cells is not None:
            return list(self.explicit_cells)
        return list(itertools.product(self.ns, self.mus, self.lams))

    def cell_params(self) -> Iterator[Tuple[int, Params]]:
        for index, (n, mu, lam) in enumerate(self.cells()):
            yield index, Params(n=n, mu=mu, lam=lam, seed=self.seed)


@dataclass(frozen=True)
class TrialTask:
    """Everything a worker process needs to run one trial."""
    params: Params
    trial: int
    cell: int = 0
    scheme: Scheme = Scheme.DIRECT
    budget: Optional[int] = None
    policy: str = "random"
    c0: Optional[float] = None
    max_rounds: Optional[int] = None
    wall_clock: bool = False


# ============================================================================
# SEEDS
# ============================================================================

def trial_seed(master: int, cell: int, trial: int) -> int:
    """64-bit seed of one trial, independent of every other (cell, trial) pair."""
    sequence = np.random.SeedSequence(master, spawn_key=(cell, trial))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


# ============================================================================
# RUNNING
# ============================================================================

def run_one(task: TrialTask) -> TrialRecord:
    """Run one trial; ARW errors are recorded in the returned record."""
    params = task.params
    budget = arw_config.DEFAULT_BUDGET if task.budget is None else task.budget
    record = TrialRecord(
        n=params.n,
        mu=params.mu,
        lam=params.lam,
        seed=params.seed,
        trial=task.trial,
        scheme=task.scheme.value,
        T=0,
        outcome=TrialOutcome.CENSORED.value,
        sleepers=0,
        cell=task.cell,
    )
    start = time.perf_counter()

    try:
        if task.scheme in (Scheme.DIRECT, Scheme.POINTMASS):
            initial = point_mass_initial(params) if task.scheme == Scheme.POINTMASS else None
            policy = policy_from_name(task.policy, params.seed)
            outcome = stabilize(params, policy, budget, initial=initial)
            if isinstance(outcome, Stabilized):
                record.T, record.outcome = outcome.T, TrialOutcome.FIXED.value
                record.sleepers = outcome.final.sleepy_total
            else:
                record.T, record.sleepers = outcome.T_at_cap, outcome.partial.sleepy_total

        elif task.scheme == Scheme.SUBCRITICAL:
            try:
                report = full_scheme(params, c0=task.c0, budget=budget)
                record.T, record.outcome = report.T, TrialOutcome.FIXED.value
                record.sleepers = report.final.sleepy_total
            except BudgetExhaustedError as e:
                record.T = e.consumed
                config = getattr(e.state, "config", None)
                record.sleepers = config.sleepy_total if config is not None else 0

        else:
            loop = run_loop(params, max_rounds=task.max_rounds, budget=budget)
            record.T, record.rounds = loop.total_instructions, loop.rounds_completed
            record.sleepers = loop.final.sleepy_total
            if loop.all_asleep:
                record.outcome = TrialOutcome.FIXED.value

    except ARWError as e:
        logger.warning(f"Trial {task.trial} of cell {task.cell} ({params}) failed: {e.message}")
        record.error = e.message

    if task.wall_clock:
        record.wall_ms = round((time.perf_counter() - start) * 1000)
    return record


def _execute(tasks: List[TrialTask], workers: Optional[int]) -> Iterator[TrialRecord]:
    workers = arw_config.ARW_THREADS if workers is None else workers
    if workers <= 1 or len(tasks) <= 1:
        yield from map(run_one, tasks)
        return
    chunksize = max(1, len(tasks) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(run_one, tasks, chunksize=chunksize)


def run_trials(
    params: Params,
    trials: int,
    scheme: Scheme = Scheme.DIRECT,
    budget: Optional[int] = None,
    policy: str = "random",
    c0: Optional[float] = None,
    max_rounds: Optional[int] = None,
    workers: Optional[int] = None,
    wall_clock: bool = False,
) -> List[TrialRecord]:
    """
    Run `trials` independent trials of one parameter point.

    Args:
        params: Instance parameters; params.seed is the master seed
        trials: Number of trials (>= 1)
        scheme: direct, subcritical, loop or pointmass
        budget: Instruction cap per trial (default ARW_DEFAULT_BUDGET)
        policy: Toppling policy name for direct and pointmass runs
        c0: Interval coefficient for the subcritical scheme
        max_rounds: Round cap for the loop scheme
        workers: Process count (default ARW_THREADS; 1 runs inline)
        wall_clock: Measure wall_ms

    Returns:
        Records in trial order; record.seed reproduces each trial alone
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1 (got {trials})")
    tasks = [
        TrialTask(
            params=replace(params, seed=trial_seed(params.seed, 0, t)),
            trial=t,
            scheme=Scheme(scheme),
            budget=budget,
            policy=policy,
            c0=c0,
            max_rounds=max_rounds,
            wall_clock=wall_clock,
        )
        for t in range(trials)
    ]
    return list(_execute(tasks, workers))


def run_grid(
    grid: SweepGrid,
    workers: Optional[int] = None,
    progress: Optional[SweepProgress] = None,
    wall_clock: bool = False,
) -> List[TrialRecord]:
    """Run every cell of a grid; records come back in (cell, trial) order."""
    if grid.trials < 1:
        raise ValueError(f"trials must be >= 1 (got {grid.trials})")
    tasks = [
        TrialTask(
            params=replace(params, seed=trial_seed(grid.seed, cell, t)),
            trial=t,
            cell=cell,
            scheme=Scheme(grid.scheme),
            budget=grid.budget,
            policy=grid.policy,
            c0=grid.c0,
            max_rounds=grid.max_rounds,
            wall_clock=wall_clock,
        )
        for cell, params in grid.cell_params()
        for t in range(grid.trials)
    ]
    logger.info(f"Sweep: {len(grid.cells())} cells x {grid.trials} trials, scheme {grid.scheme}")

    records = []
    try:
        for record in _execute(tasks, workers):
            records.append(record)
            if progress is not None:
                progress.record(
                    record.cell, record.to_row(), record.censored, record.error is not None
                )
    except Exception as e:
        if progress is not None:
            progress.fail(str(e))
        raise
    if progress is not None:
        progress.complete()
    return records


# ============================================================================
# PRESETS
# ============================================================================

PRESETS: Dict[str, SweepGrid] = {
    "subcritical": SweepGrid(
        ns=[256, 512, 1024, 2048, 4096], mus=[0.3], lams=[2.0], trials=50,
        scheme=Scheme.DIRECT,
    ),
    "supercritical": SweepGrid(
        ns=[16, 20, 24, 32, 40], mus=[0.9], lams=[0.005], trials=50,
        budget=100_000_000, scheme=Scheme.DIRECT,
    ),
    "loop": SweepGrid(
        ns=[16, 20, 24, 32, 40], mus=[0.9], lams=[0.005], trials=50,
        budget=100_000_000, scheme=Scheme.LOOP,
    ),
    "pointmass": SweepGrid(
        ns=[128, 256, 512], mus=[0.5], lams=[1.0], trials=20, scheme=Scheme.POINTMASS,
    ),
}


def preset(name: str, seed: int = 0, trials: Optional[int] = None) -> SweepGrid:
    """Copy of a named preset grid with the given master seed (and trial count)."""
    if name not in PRESETS:
        raise ValueError(f"Unknown preset '{name}'; choose from {', '.join(PRESETS)}")
    grid = replace(PRESETS[name], seed=seed)
    if trials is not None:
        grid = replace(grid, trials=trials)
    return grid
