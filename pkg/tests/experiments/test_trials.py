"""Tests for trial orchestration and seeding."""

import pytest

from arw_fixation.core.schema import Params
from arw_fixation.engine.policies import RandomUnstable
from arw_fixation.engine.toppling import stabilize
from arw_fixation.experiments.progress import SweepProgress
from arw_fixation.experiments.trials import (
    Scheme,
    SweepGrid,
    TrialOutcome,
    preset,
    run_grid,
    run_trials,
    trial_seed,
)


@pytest.fixture
def params():
    return Params(n=32, mu=0.3, lam=1.0, seed=7)


def test_trial_seeds_are_distinct_and_stable():
    """Every (cell, trial) pair has its own seed, the same on every call."""
    seeds = {trial_seed(7, cell, t) for cell in range(3) for t in range(20)}
    assert len(seeds) == 60
    assert trial_seed(7, 1, 2) == trial_seed(7, 1, 2)
    assert trial_seed(7, 1, 2) != trial_seed(8, 1, 2)


def test_run_trials_is_deterministic(params):
    """Same inputs, same records."""
    first = run_trials(params, 4, workers=1)
    second = run_trials(params, 4, workers=1)
    assert [r.to_row() for r in first] == [r.to_row() for r in second]
    assert [r.trial for r in first] == [0, 1, 2, 3]


def test_record_seed_reproduces_the_trial_alone(params):
    """A record's seed is enough to rerun its trial directly."""
    record = run_trials(params, 3, workers=1)[2]
    rerun = stabilize(
        Params(n=params.n, mu=params.mu, lam=params.lam, seed=record.seed),
        RandomUnstable(record.seed),
    )
    assert record.outcome == TrialOutcome.FIXED.value
    assert record.T == rerun.T
    assert record.sleepers == rerun.final.sleepy_total


def test_tiny_budget_censors(params):
    """A run that hits its cap is censored with T at most the cap."""
    big = Params(n=64, mu=0.5, lam=1.0, seed=3)
    record = run_trials(big, 1, budget=5, workers=1)[0]
    assert record.censored
    assert record.T <= 5


def test_loop_scheme_records_rounds():
    """Loop trials report completed rounds."""
    record = run_trials(
        Params(n=8, mu=0.5, lam=1.0, seed=2), 1, scheme=Scheme.LOOP, workers=1
    )[0]
    assert record.scheme == "loop"
    assert record.rounds is not None
    assert record.outcome == TrialOutcome.FIXED.value


def test_pointmass_scheme_runs():
    """Point-mass trials start from floor(mu n) stacked particles."""
    record = run_trials(
        Params(n=16, mu=0.25, lam=2.0, seed=5), 1, scheme=Scheme.POINTMASS, workers=1
    )[0]
    assert record.outcome == TrialOutcome.FIXED.value
    assert record.T >= 4
    assert record.sleepers == 4


def test_model_errors_are_recorded_not_raised():
    """A layout too coarse for n ends the trial with an error message."""
    record = run_trials(
        Params(n=20, mu=0.2, lam=1.0, seed=1), 1, scheme=Scheme.SUBCRITICAL, c0=10.0, workers=1
    )[0]
    assert record.error is not None
    assert "cannot hold" in record.error


def test_trials_must_be_positive(params):
    """Zero trials is a usage error."""
    with pytest.raises(ValueError, match="trials must be >= 1"):
        run_trials(params, 0)


def test_grid_cells_and_order():
    """Cells are the Cartesian product; records come back in (cell, trial) order."""
    grid = SweepGrid(ns=[8, 12], mus=[0.5], lams=[1.0, 2.0], trials=2, seed=4)
    assert grid.cells() == [(8, 0.5, 1.0), (8, 0.5, 2.0), (12, 0.5, 1.0), (12, 0.5, 2.0)]
    records = run_grid(grid, workers=1)
    assert [(r.cell, r.trial) for r in records] == [(c, t) for c in range(4) for t in range(2)]
    assert records[5].n == 12 and records[5].lam == 1.0


def test_explicit_cells_replace_product():
    """A grid file's cells are used as given."""
    grid = SweepGrid(ns=[], mus=[], lams=[], explicit_cells=[(10, 0.4, 1.0)], trials=1)
    assert grid.cells() == [(10, 0.4, 1.0)]


def test_grid_reports_progress(tmp_path):
    """Progress files see every trial and end completed."""
    grid = SweepGrid(ns=[8], mus=[0.5], lams=[1.0], trials=3)
    progress = SweepProgress("t", tmp_path, grid.cells(), grid.trials)
    run_grid(grid, workers=1, progress=progress)
    state = progress.load()
    assert state["status"] == "completed"
    assert state["trials_done"] == 3
    assert len((tmp_path / "sweep_t_trials.jsonl").read_text().splitlines()) == 3


def test_presets():
    """Presets copy with the requested seed and trial count."""
    grid = preset("loop", seed=9, trials=3)
    assert grid.scheme == Scheme.LOOP
    assert grid.seed == 9 and grid.trials == 3
    assert preset("loop").trials == 50
    with pytest.raises(ValueError, match="Unknown preset"):
        preset("critical")


def test_pointmass_preset_parameters():
    """The point-mass preset stacks mu * n particles at lambda = 1, mu = 0.5."""
    grid = preset("pointmass")
    assert grid.scheme == Scheme.POINTMASS
    assert list(grid.ns) == [128, 256, 512]
    assert list(grid.mus) == [0.5]
    assert list(grid.lams) == [1.0]
