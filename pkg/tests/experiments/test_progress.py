"""Tests for sweep progress persistence."""

import json

from arw_fixation.experiments.progress import SweepProgress, SweepStatus

CELLS = [(8, 0.5, 1.0), (16, 0.5, 1.0)]


def test_new_sweep_is_queued(tmp_path):
    """The state file exists from the start."""
    progress = SweepProgress("a", tmp_path / "out", CELLS, 2)
    state = json.loads((tmp_path / "out" / "sweep_a_state.json").read_text())
    assert state["status"] == SweepStatus.QUEUED.value
    assert state["progress"] == 0
    assert state["total_cells"] == 2
    assert progress.state.cells[1].n == 16


def test_record_updates_counts_and_log(tmp_path):
    """Each record bumps its cell and appends one JSON line."""
    progress = SweepProgress("b", tmp_path, CELLS, 2)
    progress.record(0, {"T": 3}, censored=False)
    progress.record(0, {"T": 9}, censored=True)
    progress.record(1, {"T": 1}, censored=False, error=True)

    state = progress.load()
    assert state["status"] == "running"
    assert state["trials_done"] == 3
    assert state["cells_done"] == 1
    assert state["censored"] == 1
    assert state["progress"] == 75
    assert state["cells"][1]["errors"] == 1
    lines = (tmp_path / "sweep_b_trials.jsonl").read_text().splitlines()
    assert [json.loads(line)["T"] for line in lines] == [3, 9, 1]


def test_complete_and_fail(tmp_path):
    """Terminal states are persisted with their message."""
    progress = SweepProgress("c", tmp_path, CELLS, 1)
    progress.complete()
    assert progress.load()["progress"] == 100

    failed = SweepProgress("d", tmp_path, CELLS, 1)
    failed.fail("worker died")
    state = failed.load()
    assert state["status"] == "error"
    assert state["message"] == "worker died"
