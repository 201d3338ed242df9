"""
Progress tracking for long sweeps.

State is persisted to a JSON file that can be polled while a sweep runs,
and every finished trial is appended to a JSON-lines log next to it.
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

logger = logging.getLogger(__name__)


class SweepStatus(str, Enum):
    QUEUED = "queued"
    RUNNING = "running"
    COMPLETED = "completed"
    ERROR = "error"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat().replace("+00:00", "Z")


@dataclass
class CellProgress:
    cell: int
    n: int
    mu: float
    lam: float
    trials_done: int = 0
    censored: int = 0
    errors: int = 0


@dataclass
class SweepState:
    """Complete state of a sweep for polling."""
    sweep_id: str
    status: str
    total_cells: int
    trials_per_cell: int
    cells: List[CellProgress] = field(default_factory=list)
    started_at: str = ""
    updated_at: str = ""
    message: Optional[str] = None

    def __post_init__(self):
        if not self.started_at:
            self.started_at = _now()
        self.updated_at = _now()

    @property
    def trials_done(self) -> int:
        return sum(c.trials_done for c in self.cells)

    @property
    def cells_done(self) -> int:
        return sum(1 for c in self.cells if c.trials_done >= self.trials_per_cell)

    @property
    def progress(self) -> int:
        total = self.total_cells * self.trials_per_cell
        if self.status == SweepStatus.COMPLETED.value:
            return 100
        return min(int(100 * self.trials_done / total), 99) if total else 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sweep_id": self.sweep_id,
            "status": self.status,
            "progress": self.progress,
            "total_cells": self.total_cells,
            "cells_done": self.cells_done,
            "trials_per_cell": self.trials_per_cell,
            "trials_done": self.trials_done,
            "censored": sum(c.censored for c in self.cells),
            "cells": [asdict(c) for c in self.cells],
            "started_at": self.started_at,
            "updated_at": self.updated_at,
            "message": self.message,
        }


class SweepProgress:
    """
    Persists sweep progress to `sweep_<id>_state.json` and `sweep_<id>_trials.jsonl`.

    Args:
        sweep_id: Identifier used in the file names
        output_dir: Directory for both files (created if missing)
        cells: (n, mu, lam) per grid cell, in grid order
        trials_per_cell: Trials each cell will run
    """

    def __init__(
        self,
        sweep_id: str,
        output_dir: Path,
        cells: List[tuple],
        trials_per_cell: int,
    ):
        self.sweep_id = sweep_id
        self.output_dir = Path(output_dir)
        self.state_file = self.output_dir / f"sweep_{sweep_id}_state.json"
        self.trials_file = self.output_dir / f"sweep_{sweep_id}_trials.jsonl"

        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.state = SweepState(
            sweep_id=sweep_id,
            status=SweepStatus.QUEUED.value,
            total_cells=len(cells),
            trials_per_cell=trials_per_cell,
            cells=[
                CellProgress(cell=i, n=n, mu=mu, lam=lam) for i, (n, mu, lam) in enumerate(cells)
            ],
        )
        self._write()

    def record(self, cell: int, row: Dict[str, Any], censored: bool, error: bool = False) -> None:
        """Count one finished trial and append its row to the trials log."""
        progress = self.state.cells[cell]
        progress.trials_done += 1
        progress.censored += int(censored)
        progress.errors += int(error)
        self.state.status = SweepStatus.RUNNING.value

        with open(self.trials_file, "a", encoding="utf-8") as f:
            f.write(json.dumps(row) + "\n")
        self._write()

    def complete(self) -> None:
        self.state.status = SweepStatus.COMPLETED.value
        self._write()
        logger.info(f"Sweep {self.sweep_id} completed: {self.state.trials_done} trials")

    def fail(self, message: str) -> None:
        self.state.status = SweepStatus.ERROR.value
        self.state.message = message
        self._write()

    def load(self) -> Dict[str, Any]:
        with open(self.state_file, encoding="utf-8") as f:
            return json.load(f)

    def _write(self) -> None:
        self.state.updated_at = _now()
        with open(self.state_file, "w", encoding="utf-8") as f:
            json.dump(self.state.to_dict(), f, indent=2)
