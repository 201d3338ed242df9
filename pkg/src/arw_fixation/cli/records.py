"""
CSV and JSON-lines serialization of trial records.

Both formats use the same field names. Floats are written in their
shortest round-trip form and lines end in LF.
"""

import csv
import json
from typing import Any, Dict, Iterable, List, TextIO

from arw_fixation.experiments.trials import TrialRecord

FIELDNAMES = [
    "n",
    "mu",
    "lambda",
    "seed",
    "trial",
    "scheme",
    "T",
    "outcome",
    "sleepers",
    "rounds",
    "wall_ms",
]

FORMATS = ("csv", "jsonl")


def write_records(records: Iterable[TrialRecord], fmt: str, sink: TextIO) -> int:
    """
    Write records to an open text sink.

    Args:
        records: Trial records, written in the given order
        fmt: csv or jsonl
        sink: Text stream; open files with newline="" for exact LF output

    Returns:
        Number of data rows written
    """
    if fmt not in FORMATS:
        raise ValueError(f"Unknown format '{fmt}' (choose from {', '.join(FORMATS)})")

    count = 0
    if fmt == "csv":
        writer = csv.DictWriter(sink, fieldnames=FIELDNAMES, lineterminator="\n")
        writer.writeheader()
        for record in records:
            writer.writerow({k: ("" if v is None else v) for k, v in record.to_row().items()})
            count += 1
    else:
        for record in records:
            sink.write(json.dumps(record.to_row()) + "\n")
            count += 1
    return count


def _record_from_row(row: Dict[str, Any]) -> TrialRecord:
    rounds = row.get("rounds")
    return TrialRecord(
        n=int(row["n"]),
        mu=float(row["mu"]),
        lam=float(row["lambda"]),
        seed=int(row["seed"]),
        trial=int(row["trial"]),
        scheme=str(row["scheme"]),
        T=int(row["T"]),
        outcome=str(row["outcome"]),
        sleepers=int(row["sleepers"]),
        rounds=None if rounds in (None, "") else int(rounds),
        wall_ms=int(row.get("wall_ms") or 0),
    )


def read_records(source: TextIO, fmt: str = "csv") -> List[TrialRecord]:
    """Parse records written by write_records."""
    if fmt not in FORMATS:
        raise ValueError(f"Unknown format '{fmt}' (choose from {', '.join(FORMATS)})")
    if fmt == "csv":
        return [_record_from_row(row) for row in csv.DictReader(source)]
    return [_record_from_row(json.loads(line)) for line in source if line.strip()]
