"""Command-line interface and record serialization."""

from arw_fixation.cli.dispatcher import dispatch, main
from arw_fixation.cli.records import FIELDNAMES, FORMATS, read_records, write_records

__all__ = ["dispatch", "main", "FIELDNAMES", "FORMATS", "read_records", "write_records"]
