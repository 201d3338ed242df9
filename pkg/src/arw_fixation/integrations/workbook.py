"""
Excel export of scaling reports.

Each report series becomes one sheet with a per-n table and its flags;
the trial records, when given, go to a final "Records" sheet.

Usage:
    from arw_fixation.integrations.workbook import export_reports
    export_reports(reports, "output/supercritical.xlsx", records=records)
"""

import logging
import math
from pathlib import Path
from typing import Optional, Sequence, Union

from openpyxl import Workbook
from openpyxl.styles import Border, Font, PatternFill, Side
from openpyxl.worksheet.worksheet import Worksheet

from arw_fixation.cli.records import FIELDNAMES
from arw_fixation.experiments.reports import ScalingReport
from arw_fixation.experiments.trials import TrialRecord

logger = logging.getLogger(__name__)

HEADER_FILL = PatternFill(start_color="4472C4", end_color="4472C4", fill_type="solid")
HEADER_FONT = Font(bold=True, color="FFFFFF")
TITLE_FILL = PatternFill(start_color="FFFF00", end_color="FFFF00", fill_type="solid")
PASS_FILL = PatternFill(start_color="90EE90", end_color="90EE90", fill_type="solid")
FAIL_FILL = PatternFill(start_color="F4B084", end_color="F4B084", fill_type="solid")
ALT_FILL = PatternFill(start_color="D9E2F3", end_color="D9E2F3", fill_type="solid")
THIN_BORDER = Border(
    left=Side(style="thin"), right=Side(style="thin"),
    top=Side(style="thin"), bottom=Side(style="thin"),
)

REPORT_HEADERS = [
    "n", "Trials", "Censored", "Median T", "P95 T", "Normalized median",
    "Sleep bound scale", "Median ratio", "Too censored",
]


def _number(value: Optional[float]) -> Optional[float]:
    """openpyxl cannot store NaN or infinity."""
    if value is None or not math.isfinite(value):
        return None
    return value


def _write_headers(ws: Worksheet, row: int, headers: Sequence[str]) -> None:
    for col, header in enumerate(headers, 1):
        cell = ws.cell(row=row, column=col, value=header)
        cell.fill = HEADER_FILL
        cell.font = HEADER_FONT
        cell.border = THIN_BORDER


def _add_report_sheet(wb: Workbook, report: ScalingReport, index: int) -> None:
    ws = wb.create_sheet(f"{report.kind} {index}")

    ws.merge_cells("A1:I1")
    ws["A1"] = f"{report.kind} report: mu={report.mu!r}, lambda={report.lam!r}"
    ws["A1"].fill = TITLE_FILL
    ws["A1"].font = Font(bold=True)

    _write_headers(ws, 2, REPORT_HEADERS)
    for row_idx, point in enumerate(report.points, 3):
        summary = point.summary
        values = [
            point.n,
            summary.samples,
            summary.censored_fraction,
            _number(summary.median),
            _number(summary.p95),
            _number(point.normalized_median),
            _number(point.sleep_bound_scale),
            f"=D{row_idx}/D{row_idx - 1}" if row_idx > 3 else None,
            "yes" if point.too_censored else "",
        ]
        for col, value in enumerate(values, 1):
            cell = ws.cell(row=row_idx, column=col, value=value)
            cell.border = THIN_BORDER
        ws.cell(row=row_idx, column=3).number_format = "0.0%"

    row_idx = len(report.points) + 4
    if report.slope is not None:
        ws.cell(row=row_idx, column=1, value="Slope of ln(median T) vs n").font = Font(bold=True)
        ws.cell(row=row_idx, column=4, value=report.slope)
        ws.cell(row=row_idx, column=5, value=report.slope_stderr)
        row_idx += 1

    verdict = ws.cell(row=row_idx, column=1, value="PASS" if report.passed else "FLAGGED")
    verdict.font = Font(bold=True)
    verdict.fill = PASS_FILL if report.passed else FAIL_FILL
    for offset, flag in enumerate(report.flags, 1):
        ws.cell(row=row_idx + offset, column=1, value=flag)

    ws.column_dimensions["A"].width = 28
    for letter in "BCDEFGHI":
        ws.column_dimensions[letter].width = 16


def _add_records_sheet(wb: Workbook, records: Sequence[TrialRecord]) -> None:
    ws = wb.create_sheet("Records")
    _write_headers(ws, 1, FIELDNAMES)
    for row_idx, record in enumerate(records, 2):
        for col, value in enumerate(record.to_row().values(), 1):
            ws.cell(row=row_idx, column=col, value=value)
        if row_idx % 2 == 0:
            for col in range(1, len(FIELDNAMES) + 1):
                ws.cell(row=row_idx, column=col).fill = ALT_FILL
    ws.freeze_panes = "A2"


def export_reports(
    reports: Sequence[ScalingReport],
    path: Union[str, Path],
    records: Optional[Sequence[TrialRecord]] = None,
) -> Path:
    """
    Write reports (and optionally their records) to an .xlsx workbook.

    Args:
        reports: Report series, one sheet each
        path: Output file; parent directories are created
        records: Trial records for the Records sheet

    Returns:
        Path of the saved workbook
    """
    wb = Workbook()
    wb.remove(wb.active)
    for index, report in enumerate(reports, 1):
        _add_report_sheet(wb, report, index)
    if records is not None:
        _add_records_sheet(wb, records)
    if not wb.sheetnames:
        wb.create_sheet("Empty")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    wb.save(path)
    logger.info(f"Wrote {len(reports)} report sheet(s) to {path}")
    return path
