"""Scan serialization.

CSV with a one-line header; raw scans carry five columns, subtracted scans
add the background rate and its error. Numbers are written with repr so a
write -> read -> write cycle is byte-identical (counts keep their int/float
identity through a dedicated parse).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .experiment import CountRecord, ScanResult

RAW_COLUMNS = ("setting", "counts", "integration_time_s", "rate_per_s", "rate_err_per_s")
BG_COLUMNS = ("bg_rate_per_s", "bg_rate_err_per_s")


def _format_counts(counts) -> str:
    if isinstance(counts, int):
        return str(counts)
    return repr(float(counts))


def _parse_counts(token: str):
    if "." in token or "e" in token or "E" in token:
        return float(token)
    return int(token)


def write_scan_csv(scan: ScanResult, path) -> None:
    subtracted = scan.subtracted
    for rec in scan.records:
        if (rec.bg_rate is None) == subtracted:
            raise ValueError("mixed subtracted and raw records in one scan")
    columns = RAW_COLUMNS + BG_COLUMNS if subtracted else RAW_COLUMNS
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for rec in scan.records:
            row = [
                repr(rec.setting),
                _format_counts(rec.counts),
                repr(rec.integration_time),
                repr(rec.rate),
                repr(rec.rate_err),
            ]
            if subtracted:
                row += [repr(rec.bg_rate), repr(rec.bg_rate_err)]
            writer.writerow(row)


def read_scan_csv(path, kind: str) -> ScanResult:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise ValueError(f"{path}: empty scan file") from None
        if header == RAW_COLUMNS:
            subtracted = False
        elif header == RAW_COLUMNS + BG_COLUMNS:
            subtracted = True
        else:
            raise ValueError(f"{path}: unrecognized scan header {header}")
        records = []
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}: row has {len(row)} fields, expected {len(header)}")
            records.append(
                CountRecord(
                    setting=float(row[0]),
                    counts=_parse_counts(row[1]),
                    integration_time=float(row[2]),
                    rate=float(row[3]),
                    rate_err=float(row[4]),
                    bg_rate=float(row[5]) if subtracted else None,
                    bg_rate_err=float(row[6]) if subtracted else None,
                )
            )
    return ScanResult(kind=kind, records=tuple(records))


def write_report(report: dict, path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")


def read_report(path) -> dict:
    return json.loads(Path(path).read_text())
