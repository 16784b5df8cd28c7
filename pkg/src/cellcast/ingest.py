"""CDR log parsing and 30-minute binning.

Raw activity logs are tab-separated text, one record per line, with the
grid-cell id, an epoch-millisecond timestamp and an internet-activity
magnitude in configurable columns (defaults match the common 8-column
telecom layout: square_id, time, country, sms-in, sms-out, call-in,
call-out, internet). Records are aggregated per cell into fixed
30-minute bins covering a declared span; empty bins are explicit zeros.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

import numpy as np

from .errors import MalformedLine, NegativeActivity, UnalignedSpan

BIN_WIDTH_MS = 30 * 60 * 1000
BIN_WIDTH_MINUTES = 30
MS_PER_HOUR = 3_600_000


@dataclass(frozen=True)
class ColumnMap:
    """Zero-based indices of the mandatory columns in a CDR line."""

    cell_id: int = 0
    timestamp: int = 1
    internet: int = 7


DEFAULT_COLUMNS = ColumnMap()


@dataclass(frozen=True)
class CdrRecord:
    cell_id: int
    timestamp: int
    internet_activity: float


@dataclass
class BinnedCellSeries:
    """Per-cell series of 30-minute activity sums over a fixed span."""

    cell_id: int
    span_start: int
    values: np.ndarray
    bin_width_ms: int = BIN_WIDTH_MS

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)

    @property
    def n_bins(self) -> int:
        return len(self.values)

    def bin_start(self, index: int) -> int:
        return self.span_start + index * self.bin_width_ms


@dataclass
class BinningResult:
    """Binned series per cell plus the count of out-of-span records."""

    cells: dict[int, BinnedCellSeries]
    dropped: int = 0
    span_start: int = 0
    span_end: int = 0


def parse_cdr_line(line: str, columns: ColumnMap = DEFAULT_COLUMNS) -> Optional[CdrRecord]:
    """Parse one tab-separated CDR line.

    Returns None (skip) when the line is blank or its internet-activity
    field is empty, the dataset convention for an inactive channel.

    Raises
    ------
    MalformedLine
        A mandatory column is absent or non-numeric.
    NegativeActivity
        The activity field parses below zero.
    """
    stripped = line.rstrip("\r\n")
    if not stripped.strip():
        return None
    fields = stripped.split("\t")
    needed = max(columns.cell_id, columns.timestamp, columns.internet)
    if len(fields) <= needed:
        raise MalformedLine(f"expected at least {needed + 1} columns, got {len(fields)}")

    raw_activity = fields[columns.internet].strip()
    if raw_activity == "":
        return None

    raw_id = fields[columns.cell_id].strip()
    raw_ts = fields[columns.timestamp].strip()
    try:
        cell_id = int(raw_id)
        timestamp = int(raw_ts)
    except ValueError:
        raise MalformedLine(f"non-numeric cell id or timestamp: {raw_id!r}, {raw_ts!r}") from None
    if cell_id < 1:
        raise MalformedLine(f"cell id must be >= 1, got {cell_id}")

    try:
        activity = float(raw_activity)
    except ValueError:
        raise MalformedLine(f"non-numeric activity field: {raw_activity!r}") from None
    if not np.isfinite(activity):
        raise MalformedLine(f"non-finite activity value: {raw_activity!r}")
    if activity < 0:
        raise NegativeActivity(f"activity {activity} < 0")

    return CdrRecord(cell_id, timestamp, activity)


def iter_cdr_file(path: str, columns: ColumnMap = DEFAULT_COLUMNS) -> Iterator[CdrRecord]:
    """Yield records from one log file, skipping an optional header line.

    A header is detected by a non-numeric first field on the first line.
    """
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            if lineno == 0:
                first = line.split("\t", 1)[0].strip()
                try:
                    float(first)
                except ValueError:
                    continue
            record = parse_cdr_line(line, columns)
            if record is not None:
                yield record


CDR_EXTENSIONS = (".tsv", ".txt", ".dat")


def iter_cdr_paths(paths: Iterable[str], columns: ColumnMap = DEFAULT_COLUMNS) -> Iterator[CdrRecord]:
    """Yield records from files or directories, files in sorted order.

    Directory listings keep only CDR-looking extensions (.tsv, .txt,
    .dat) so sidecar files such as truth.csv are not swept up; name any
    other file explicitly to read it.
    """
    for path in paths:
        if os.path.isdir(path):
            for name in sorted(os.listdir(path)):
                sub = os.path.join(path, name)
                if os.path.isfile(sub) and name.lower().endswith(CDR_EXTENSIONS):
                    yield from iter_cdr_file(sub, columns)
        else:
            yield from iter_cdr_file(path, columns)


def bin_series(records: Iterable[CdrRecord], span_start: int, span_end: int) -> BinningResult:
    """Aggregate records into per-cell 30-minute activity sums.

    Bin b of a cell holds the sum of internet_activity over its records
    with span_start + b*30min <= timestamp < span_start + (b+1)*30min.
    Accumulation is compensated (Kahan) so the per-cell totals match an
    exact sum to high precision. Records outside [span_start, span_end)
    are dropped and counted, not treated as errors.

    Raises
    ------
    UnalignedSpan
        Span boundaries are not 30-minute aligned or start >= end.
    """
    if span_start % BIN_WIDTH_MS or span_end % BIN_WIDTH_MS:
        raise UnalignedSpan("span boundaries must be whole multiples of 30 minutes")
    if span_start >= span_end:
        raise UnalignedSpan("span_start must precede span_end")
    n_bins = (span_end - span_start) // BIN_WIDTH_MS

    sums: dict[int, np.ndarray] = {}
    comps: dict[int, np.ndarray] = {}
    dropped = 0
    for rec in records:
        if not (span_start <= rec.timestamp < span_end):
            dropped += 1
            continue
        values = sums.get(rec.cell_id)
        if values is None:
            values = np.zeros(n_bins)
            sums[rec.cell_id] = values
            comps[rec.cell_id] = np.zeros(n_bins)
        comp = comps[rec.cell_id]
        b = (rec.timestamp - span_start) // BIN_WIDTH_MS
        # Kahan step: carry the rounding error of each addition forward.
        y = rec.internet_activity - comp[b]
        t = values[b] + y
        comp[b] = (t - values[b]) - y
        values[b] = t

    cells = {
        cid: BinnedCellSeries(cid, span_start, values)
        for cid, values in sums.items()
    }
    return BinningResult(cells=cells, dropped=dropped, span_start=span_start, span_end=span_end)


def merge_binned(a: dict[int, BinnedCellSeries], b: dict[int, BinnedCellSeries]) -> dict[int, BinnedCellSeries]:
    """Merge two partial bin maps by element-wise addition (associative)."""
    merged = {cid: BinnedCellSeries(cid, s.span_start, s.values.copy(), s.bin_width_ms) for cid, s in a.items()}
    for cid, series in b.items():
        if cid in merged:
            base = merged[cid]
            if base.span_start != series.span_start or base.n_bins != series.n_bins:
                raise UnalignedSpan("cannot merge bin maps over different spans")
            base.values = base.values + series.values
        else:
            merged[cid] = BinnedCellSeries(cid, series.span_start, series.values.copy(), series.bin_width_ms)
    return merged


# --- persistence ----------------------------------------------------------

def save_bins_json(cells: dict[int, BinnedCellSeries], path: str) -> None:
    """Write `{span_start, bin_width_minutes, cells: {id: [values]}}`."""
    if not cells:
        doc = {"span_start": 0, "bin_width_minutes": BIN_WIDTH_MINUTES, "cells": {}}
    else:
        any_series = next(iter(cells.values()))
        doc = {
            "span_start": any_series.span_start,
            "bin_width_minutes": any_series.bin_width_ms // 60000,
            "cells": {str(cid): cells[cid].values.tolist() for cid in sorted(cells)},
        }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_bins_json(path: str) -> dict[int, BinnedCellSeries]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    width = doc["bin_width_minutes"] * 60000
    return {
        int(cid): BinnedCellSeries(int(cid), doc["span_start"], np.array(vals, dtype=np.float64), width)
        for cid, vals in doc["cells"].items()
    }


def save_bins_csv(cells: dict[int, BinnedCellSeries], path: str) -> None:
    """Write rows `cell_id,bin_index,value` with 17-significant-digit floats."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cell_id", "bin_index", "value"])
        for cid in sorted(cells):
            for b, v in enumerate(cells[cid].values):
                writer.writerow([cid, b, format(v, ".17g")])
