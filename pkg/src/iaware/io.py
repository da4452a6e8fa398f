"""Delimited text files for ground truth, scans, track estimates, and metrics.

Every file starts with a header row. Floats are written with 17 significant
digits so that reading a file back reproduces the values exactly. A frame
with no rows is recorded as a marker row carrying only the frame number,
e.g. ``7,,,,,``, so that empty frames survive a round trip.
"""

from __future__ import annotations

import csv
import os
from collections import defaultdict
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .lmb import Scan
from .rfs import Label
from .scenario import GroundTruthTrack

TRUTH_COLUMNS = ("frame", "label", "px", "vx", "py", "vy")
SCAN_COLUMNS = ("frame", "zx", "zy")
TRACK_COLUMNS = ("frame", "label", "px", "vx", "py", "vy", "r")
METRIC_COLUMNS = (
    "frame",
    "ospa_total",
    "ospa_loc",
    "ospa_card",
    "ospa2_total",
    "ospa2_loc",
    "ospa2_card",
    "card_error",
)


class ParseError(ValueError):
    """Malformed row in an input file."""

    def __init__(self, path, line: int, column: str, message: str):
        self.path, self.line, self.column = str(path), line, column
        super().__init__(f"{path}:{line}: column '{column}': {message}")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_rows(path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _read_rows(path, header: Sequence[str]):
    """Yield ``(line_number, cells)``; ``cells`` is None for an empty-frame marker."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise ParseError(path, 1, header[0], "missing header row") from None
        if tuple(c.strip() for c in first) != tuple(header):
            raise ParseError(path, 1, header[0], f"expected header {','.join(header)!r}")
        for cells in reader:
            lineno = reader.line_num
            if not cells:
                continue
            if len(cells) != len(header):
                raise ParseError(path, lineno, header[min(len(cells), len(header) - 1)], f"expected {len(header)} cells, got {len(cells)}")
            frame = _parse_int(path, lineno, header[0], cells[0])
            rest = cells[1:]
            if all(not c.strip() for c in rest):
                yield lineno, frame, None
            else:
                yield lineno, frame, rest


def _parse_int(path, line, col, text) -> int:
    try:
        v = int(text)
    except ValueError:
        raise ParseError(path, line, col, f"not an integer: {text!r}") from None
    if v < 0:
        raise ParseError(path, line, col, f"negative value {v}")
    return v


def _parse_float(path, line, col, text) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(path, line, col, f"not a number: {text!r}") from None
    if not np.isfinite(v):
        raise ParseError(path, line, col, f"non-finite value {text!r}")
    return v


def _parse_label(path, line, col, text) -> Label:
    try:
        return Label.parse(text)
    except ValueError as exc:
        raise ParseError(path, line, col, str(exc)) from None


def _marker(frame: int, width: int) -> list[str]:
    return [str(frame)] + [""] * (width - 1)


# ground truth

def write_truth(tracks: Sequence[GroundTruthTrack], path, frames: Iterable[int] | None = None) -> None:
    """Write truth rows ordered by frame then label; ``frames`` lists frames to cover."""
    by_frame: dict[int, list] = defaultdict(list)
    for t in sorted(tracks, key=lambda t: t.label):
        for k in t.frames:
            by_frame[k].append((t.label, t.state_at(k)))
    all_frames = sorted(set(by_frame) | set(frames or ()))
    rows = []
    for k in all_frames:
        if not by_frame[k]:
            rows.append(_marker(k, len(TRUTH_COLUMNS)))
        for label, s in by_frame[k]:
            rows.append([str(k), str(label), *map(fmt, s)])
    _write_rows(path, TRUTH_COLUMNS, rows)


def read_truth_table(path) -> tuple[list[int], list[GroundTruthTrack]]:
    """Frames covered by the file and the tracks it contains."""
    frames: set[int] = set()
    per_label: dict[Label, list] = defaultdict(list)
    for line, frame, cells in _read_rows(path, TRUTH_COLUMNS):
        frames.add(frame)
        if cells is None:
            continue
        label = _parse_label(path, line, "label", cells[0])
        state = [_parse_float(path, line, col, c) for col, c in zip(TRUTH_COLUMNS[2:], cells[1:])]
        per_label[label].append((frame, line, state))
    tracks = []
    for label in sorted(per_label):
        rows = sorted(per_label[label])
        for (f0, _, _), (f1, line, _) in zip(rows, rows[1:]):
            if f1 != f0 + 1:
                raise ParseError(path, line, "frame", f"track {label} is not contiguous ({f0} -> {f1})")
        tracks.append(GroundTruthTrack(label, rows[0][0], [r[2] for r in rows]))
    return sorted(frames), tracks


def read_truth(path) -> list[GroundTruthTrack]:
    return read_truth_table(path)[1]


# scans

def write_scans(scans: Sequence[Scan], path) -> None:
    rows = []
    for scan in sorted(scans, key=lambda s: s.frame):
        if len(scan) == 0:
            rows.append(_marker(scan.frame, len(SCAN_COLUMNS)))
        for z in scan.measurements:
            rows.append([str(scan.frame), fmt(z[0]), fmt(z[1])])
    _write_rows(path, SCAN_COLUMNS, rows)


def read_scans(path) -> list[Scan]:
    """Scans in file order of first appearance; frames must be non-decreasing."""
    per_frame: dict[int, list] = {}
    last = -1
    for line, frame, cells in _read_rows(path, SCAN_COLUMNS):
        if frame < last:
            raise ParseError(path, line, "frame", f"frame {frame} after frame {last}; scans must be sorted")
        last = frame
        per_frame.setdefault(frame, [])
        if cells is not None:
            per_frame[frame].append([_parse_float(path, line, col, c) for col, c in zip(SCAN_COLUMNS[1:], cells)])
    return [Scan(k, np.array(z, dtype=float).reshape(-1, 2)) for k, z in per_frame.items()]


# track estimates

def write_tracks(frames: Sequence[int], estimates, existence, path) -> None:
    """Per-frame estimates with their existence probabilities.

    ``estimates[i]`` is the :class:`MultiTargetEstimate` of ``frames[i]`` and
    ``existence[i]`` maps each of its labels to ``r``.
    """
    rows = []
    for k, est, rmap in zip(frames, estimates, existence):
        if len(est) == 0:
            rows.append(_marker(k, len(TRACK_COLUMNS)))
        for label, s in est:
            rows.append([str(k), str(label), *map(fmt, s), fmt(rmap[label])])
    _write_rows(path, TRACK_COLUMNS, rows)


def read_tracks(path) -> tuple[list[int], dict[int, list[tuple[Label, np.ndarray, float]]]]:
    frames: list[int] = []
    table: dict[int, list] = {}
    for line, frame, cells in _read_rows(path, TRACK_COLUMNS):
        if frame not in table:
            frames.append(frame)
            table[frame] = []
        if cells is None:
            continue
        label = _parse_label(path, line, "label", cells[0])
        vals = [_parse_float(path, line, col, c) for col, c in zip(TRACK_COLUMNS[2:], cells[1:])]
        table[frame].append((label, np.array(vals[:4]), vals[4]))
    return sorted(frames), table


# metrics

def write_metrics(rows: Sequence[dict], path, columns: Sequence[str] = METRIC_COLUMNS) -> None:
    def cell(v):
        return str(v) if isinstance(v, (int, np.integer)) else fmt(v)

    _write_rows(path, columns, ([cell(r[c]) for c in columns] for r in rows))


def write_summary(summary: dict, path) -> None:
    _write_rows(path, ("metric", "value"), ([k, fmt(v)] for k, v in summary.items()))


def read_csv_dicts(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def ensure_dir(path) -> Path:
    p = Path(path)
    os.makedirs(p, exist_ok=True)
    return p
