"""Behavior logs, window occupancy matrices, and prediction frames.

A log is a list of (behavior, start, stop) entries at minute precision.
Vectorization turns a log into a binary occupancy matrix: one row per
behavior, one column per ``window``-minute slice of the log's span, cell
set when the behavior's closed interval [start, stop] intersects that
half-open window.  Prediction frames slide over the matrix: each frame is
a fixed-width context block plus the count of windows until the target
behavior next occurs (the window right after the context counts as 1).

Timestamps are stored as integer minutes since the Unix epoch, naive.
Timezone-aware inputs are converted to UTC at ingestion; naive inputs are
taken as-is, so a single log should not mix offsets.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Iterable, Optional, Sequence

import numpy as np

from adherence.constraints import ActivityVocabulary, UnknownActivity, _normalize_surface

MINUTES_PER_DAY = 1440
MINUTES_PER_WEEK = 7 * MINUTES_PER_DAY

_EPOCH = datetime(1970, 1, 1)


class BadTimestamp(ValueError):
    """A timestamp failed to parse, or an entry stops before it starts."""


class UnknownBehavior(ValueError):
    """A behavior name is outside the required behavior set."""


class EmptyLog(ValueError):
    """The operation needs at least one log entry."""


class NoTargetOccurrences(ValueError):
    """The target behavior never occurs in the log."""


# ---------------------------------------------------------------------------
# Timestamps
# ---------------------------------------------------------------------------

def datetime_to_minutes(dt: datetime) -> int:
    """Minutes since the epoch, truncating seconds.  Aware values go to UTC."""
    if dt.tzinfo is not None:
        dt = dt.astimezone(timezone.utc).replace(tzinfo=None)
    delta = dt - _EPOCH
    return delta.days * MINUTES_PER_DAY + delta.seconds // 60


def minutes_to_datetime(minutes: int) -> datetime:
    return _EPOCH + timedelta(minutes=minutes)


def minutes_to_iso(minutes: int) -> str:
    return minutes_to_datetime(minutes).strftime("%Y-%m-%dT%H:%M")


def iso_to_minutes(text: str) -> int:
    try:
        return datetime_to_minutes(datetime.fromisoformat(text))
    except ValueError as exc:
        raise BadTimestamp(f"bad ISO timestamp {text!r}") from exc


_MONTHS = {"jan": 1, "feb": 2, "mar": 3, "apr": 4, "may": 5, "jun": 6,
           "jul": 7, "aug": 8, "sep": 9, "oct": 10, "nov": 11, "dec": 12}

_LEGACY_RE = re.compile(
    r"^[A-Za-z]{3}\s+([A-Za-z]{3})\s+(\d{1,2})\s+(\d{4})\s+(\d{2}):(\d{2}):(\d{2})$")


def legacy_to_minutes(text: str) -> int:
    """Parse the old day-name format, e.g. 'Mon Jul 15 2019 16:59:05'.

    Seconds are truncated to minute precision.
    """
    m = _LEGACY_RE.match(text.strip())
    if not m:
        raise BadTimestamp(f"bad legacy timestamp {text!r}")
    month = _MONTHS.get(m.group(1).lower())
    if month is None:
        raise BadTimestamp(f"bad month in legacy timestamp {text!r}")
    try:
        dt = datetime(int(m.group(3)), month, int(m.group(2)),
                      int(m.group(4)), int(m.group(5)), int(m.group(6)))
    except ValueError as exc:
        raise BadTimestamp(f"bad legacy timestamp {text!r}") from exc
    return datetime_to_minutes(dt)


def clock_of(minutes: int) -> int:
    """Minutes past midnight for a minutes-since-epoch timestamp."""
    return minutes % MINUTES_PER_DAY


# ---------------------------------------------------------------------------
# Logs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LogEntry:
    behavior: str
    start: int  # minutes since epoch
    stop: int

    def __post_init__(self):
        if self.stop < self.start:
            raise BadTimestamp(
                f"entry for {self.behavior!r} stops before it starts "
                f"({minutes_to_iso(self.stop)} < {minutes_to_iso(self.start)})")

    @property
    def duration(self) -> int:
        return self.stop - self.start


@dataclass(frozen=True)
class ActivityLog:
    """One patient's behavior entries, sorted by start time."""

    entries: tuple
    patient_id: str = ""
    behaviors: tuple = ()

    def __post_init__(self):
        entries = tuple(sorted(self.entries, key=lambda e: e.start))
        object.__setattr__(self, "entries", entries)
        if not self.behaviors:
            object.__setattr__(self, "behaviors",
                               tuple(sorted({e.behavior for e in entries})))
        else:
            object.__setattr__(self, "behaviors", tuple(self.behaviors))
            known = set(self.behaviors)
            for e in entries:
                if e.behavior not in known:
                    raise UnknownBehavior(
                        f"entry behavior {e.behavior!r} not in {sorted(known)}")

    def __len__(self) -> int:
        return len(self.entries)

    def occurrences(self, behavior: str) -> list:
        return [e for e in self.entries if e.behavior == behavior]

    def before(self, cutoff: int) -> "ActivityLog":
        """Entries starting strictly before ``cutoff``, same behavior set."""
        kept = tuple(e for e in self.entries if e.start < cutoff)
        return ActivityLog(kept, self.patient_id, self.behaviors)

    @property
    def span(self) -> tuple:
        """First start to last stop.  Entries may overlap, so the end is a max."""
        if not self.entries:
            raise EmptyLog("log has no entries")
        return self.entries[0].start, max(e.stop for e in self.entries)


def _map_behavior(name: str, vocab: Optional[ActivityVocabulary], strict: bool) -> str:
    if vocab is None:
        return _normalize_surface(name)
    try:
        return vocab.normalize(name, strict=True)
    except UnknownActivity:
        if strict:
            raise UnknownBehavior(f"behavior {name!r} not in vocabulary") from None
        return _normalize_surface(name)


def parse_log(lines: Iterable[str], patient_id: str = "",
              vocab: Optional[ActivityVocabulary] = None,
              strict_behaviors: bool = False,
              behaviors: Sequence[str] = ()) -> ActivityLog:
    """Parse canonical JSONL entries or legacy comma/tab separated lines.

    Canonical: ``{"behavior": ..., "start": ISO-8601, "stop": ISO-8601}``.
    Legacy: ``behavior, Mon Jul 15 2019 16:59:05, Mon Jul 15 2019 16:59:54``.
    The two may be mixed line by line; blank lines are skipped.  When a
    vocabulary is given, behavior names are mapped through it.
    """
    entries = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            if line.startswith("{"):
                obj = json.loads(line)
                behavior = _map_behavior(str(obj["behavior"]), vocab, strict_behaviors)
                start = iso_to_minutes(str(obj["start"]))
                stop = iso_to_minutes(str(obj["stop"]))
            else:
                parts = [p.strip() for p in re.split(r"\t|,", line)]
                if len(parts) != 3:
                    raise BadTimestamp(
                        f"expected 'behavior, start, stop', got {line!r}")
                behavior = _map_behavior(parts[0], vocab, strict_behaviors)
                start = legacy_to_minutes(parts[1])
                stop = legacy_to_minutes(parts[2])
            entries.append(LogEntry(behavior, start, stop))
        except (BadTimestamp, UnknownBehavior) as exc:
            raise type(exc)(f"line {lineno}: {exc}") from None
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise BadTimestamp(f"line {lineno}: bad entry {line!r} ({exc})") from None
    return ActivityLog(tuple(entries), patient_id, tuple(behaviors))


def parse_log_file(path, **kwargs) -> ActivityLog:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_log(fh, **kwargs)


def write_log_lines(log: ActivityLog) -> list:
    return [json.dumps({"behavior": e.behavior, "start": minutes_to_iso(e.start),
                        "stop": minutes_to_iso(e.stop)})
            for e in log.entries]


def write_log_file(log: ActivityLog, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in write_log_lines(log):
            fh.write(line + "\n")


# ---------------------------------------------------------------------------
# Occupancy matrix
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OccupancyMatrix:
    """Binary behavior-by-window occupancy over a log's span.

    ``values`` has shape (M, K), dtype uint8.  Window j covers the half-open
    minute range [origin + j*window, origin + (j+1)*window).
    """

    values: np.ndarray
    window: int
    origin: int  # minutes since epoch of the first entry's start
    behaviors: tuple

    @property
    def shape(self) -> tuple:
        return self.values.shape

    def row(self, behavior: str) -> np.ndarray:
        try:
            return self.values[self.behaviors.index(behavior)]
        except ValueError:
            raise UnknownBehavior(
                f"behavior {behavior!r} not in {list(self.behaviors)}") from None

    def window_start(self, index: int) -> int:
        return self.origin + index * self.window


def occupancy_matrix(log: ActivityLog, window: int) -> OccupancyMatrix:
    """Vectorize a log into an occupancy matrix with ``window``-minute columns.

    The span runs from the first entry's start to the last entry's stop and
    is cut into K = ceil(span / window) columns, extended minimally so the
    column containing every entry's start exists (closed zero-length entries
    sitting exactly on the final boundary would otherwise fall outside).
    Intervals reaching past the span are truncated at the matrix edge.
    """
    if window < 1:
        raise ValueError("window must be a positive number of minutes")
    if not log.entries:
        raise EmptyLog("cannot vectorize an empty log")
    origin, span_end = log.span
    columns = max(1, math.ceil((span_end - origin) / window))
    last_start_column = max((e.start - origin) // window for e in log.entries)
    columns = max(columns, last_start_column + 1)
    values = np.zeros((len(log.behaviors), columns), dtype=np.uint8)
    row_of = {b: i for i, b in enumerate(log.behaviors)}
    for entry in log.entries:
        first = max(0, (entry.start - origin) // window)
        last = min(columns - 1, (entry.stop - origin) // window)
        if first <= last:
            values[row_of[entry.behavior], first:last + 1] = 1
    return OccupancyMatrix(values, window, origin, log.behaviors)


def sparsity(matrix: OccupancyMatrix) -> float:
    """Fraction of zero cells in the occupancy matrix."""
    return float(np.count_nonzero(matrix.values == 0) / matrix.values.size)


# -- occupancy matrix file format -------------------------------------------

def write_occupancy_file(matrix: OccupancyMatrix, path) -> None:
    """Row-major bit text with a small self-describing header."""
    rows, cols = matrix.shape
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("occupancy v1\n")
        fh.write(f"behaviors: {','.join(matrix.behaviors)}\n")
        fh.write(f"rows: {rows}\n")
        fh.write(f"cols: {cols}\n")
        fh.write(f"window: {matrix.window}\n")
        fh.write(f"origin: {minutes_to_iso(matrix.origin)}\n")
        for i in range(rows):
            fh.write("".join("1" if v else "0" for v in matrix.values[i]) + "\n")


def read_occupancy_file(path) -> OccupancyMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != "occupancy v1":
        raise ValueError(f"{path}: not an occupancy matrix file")
    header = {}
    for line in lines[1:6]:
        key, _, value = line.partition(":")
        header[key.strip()] = value.strip()
    behaviors = tuple(header["behaviors"].split(","))
    rows, cols = int(header["rows"]), int(header["cols"])
    window = int(header["window"])
    origin = iso_to_minutes(header["origin"])
    bits = lines[6:6 + rows]
    if len(bits) != rows or any(len(b) != cols for b in bits):
        raise ValueError(f"{path}: bit rows do not match header shape")
    values = np.array([[1 if ch == "1" else 0 for ch in row] for row in bits],
                      dtype=np.uint8)
    return OccupancyMatrix(values, window, origin, behaviors)


# ---------------------------------------------------------------------------
# Prediction frames
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PredictionFrame:
    """A context block and the windows-to-next-occurrence target.

    ``context`` is an (M, context_windows) slice of the occupancy matrix
    ending just before ``context_end``; ``y`` counts windows from the context
    end to the next window containing the target behavior (adjacent = 1).
    """

    behavior: str
    offset: int  # column index where the context starts
    y: int
    context: np.ndarray
    context_end: int  # minutes timestamp of the first predicted window

    @property
    def context_windows(self) -> int:
        return self.context.shape[1]


def context_windows_for(weeks: int, window: int) -> int:
    """Number of matrix columns in a context of `weeks` weeks."""
    total = weeks * MINUTES_PER_WEEK
    if total % window:
        raise ValueError(f"window {window} does not divide {weeks} weeks evenly")
    return total // window


def make_frames(matrix: OccupancyMatrix, behavior: str, context_windows: int,
                stride: int = 1) -> list:
    """All frames for one target behavior, earliest first.

    Offsets advance by ``stride``; frames whose future holds no further
    occurrence of the target are dropped.  Raises
    :class:`NoTargetOccurrences` when the behavior's row is all zero.
    """
    if context_windows < 1 or stride < 1:
        raise ValueError("context_windows and stride must be >= 1")
    row = matrix.row(behavior)
    columns = row.shape[0]
    if not row.any():
        raise NoTargetOccurrences(f"{behavior!r} never occurs in the log")
    # next_at[j] = first column >= j containing the behavior, or -1
    next_at = np.full(columns + 1, -1, dtype=np.int64)
    for j in range(columns - 1, -1, -1):
        next_at[j] = j if row[j] else next_at[j + 1]
    frames = []
    for offset in range(0, columns - context_windows, stride):
        boundary = offset + context_windows
        target = next_at[boundary]
        if target < 0:
            continue
        frames.append(PredictionFrame(
            behavior=behavior,
            offset=offset,
            y=int(target - boundary + 1),
            context=matrix.values[:, offset:boundary],
            context_end=matrix.origin + boundary * matrix.window,
        ))
    return frames


def split_frames(frames: Sequence[PredictionFrame], fraction: float = None,
                 at: int = None) -> tuple:
    """Chronological train/test split by fraction or by timestamp."""
    if (fraction is None) == (at is None):
        raise ValueError("give exactly one of fraction or at")
    ordered = sorted(frames, key=lambda f: f.offset)
    if fraction is not None:
        if not 0.0 < fraction < 1.0:
            raise ValueError("fraction must be in (0, 1)")
        cut = int(len(ordered) * fraction)
        return ordered[:cut], ordered[cut:]
    train = [f for f in ordered if f.context_end <= at]
    test = [f for f in ordered if f.context_end > at]
    return train, test
