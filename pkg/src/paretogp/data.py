"""Ingestion and time alignment of a predictor table with a faster response series.

Predictors arrive every 30 minutes, the response every 5 minutes.  Each
predictor row stamped at minute 0 or 30 is paired with the mean response over
``[t, t + 25 min]``; calendar components of ``t`` become five extra inputs.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from .errors import ArtifactMissingError, InputError

log = logging.getLogger(__name__)

TIME_COMPONENTS = ("year", "month", "day", "hour", "minute")
MISSING_TOKENS = {"", "-", "\u2013", "\u2014", "na", "n/a", "nan", "null", "none"}


@dataclass(frozen=True)
class FormatSpec:
    """How to read one delimited file."""

    timestamp_column: str = "timestamp"
    timestamp_format: Optional[str] = None  # strptime pattern; None infers ISO-8601
    timezone: str = "UTC"  # zone of naive stamps in the file
    delimiter: str = ","

    @classmethod
    def from_dict(cls, d: dict) -> "FormatSpec":
        return cls(**{k: d[k] for k in ("timestamp_column", "timestamp_format",
                                          "timezone", "delimiter") if k in d})


@dataclass
class RawSeries:
    """A parsed table: tz-aware timestamps plus numeric and non-numeric columns."""

    timestamps: pd.DatetimeIndex
    numeric: dict
    non_numeric: dict = field(default_factory=dict)
    columns: list = field(default_factory=list)
    log: list = field(default_factory=list)
    drops: list = field(default_factory=list)

    def __post_init__(self):
        if not self.columns:
            self.columns = list(self.numeric) + list(self.non_numeric)

    def __len__(self) -> int:
        return len(self.timestamps)

    def take(self, mask) -> "RawSeries":
        mask = np.asarray(mask)
        return RawSeries(self.timestamps[mask],
                         {k: v[mask] for k, v in self.numeric.items()},
                         {k: v[mask] for k, v in self.non_numeric.items()},
                         list(self.columns), list(self.log), list(self.drops))


def sanitize_name(name: str) -> str:
    """Column names must be usable as expression variables."""
    out = re.sub(r"\W+", "_", name.strip()).strip("_")
    if not out or out[0].isdigit():
        out = "_" + out
    return out


def _is_missing(cell: str) -> bool:
    return cell.strip().lower() in MISSING_TOKENS


def _to_timestamps(values, spec: FormatSpec, target_tz: str) -> pd.DatetimeIndex:
    ts = pd.to_datetime(pd.Series(values), format=spec.timestamp_format, errors="coerce")
    idx = pd.DatetimeIndex(ts)
    if idx.tz is None:
        idx = idx.tz_localize(spec.timezone, ambiguous="NaT", nonexistent="NaT")
    return idx.tz_convert(target_tz)


def parse_table(path, spec: FormatSpec = FormatSpec(), target_timezone: str = "UTC") -> RawSeries:
    """Read a delimited file into a :class:`RawSeries`.

    Unparseable numeric cells become NaN; a column where most non-blank cells
    are not numbers is kept as non-numeric text.  Rows with unreadable stamps
    are dropped; duplicate stamps keep their first row.  Counts of both are
    logged and recorded in ``RawSeries.log``.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"cannot read {path}: no such file")
    try:
        with path.open(newline="", encoding="utf-8-sig") as fh:
            rows = list(csv.reader(fh, delimiter=spec.delimiter))
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise InputError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if spec.timestamp_column not in header:
        raise InputError(f"{path}: timestamp column {spec.timestamp_column!r} not in header")
    body = [r + [""] * (len(header) - len(r)) for r in rows[1:] if any(c.strip() for c in r)]
    tcol = header.index(spec.timestamp_column)
    notes = []

    stamps = _to_timestamps([r[tcol] for r in body], spec, target_timezone)
    good = ~stamps.isna()
    if (~good).sum():
        notes.append(f"{int((~good).sum())} rows with unreadable timestamps dropped")
    order = np.flatnonzero(good)
    stamps = stamps[good]
    # stable sort, then first occurrence of each stamp wins
    perm = np.argsort(stamps.asi8, kind="stable")
    stamps, order = stamps[perm], order[perm]
    first = ~stamps.duplicated(keep="first")
    n_dup = int((~first).sum())
    if n_dup:
        notes.append(f"{n_dup} duplicate timestamps dropped")
    stamps, order = stamps[first], order[first]

    numeric, text = {}, {}
    columns = []
    for j, name in enumerate(header):
        if j == tcol:
            continue
        cells = [body[i][j] for i in order]
        present = [c for c in cells if not _is_missing(c)]
        values = pd.to_numeric(pd.Series([np.nan if _is_missing(c) else c.strip()
                                          for c in cells], dtype=object), errors="coerce")
        parsed = int(values.notna().sum())
        key = sanitize_name(name)
        columns.append(key)
        if present and parsed < 0.5 * len(present):
            text[key] = np.array([c.strip() for c in cells], dtype=object)
        else:
            numeric[key] = values.to_numpy(dtype=np.float64)
    for note in notes:
        log.info("%s: %s", path.name, note)
    return RawSeries(stamps, numeric, text, columns, notes)


def write_table(series: RawSeries, path, spec: FormatSpec = FormatSpec()) -> None:
    """Inverse of :func:`parse_table` (stamps written in ``spec.timezone``)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    stamps = series.timestamps.tz_convert(spec.timezone).tz_localize(None)
    fmt = spec.timestamp_format or "%Y-%m-%d %H:%M:%S"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, delimiter=spec.delimiter, lineterminator="\n")
        w.writerow([spec.timestamp_column] + series.columns)
        for i, t in enumerate(stamps):
            row = [t.strftime(fmt)]
            for c in series.columns:
                if c in series.numeric:
                    v = series.numeric[c][i]
                    row.append("" if np.isnan(v) else repr(float(v)))
                else:
                    row.append(series.non_numeric[c][i])
            w.writerow(row)


def screen_variables(series: RawSeries, missing_fraction_threshold: float = 0.75) -> RawSeries:
    """Drop non-numeric columns and columns missing more than the threshold, then
    drop rows with any remaining missing value.  Every drop is logged."""
    drops = []
    keep = []
    for name in series.columns:
        if name in series.non_numeric:
            drops.append({"column": name, "reason": "non-numeric"})
            continue
        frac = float(np.mean(np.isnan(series.numeric[name]))) if len(series) else 1.0
        if frac > missing_fraction_threshold:
            drops.append({"column": name,
                          "reason": f"missing fraction {frac:.4f} > {missing_fraction_threshold}"})
            continue
        keep.append(name)
    if not keep:
        raise InputError("variable screening dropped every column")
    complete = np.ones(len(series), dtype=bool)
    for name in keep:
        complete &= ~np.isnan(series.numeric[name])
    n_rows = int((~complete).sum())
    if n_rows:
        drops.append({"rows": n_rows, "reason": "incomplete after column screening"})
    for d in drops:
        log.info("screen: %s", d)
    return RawSeries(series.timestamps[complete],
                     {k: series.numeric[k][complete] for k in keep}, {}, keep,
                     list(series.log), series.drops + drops)


@dataclass
class AlignedDataset:
    """Model-ready data: inputs ``X`` (rows x k), response ``y`` and tight ranges."""

    names: tuple
    X: np.ndarray
    y: np.ndarray
    timestamps: pd.DatetimeIndex
    response_name: str = "y"
    timezone: str = "UTC"
    drop_log: list = field(default_factory=list)
    ranges: tuple = field(init=False)

    def __post_init__(self):
        self.names = tuple(self.names)
        self.X = np.asarray(self.X, dtype=np.float64).reshape(len(self.y), len(self.names))
        self.y = np.asarray(self.y, dtype=np.float64)
        if len(self.timestamps) != len(self.y):
            raise InputError("timestamps and response differ in length")
        if len(self.y):
            lo, hi = self.X.min(axis=0), self.X.max(axis=0)
            self.ranges = tuple((float(a), float(b)) for a, b in zip(lo, hi))
        else:
            self.ranges = tuple((np.nan, np.nan) for _ in self.names)

    def __len__(self) -> int:
        return len(self.y)

    def subset(self, mask) -> "AlignedDataset":
        mask = np.asarray(mask)
        return AlignedDataset(self.names, self.X[mask], self.y[mask], self.timestamps[mask],
                              self.response_name, self.timezone, list(self.drop_log))

    def with_variables(self, names: Sequence[str]) -> "AlignedDataset":
        missing = [n for n in names if n not in self.names]
        if missing:
            raise InputError(f"unknown variables {missing}; have {list(self.names)}")
        cols = [self.names.index(n) for n in names]
        return AlignedDataset(tuple(names), self.X[:, cols], self.y, self.timestamps,
                              self.response_name, self.timezone, list(self.drop_log))

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.names.index(name)]

    def save(self, path) -> None:
        """Write ``path`` (CSV) plus the JSON sidecar ``path.with_suffix('.json')``."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["timestamp", *self.names, self.response_name])
            for t, xs, yv in zip(self.timestamps, self.X, self.y):
                w.writerow([t.isoformat(), *(repr(float(v)) for v in xs), repr(float(yv))])
        meta = {
            "variables": list(self.names),
            "response": self.response_name,
            "timezone": self.timezone,
            "rows": len(self),
            "ranges": [list(r) for r in self.ranges],
            "drop_log": self.drop_log,
        }
        path.with_suffix(".json").write_text(json.dumps(meta, indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "AlignedDataset":
        path = Path(path)
        side = path.with_suffix(".json")
        for p in (path, side):
            if not p.exists():
                raise ArtifactMissingError(f"missing artifact: {p}")
        meta = json.loads(side.read_text())
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        names = tuple(meta["variables"])
        if header != ["timestamp", *names, meta["response"]]:
            raise InputError(f"{path}: header does not match sidecar schema")
        data = np.array([[float(v) for v in r[1:]] for r in body], dtype=np.float64)
        data = data.reshape(len(body), len(names) + 1)
        stamps = pd.DatetimeIndex(pd.to_datetime([r[0] for r in body], format="ISO8601"))
        if len(stamps) and stamps.tz is not None:
            stamps = stamps.tz_convert(meta.get("timezone", "UTC"))
        return cls(names, data[:, :-1], data[:, -1], stamps, meta["response"],
                   meta.get("timezone", "UTC"), meta.get("drop_log", []))


def align(predictors: RawSeries, response: RawSeries, response_column: Optional[str] = None,
          missing_fraction_threshold: float = 0.75, window_minutes: int = 25) -> AlignedDataset:
    """Pair half-hourly predictor rows with the mean response over ``[t, t + window]``.

    Predictors are screened first (see :func:`screen_variables`).  Rows whose
    stamp is not at minute 0 or 30, or whose window holds no valid response
    sample, are skipped.
    """
    if not len(predictors) or not len(response):
        raise InputError("both series must be non-empty")
    if response_column is None:
        if len(response.numeric) != 1:
            raise InputError(f"response has numeric columns {list(response.numeric)}; "
                             "name one with response_column")
        response_column = next(iter(response.numeric))
    if response_column not in response.numeric:
        raise InputError(f"response column {response_column!r} not numeric or absent")

    screened = screen_variables(predictors, missing_fraction_threshold)
    r_vals = response.numeric[response_column]
    ok = ~np.isnan(r_vals)
    r_t = response.timestamps.asi8[ok]
    r_vals = r_vals[ok]

    ts = screened.timestamps
    on_grid = np.isin(ts.minute, (0, 30)) & (ts.second == 0) & (ts.microsecond == 0)
    t_ns = ts.asi8
    lo = np.searchsorted(r_t, t_ns, side="left")
    hi = np.searchsorted(r_t, t_ns + window_minutes * 60 * 10**9, side="right")
    counts = hi - lo
    emit = on_grid & (counts > 0)
    if not emit.any():
        raise InputError("no overlapping predictor/response pairs")
    y = np.array([r_vals[a:b].sum() / (b - a) for a, b in zip(lo[emit], hi[emit])])
    stamps = ts[emit]
    comps = np.column_stack([stamps.year, stamps.month, stamps.day, stamps.hour,
                             stamps.minute]).astype(np.float64)
    names = list(screened.columns)
    X = np.column_stack([comps] + [screened.numeric[n][emit] for n in names])
    drops = list(screened.drops)
    skipped = int((~emit).sum())
    if skipped:
        drops.append({"rows": skipped, "reason": "off the half-hour grid or no response samples"})
    return AlignedDataset(TIME_COMPONENTS + tuple(names), X, y, stamps, response_column,
                          str(ts.tz), drops)


def _bound(value, tz: str) -> pd.Timestamp:
    t = pd.Timestamp(value)
    return t.tz_localize(tz) if t.tzinfo is None else t.tz_convert(tz)


def split_by_date(ds: AlignedDataset, train_range,
                  test_range) -> tuple[AlignedDataset, AlignedDataset]:
    """Partition rows into closed-open ``[start, end)`` train and test windows.

    Ranges given as naive strings are interpreted in the dataset's timezone.
    Each part gets ranges from its own rows; models record the training ones.
    """
    tz = ds.timezone
    a0, a1 = (_bound(v, tz) for v in train_range)
    b0, b1 = (_bound(v, tz) for v in test_range)
    if a0 >= a1 or b0 >= b1:
        raise InputError("date ranges must have start < end")
    if a0 < b1 and b0 < a1:
        raise InputError("train and test ranges overlap")
    t = ds.timestamps
    train = (t >= a0) & (t < a1)
    test = (t >= b0) & (t < b1)
    if not train.any():
        raise InputError("training partition is empty")
    if not test.any():
        raise InputError("test partition is empty")
    return ds.subset(train), ds.subset(test)
