"""Parse geolocated event files, assign events to regions, and bin weekly.

Input is delimited text (comma or tab) with a header row; a column
mapping names the timestamp/lat/lon columns since municipal open-data
schemas differ. Malformed rows are counted and skipped, not fatal.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd

if TYPE_CHECKING:
    from .partition import Partition

#: Region id used for events falling outside every partition rectangle.
OUTSIDE_REGION = -1


class IngestError(ValueError):
    """Raised when an event source cannot be parsed at all."""


@dataclass(frozen=True)
class FormatConfig:
    """Column mapping for a delimited event file."""

    timestamp_column: str
    lat_column: str
    lon_column: str
    timestamp_format: str | None = None  # strptime format; None = inferred
    category_column: str | None = None
    category_filter: str | None = None
    delimiter: str = ","


@dataclass(frozen=True)
class EventSet:
    """Validated, time-sorted event records.

    ``days`` holds timestamps as integer days since the Unix epoch (day
    resolution suffices for weekly binning).
    """

    days: np.ndarray
    lat: np.ndarray
    lon: np.ndarray
    category: np.ndarray | None = None
    n_rejected: int = 0

    def __post_init__(self):
        for arr in (self.days, self.lat, self.lon):
            if arr.shape != self.days.shape:
                raise ValueError("event fields must have equal length")

    def __len__(self) -> int:
        return self.days.size

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        """(lat_min, lat_max, lon_min, lon_max) of the records."""
        return (
            float(self.lat.min()),
            float(self.lat.max()),
            float(self.lon.min()),
            float(self.lon.max()),
        )

    def time_span(self) -> tuple[int, int]:
        """(first_week_start, last_week_start) in epoch days."""
        first = week_epoch(int(self.days.min()))
        last = week_epoch(int(self.days.min())) + 7 * (
            (int(self.days.max()) - week_epoch(int(self.days.min()))) // 7
        )
        return first, last

    def subset(self, mask: np.ndarray) -> "EventSet":
        return EventSet(
            days=self.days[mask],
            lat=self.lat[mask],
            lon=self.lon[mask],
            category=None if self.category is None else self.category[mask],
            n_rejected=0,
        )


@dataclass(frozen=True)
class RawSeries:
    """Weekly event counts r(t) for one spatial unit."""

    counts: np.ndarray
    week_start: int  # epoch days of week 0
    region_id: int | None = None
    dt_weeks: float = 1.0

    def __post_init__(self):
        if np.any(np.asarray(self.counts) < 0):
            raise ValueError("weekly counts must be non-negative")

    @property
    def n_weeks(self) -> int:
        return self.counts.size


def week_epoch(first_day: int) -> int:
    """Truncate an epoch-day timestamp to its week's Monday."""
    # 1970-01-01 was a Thursday; epoch day 4 is the first Monday.
    return first_day - (first_day - 4) % 7


def parse_events(source, config: FormatConfig) -> EventSet:
    """Parse a delimited event file into a validated EventSet.

    Parameters
    ----------
    source : path, file object, or str of file contents
        Delimited text with a header row.
    config : FormatConfig
        Names the timestamp/lat/lon columns, timestamp format, and an
        optional category filter.

    Rows with unparseable timestamps or out-of-range coordinates are
    excluded and counted in ``n_rejected``.
    """
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    elif isinstance(source, str) and "\n" in source:
        source = io.StringIO(source)
    try:
        frame = pd.read_csv(source, delimiter=config.delimiter, dtype=str)
    except Exception as exc:
        raise IngestError(f"unreadable event source: {exc}") from exc

    needed = [config.timestamp_column, config.lat_column, config.lon_column]
    if config.category_column:
        needed.append(config.category_column)
    missing = [c for c in needed if c not in frame.columns]
    if missing:
        raise IngestError(f"missing mapped column(s): {missing}")

    n_input = len(frame)
    ts = pd.to_datetime(
        frame[config.timestamp_column], format=config.timestamp_format, errors="coerce"
    )
    lat = pd.to_numeric(frame[config.lat_column], errors="coerce")
    lon = pd.to_numeric(frame[config.lon_column], errors="coerce")
    ok = (
        ts.notna()
        & lat.between(-90.0, 90.0)
        & lon.between(-180.0, 180.0)
    )
    if config.category_column and config.category_filter is not None:
        ok &= (
            frame[config.category_column]
            .str.strip()
            .str.lower()
            .eq(config.category_filter.strip().lower())
        )
    n_rejected = int(n_input - ok.sum())
    frame = frame[ok]
    if len(frame) == 0:
        raise IngestError("zero valid rows after parsing")

    days = (ts[ok].values.astype("datetime64[D]")).astype(np.int64)
    order = np.argsort(days, kind="stable")
    category = None
    if config.category_column:
        category = frame[config.category_column].to_numpy()[order]
    return EventSet(
        days=days[order],
        lat=lat[ok].to_numpy()[order],
        lon=lon[ok].to_numpy()[order],
        category=category,
        n_rejected=n_rejected,
    )


def bin_weekly(
    events: EventSet,
    window: tuple[int, int] | None = None,
    region_id: int | None = None,
) -> RawSeries:
    """Bin events into 7-day windows.

    ``window`` is (start_day, end_day) in epoch days, end exclusive and
    aligned to a 7-day boundary from start. Defaults to the Monday-
    truncated span of the events. Weeks with zero events appear as 0.
    """
    if window is None:
        start = week_epoch(int(events.days.min())) if len(events) else 0
        end = start + 7 * (int(np.ceil(((int(events.days.max()) + 1) - start) / 7)) if len(events) else 0)
        if end == start:
            end = start + 7
    else:
        start, end = window
        if end <= start:
            raise ValueError("window empty or inverted")
        if (end - start) % 7 != 0:
            raise ValueError("window must span a whole number of weeks")
    n_weeks = (end - start) // 7
    idx = (events.days - start) // 7
    in_window = (events.days >= start) & (events.days < end)
    counts = np.bincount(idx[in_window].astype(np.int64), minlength=n_weeks)
    return RawSeries(counts=counts[:n_weeks], week_start=start, region_id=region_id)


def assign_regions(events: EventSet, partition: "Partition") -> dict[int, EventSet]:
    """Map each event to exactly one region of a rectangular partition.

    Boundary ties go to the lowest region_id. Events outside every
    rectangle land in the ``OUTSIDE_REGION`` bucket, which callers
    report and exclude from analysis.
    """
    labels = partition.locate(events.lat, events.lon)
    out: dict[int, EventSet] = {}
    for rid in sorted(np.unique(labels)):
        out[int(rid)] = events.subset(labels == rid)
    return out
