"""Ground-truth generator for synthetic cities.

Each region carries AR(1) noise plus planted sinusoidal waves that
switch on and off per a schedule, giving exact knowledge of which
region holds which periodicity at every week. The generator can emit
either the weekly series directly or an event stream in the format the
ingest module consumes; event counts invert the preprocessing log
transform so round trips are tight.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .ingest import EventSet
from .partition import Partition


@dataclass(frozen=True)
class WaveSpec:
    """One planted periodic wave and its on-intervals per region."""

    period_weeks: float
    amplitude: float
    # (region_id, start_week, end_week) with end inclusive
    schedule: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if self.period_weeks < 2:
            raise ValueError("wave period must be at least 2 weeks")


@dataclass(frozen=True)
class SynthConfig:
    n_regions: int
    n_weeks: int
    alpha: float = 0.0
    noise_sigma: float = 1.0
    baseline: float = 0.0  # constant offset, used when emitting events
    waves: tuple[WaveSpec, ...] = ()
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("alpha must lie in [0, 1)")
        for wave in self.waves:
            for rid, start, end in wave.schedule:
                if not (0 <= rid < self.n_regions):
                    raise ValueError(f"schedule region {rid} out of range")
                if not (0 <= start <= end < self.n_weeks):
                    raise ValueError(f"schedule interval [{start}, {end}] out of range")

    @classmethod
    def from_json(cls, text: str) -> "SynthConfig":
        raw = json.loads(text)
        waves = tuple(
            WaveSpec(
                period_weeks=w["period_weeks"],
                amplitude=w["amplitude"],
                schedule=tuple(tuple(entry) for entry in w["schedule"]),
            )
            for w in raw.get("waves", ())
        )
        return cls(
            n_regions=raw["n_regions"],
            n_weeks=raw["n_weeks"],
            alpha=raw.get("alpha", 0.0),
            noise_sigma=raw.get("noise_sigma", 1.0),
            baseline=raw.get("baseline", 0.0),
            waves=waves,
            seed=raw.get("seed", 0),
        )


@dataclass(frozen=True)
class GroundTruth:
    """Which region holds a wave at which week, per construction."""

    active: np.ndarray  # (n_regions, n_weeks) bool

    def hold_durations(self, region_id: int) -> np.ndarray:
        """Lengths of the contiguous on-intervals of one region."""
        row = self.active[region_id]
        padded = np.concatenate(([False], row, [False]))
        diff = np.diff(padded.astype(np.int8))
        starts = np.nonzero(diff == 1)[0]
        ends = np.nonzero(diff == -1)[0]
        return ends - starts


def ground_truth(cfg: SynthConfig) -> GroundTruth:
    active = np.zeros((cfg.n_regions, cfg.n_weeks), dtype=bool)
    for wave in cfg.waves:
        for rid, start, end in wave.schedule:
            active[rid, start : end + 1] = True
    return GroundTruth(active=active)


def region_phase(cfg: SynthConfig, region_id: int) -> float:
    """Deterministic per-region phase so travelling waves are reproducible."""
    rng = np.random.default_rng([cfg.seed, 0x9E3779B9, region_id])
    return float(rng.uniform(0.0, 2.0 * np.pi))


def gen_region_series(cfg: SynthConfig, region_id: int) -> np.ndarray:
    """Weekly series for one region: AR(1) noise plus scheduled waves.

    The noise has stationary standard deviation ``noise_sigma`` and is
    seeded per (seed, region_id), so regions are independent and the
    whole city is reproducible.
    """
    if not 0 <= region_id < cfg.n_regions:
        raise ValueError("region_id out of range")
    rng = np.random.default_rng([cfg.seed, region_id])
    eps = rng.standard_normal(cfg.n_weeks)
    scaled = np.sqrt(1.0 - cfg.alpha**2) * eps
    scaled[0] = eps[0]  # start in the stationary distribution
    noise = cfg.noise_sigma * lfilter([1.0], [1.0, -cfg.alpha], scaled)
    t = np.arange(cfg.n_weeks, dtype=float)
    series = cfg.baseline + noise
    for wave in cfg.waves:
        phase = region_phase(cfg, region_id)
        carrier = wave.amplitude * np.sin(2.0 * np.pi * t / wave.period_weeks + phase)
        on = np.zeros(cfg.n_weeks, dtype=bool)
        for rid, start, end in wave.schedule:
            if rid == region_id:
                on[start : end + 1] = True
        series = series + np.where(on, carrier, 0.0)
    return series


def series_to_counts(y: np.ndarray) -> np.ndarray:
    """Invert the preprocessing log transform: counts = round(10^y - 1)."""
    counts = np.rint(np.power(10.0, np.asarray(y, dtype=float)) - 1.0)
    return np.maximum(counts, 0.0).astype(np.int64)


def gen_event_stream(
    cfg: SynthConfig, partition: Partition, week_start: int = 4
) -> tuple[EventSet, GroundTruth]:
    """Emit events whose weekly re-binning reproduces the generated series.

    Each region's series maps to weekly counts via the inverse log
    transform; events land uniformly within the week and uniformly
    inside the region rectangle. ``week_start`` is the epoch day of
    week 0 (default: the first Monday of 1970).
    """
    if partition.r != cfg.n_regions:
        raise ValueError(
            f"partition has {partition.r} regions, config expects {cfg.n_regions}"
        )
    days_list, lat_list, lon_list = [], [], []
    for region in sorted(partition.regions, key=lambda g: g.region_id):
        rid = region.region_id
        counts = series_to_counts(gen_region_series(cfg, rid))
        rng = np.random.default_rng([cfg.seed, 0x5EED, rid])
        for week, count in enumerate(counts):
            if count == 0:
                continue
            day0 = week_start + 7 * week
            days_list.append(day0 + rng.integers(0, 7, size=count))
            lat_list.append(rng.uniform(region.lat_min, region.lat_max, size=count))
            lon_list.append(rng.uniform(region.lon_min, region.lon_max, size=count))
    if not days_list:
        days = np.empty(0, dtype=np.int64)
        lat = lon = np.empty(0, dtype=float)
    else:
        days = np.concatenate(days_list).astype(np.int64)
        lat = np.concatenate(lat_list)
        lon = np.concatenate(lon_list)
    order = np.argsort(days, kind="stable")
    events = EventSet(days=days[order], lat=lat[order], lon=lon[order])
    return events, ground_truth(cfg)


def events_to_csv(events: EventSet, epoch: str = "1970-01-01") -> str:
    """Render an EventSet in the delimited format parse_events consumes."""
    base = np.datetime64(epoch, "D")
    dates = base + events.days.astype("timedelta64[D]")
    lines = ["date,lat,lon"]
    for d, la, lo in zip(dates, events.lat, events.lon):
        lines.append(f"{d},{la:.8f},{lo:.8f}")
    return "\n".join(lines) + "\n"
