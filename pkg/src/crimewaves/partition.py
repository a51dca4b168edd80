"""Equal-population spatial partitioning by recursive weighted bisection.

A city is split into r = 2^k axis-aligned rectangles of near-equal
resident population; a sweep over r then picks the operating region
count as the r maximizing the number of regions whose crime rate clears
a threshold phi (crimes/week).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .ingest import OUTSIDE_REGION, EventSet, assign_regions, bin_weekly


@dataclass(frozen=True)
class PopulationWeights:
    """Weighted population points (e.g. census block centroids)."""

    lat: np.ndarray
    lon: np.ndarray
    weight: np.ndarray

    def __post_init__(self):
        if np.any(self.weight <= 0):
            raise ValueError("population weights must be positive")
        if not (self.lat.size == self.lon.size == self.weight.size):
            raise ValueError("lat/lon/weight must have equal length")

    @property
    def total(self) -> float:
        return float(self.weight.sum())

    @classmethod
    def from_file(cls, path, delimiter: str = ",") -> "PopulationWeights":
        """Load delimited text with columns lat, lon, weight (header optional)."""
        arr = np.genfromtxt(path, delimiter=delimiter, names=True)
        if arr.dtype.names and {"lat", "lon", "weight"} <= set(arr.dtype.names):
            return cls(
                lat=np.atleast_1d(arr["lat"]).astype(float),
                lon=np.atleast_1d(arr["lon"]).astype(float),
                weight=np.atleast_1d(arr["weight"]).astype(float),
            )
        data = np.atleast_2d(np.loadtxt(path, delimiter=delimiter, skiprows=0))
        return cls(lat=data[:, 0], lon=data[:, 1], weight=data[:, 2])


@dataclass(frozen=True)
class Region:
    """Half-open rectangle [lat_min, lat_max) x [lon_min, lon_max).

    The partition's outer rectangles are closed on the bounding-box
    edges so the whole box is covered.
    """

    region_id: int
    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float
    population: float


@dataclass(frozen=True)
class Partition:
    """Disjoint rectangles covering the population bounding box."""

    regions: tuple[Region, ...]
    bbox: tuple[float, float, float, float]  # lat_min, lat_max, lon_min, lon_max

    @property
    def r(self) -> int:
        return len(self.regions)

    @property
    def population(self) -> np.ndarray:
        return np.array([reg.population for reg in self.regions])

    def locate(self, lat: np.ndarray, lon: np.ndarray) -> np.ndarray:
        """Region id per point; ties to the lowest id, outside -> -1.

        Rectangles are treated half-open on their upper edges except at
        the partition bounding box, so every interior point matches
        exactly one region and boundary points match the lowest id.
        """
        lat = np.asarray(lat, dtype=float)
        lon = np.asarray(lon, dtype=float)
        labels = np.full(lat.shape, OUTSIDE_REGION, dtype=int)
        lat_hi_box, lon_hi_box = self.bbox[1], self.bbox[3]
        unassigned = np.ones(lat.shape, dtype=bool)
        for reg in sorted(self.regions, key=lambda g: g.region_id):
            hit_lat = (lat >= reg.lat_min) & (
                (lat < reg.lat_max) | ((reg.lat_max == lat_hi_box) & (lat == reg.lat_max))
            )
            hit_lon = (lon >= reg.lon_min) & (
                (lon < reg.lon_max) | ((reg.lon_max == lon_hi_box) & (lon == reg.lon_max))
            )
            hit = hit_lat & hit_lon & unassigned
            labels[hit] = reg.region_id
            unassigned &= ~hit
        return labels

    def to_json(self) -> str:
        records = [
            {
                "region_id": reg.region_id,
                "lat_min": reg.lat_min,
                "lat_max": reg.lat_max,
                "lon_min": reg.lon_min,
                "lon_max": reg.lon_max,
                "population": reg.population,
            }
            for reg in self.regions
        ]
        return json.dumps(records, indent=2)


def _weighted_split_index(coord: np.ndarray, weight: np.ndarray) -> tuple[int, float]:
    """Index and boundary splitting sorted points into halves of near-equal weight.

    Returns (i, boundary): points [0, i) go left of ``boundary``.
    """
    csum = np.cumsum(weight)
    total = csum[-1]
    # Candidate cuts between distinct coordinates only.
    cuts = np.nonzero(np.diff(coord) > 0)[0]
    if cuts.size == 0:
        raise ValueError("cannot split: all coordinates identical on this axis")
    imbalance = np.abs(csum[cuts] - total / 2.0)
    best = cuts[np.argmin(imbalance)]
    boundary = 0.5 * (coord[best] + coord[best + 1])
    return best + 1, boundary


def split(weights: PopulationWeights, r: int) -> Partition:
    """Partition the bounding box into r equal-population rectangles.

    Recursive weighted-median bisection: each node splits along its
    longest-extent axis at the weighted median of its points.
    """
    if r < 1 or (r & (r - 1)) != 0:
        raise ValueError("r must be a power of two")
    if r > weights.lat.size:
        raise ValueError("r exceeds the number of population points")

    bbox = (
        float(weights.lat.min()),
        float(weights.lat.max()),
        float(weights.lon.min()),
        float(weights.lon.max()),
    )
    leaves: list[Region] = []

    def recurse(idx: np.ndarray, rect: tuple[float, float, float, float], n_leaves: int):
        if n_leaves == 1:
            leaves.append(
                Region(
                    region_id=len(leaves),
                    lat_min=rect[0],
                    lat_max=rect[1],
                    lon_min=rect[2],
                    lon_max=rect[3],
                    population=float(weights.weight[idx].sum()),
                )
            )
            return
        lat = weights.lat[idx]
        lon = weights.lon[idx]
        axis = 0 if (rect[1] - rect[0]) >= (rect[3] - rect[2]) else 1
        coord = lat if axis == 0 else lon
        order = np.argsort(coord, kind="stable")
        try:
            i, boundary = _weighted_split_index(coord[order], weights.weight[idx][order])
        except ValueError:
            # Degenerate on this axis; try the other one.
            axis = 1 - axis
            coord = lat if axis == 0 else lon
            order = np.argsort(coord, kind="stable")
            i, boundary = _weighted_split_index(coord[order], weights.weight[idx][order])
        left_idx = idx[order[:i]]
        right_idx = idx[order[i:]]
        if axis == 0:
            left_rect = (rect[0], boundary, rect[2], rect[3])
            right_rect = (boundary, rect[1], rect[2], rect[3])
        else:
            left_rect = (rect[0], rect[1], rect[2], boundary)
            right_rect = (rect[0], rect[1], boundary, rect[3])
        recurse(left_idx, left_rect, n_leaves // 2)
        recurse(right_idx, right_rect, n_leaves // 2)

    recurse(np.arange(weights.lat.size), bbox, r)
    return Partition(regions=tuple(leaves), bbox=bbox)


def grid_partition(
    n_regions: int,
    bbox: tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0),
    population_per_region: float = 1.0,
) -> Partition:
    """Regular nx-by-ny rectangle grid, for synthetic cities.

    nx is the largest divisor of n_regions not exceeding its square
    root, so the grid is as square as the factorization allows. Region
    ids run row-major from the lat_min/lon_min corner.
    """
    if n_regions < 1:
        raise ValueError("need at least one region")
    nx = max(d for d in range(1, int(np.sqrt(n_regions)) + 1) if n_regions % d == 0)
    ny = n_regions // nx
    lat_edges = np.linspace(bbox[0], bbox[1], nx + 1)
    lon_edges = np.linspace(bbox[2], bbox[3], ny + 1)
    regions = []
    for i in range(nx):
        for j in range(ny):
            regions.append(
                Region(
                    region_id=i * ny + j,
                    lat_min=float(lat_edges[i]),
                    lat_max=float(lat_edges[i + 1]),
                    lon_min=float(lon_edges[j]),
                    lon_max=float(lon_edges[j + 1]),
                    population=population_per_region,
                )
            )
    return Partition(regions=tuple(regions), bbox=bbox)


@dataclass(frozen=True)
class SweepResult:
    """Qualifying-region counts per candidate r and the selected r_u."""

    table: dict[int, int]  # r -> number of regions with rate > phi
    phi: float
    r_u: int

    def __post_init__(self):
        if self.r_u not in self.table:
            raise ValueError("r_u must be one of the swept r values")


def region_sweep(
    events: EventSet,
    weights: PopulationWeights,
    phi: float = 1.0,
    r_values: tuple[int, ...] = (1, 2, 4, 8, 16, 32, 64),
) -> SweepResult:
    """Count regions whose mean crime rate clears phi, for each r.

    r_u is the r with the highest count; ties break to the smallest r.
    """
    if phi <= 0:
        raise ValueError("phi must be positive")
    if len(events) == 0:
        raise ValueError("empty event set")
    start, _ = events.time_span()
    end = start + 7 * max(1, -(-(int(events.days.max()) + 1 - start) // 7))
    n_weeks = (end - start) // 7
    table: dict[int, int] = {}
    for r in r_values:
        part = split(weights, r)
        by_region = assign_regions(events, part)
        above = 0
        for rid, sub in by_region.items():
            if rid == OUTSIDE_REGION:
                continue
            rate = len(sub) / n_weeks
            if rate > phi:
                above += 1
        table[int(r)] = above
    best = max(table.values())
    r_u = min(r for r, v in table.items() if v == best)
    return SweepResult(table=table, phi=phi, r_u=r_u)
