"""City-level composition of region-level significance outcomes.

The composed spectrum gives, per scale, the fraction of regions whose
global wavelet spectrum is significant; the composed band series gives,
per week, the fraction of cone-valid regions whose scale-averaged band
power is significant. Counts are kept as exact integers alongside the
fractions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .wavelet import GlobalSpectrum, ScaleAvgPower, ScaleGrid
from .significance import SignificanceMask


@dataclass(frozen=True)
class ComposedSpectrum:
    """Per-scale fraction of regions with a significant period."""

    fraction: np.ndarray
    counts: np.ndarray
    n_regions: int
    grid: ScaleGrid


@dataclass(frozen=True)
class ComposedBandSeries:
    """Per-week fraction of regions with significant band power.

    ``valid_regions`` counts, per week, the regions whose full band lies
    inside the cone of influence; cone-excluded (region, week) pairs are
    dropped from both numerator and denominator.
    """

    fraction: np.ndarray
    counts: np.ndarray
    valid_regions: np.ndarray
    band: tuple[float, float]
    n_regions: int


def composed_spectrum(
    region_results: list[tuple[GlobalSpectrum, SignificanceMask]],
) -> ComposedSpectrum:
    """Fraction of regions whose global spectrum clears its own threshold."""
    if not region_results:
        raise ValueError("no region results to compose")
    grid = region_results[0][0].grid
    n_scales = grid.J + 1
    counts = np.zeros(n_scales, dtype=int)
    for spectrum, mask in region_results:
        if spectrum.grid.J != grid.J or spectrum.grid.s0 != grid.s0:
            raise ValueError("regions must share one scale grid")
        if mask.mask.shape != (n_scales,):
            raise ValueError("mask shape does not match the grid")
        counts += mask.mask.astype(int)
    n_regions = len(region_results)
    return ComposedSpectrum(
        fraction=counts / n_regions, counts=counts, n_regions=n_regions, grid=grid
    )


def composed_band_series(
    region_results: list[tuple[ScaleAvgPower, SignificanceMask, np.ndarray]],
) -> ComposedBandSeries:
    """Per-week fraction of cone-valid regions flagged significant.

    Each entry is (band power, scale_avg mask, coi vector) for one
    region; all regions must share the grid and band.
    """
    if not region_results:
        raise ValueError("no region results to compose")
    first = region_results[0][0]
    n_steps = first.power.size
    counts = np.zeros(n_steps, dtype=int)
    valid_regions = np.zeros(n_steps, dtype=int)
    for sap, mask, coi in region_results:
        if sap.band != first.band:
            raise ValueError("regions must share one band")
        if sap.power.size != n_steps:
            raise ValueError("regions must share the series length")
        valid = sap.band_coi_valid(coi)
        valid_regions += valid.astype(int)
        counts += (mask.mask & valid).astype(int)
    with np.errstate(invalid="ignore", divide="ignore"):
        fraction = np.where(valid_regions > 0, counts / np.maximum(valid_regions, 1), np.nan)
    return ComposedBandSeries(
        fraction=fraction,
        counts=counts,
        valid_regions=valid_regions,
        band=first.band,
        n_regions=len(region_results),
    )
