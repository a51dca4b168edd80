"""End-to-end orchestration: regions -> spectra -> significance -> waves.

Shared by the command-line driver and by callers who already have
weekly series in memory (e.g. the synthetic-city tests).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import compose, significance, wavelet, waves
from .preprocess import ProcessedSeries, pipeline as preprocess_pipeline


@dataclass(frozen=True)
class RegionAnalysis:
    """All per-region products for one weekly count series."""

    region_id: int
    processed: ProcessedSeries
    transform: wavelet.WaveletTransform
    spectrum: wavelet.GlobalSpectrum
    spectrum_mask: significance.SignificanceMask
    band_results: dict[tuple[float, float], tuple[wavelet.ScaleAvgPower, significance.SignificanceMask]]
    context: significance.SignificanceContext


@dataclass(frozen=True)
class CityAnalysis:
    """City-level composition over all analyzed regions."""

    regions: list[RegionAnalysis]
    composed: compose.ComposedSpectrum
    composed_bands: dict[tuple[float, float], compose.ComposedBandSeries]
    surveys: dict[tuple[float, float], waves.DurationSurvey]
    grid: wavelet.ScaleGrid


def analyze_region(
    counts: np.ndarray,
    grid: wavelet.ScaleGrid,
    region_id: int = 0,
    bands: tuple[tuple[float, float], ...] = (wavelet.CIRCANNUAL_BAND,),
    p_level: float = 0.95,
    preprocessed: bool = False,
    mc_band_thresholds: dict[tuple[float, float], float] | None = None,
) -> RegionAnalysis:
    """Run preprocess, transform, and significance tests for one region.

    With ``preprocessed`` the input is taken as an analysis-ready series
    y(t) and the log/detrend/smooth chain is skipped. Monte-Carlo band
    thresholds, when supplied, override the analytic ones.
    """
    if preprocessed:
        y = np.asarray(counts, dtype=float)
        from .preprocess import valid_range_for

        valid = valid_range_for(y.size)
        lo, hi = valid
        processed = ProcessedSeries(
            y=y,
            x=y,
            d=y,
            valid_range=valid,
            variance=float(np.var(y[lo : hi + 1])),
            region_id=region_id,
        )
    else:
        processed = preprocess_pipeline(counts, region_id=region_id)
    ctx = significance.build_context(processed, grid, p_level=p_level)
    w = wavelet.transform(processed.y, grid)
    spectrum = wavelet.global_spectrum(w, coi_mask=True)
    spec_mask = significance.global_test(ctx, spectrum.power, spectrum.n_avg)
    band_results = {}
    for band in bands:
        sap = wavelet.scale_avg_power(w, band)
        thr = None
        if mc_band_thresholds is not None and band in mc_band_thresholds:
            thr = mc_band_thresholds[band]
        mask = significance.scale_avg_test(ctx, sap.power, sap.scale_indices, threshold=thr)
        if thr is not None:
            mask = significance.SignificanceMask(
                kind=mask.kind, threshold=mask.threshold, mask=mask.mask, method="montecarlo"
            )
        band_results[band] = (sap, mask)
    return RegionAnalysis(
        region_id=region_id,
        processed=processed,
        transform=w,
        spectrum=spectrum,
        spectrum_mask=spec_mask,
        band_results=band_results,
        context=ctx,
    )


def analyze_city(
    region_counts: dict[int, np.ndarray],
    grid: wavelet.ScaleGrid | None = None,
    bands: tuple[tuple[float, float], ...] = (wavelet.CIRCANNUAL_BAND,),
    p_level: float = 0.95,
    preprocessed: bool = False,
    s0: float = 2.0,
    dj: float = 0.05,
) -> CityAnalysis:
    """Analyze every region and compose the city-level statistics."""
    if not region_counts:
        raise ValueError("no regions to analyze")
    n_weeks = len(next(iter(region_counts.values())))
    if grid is None:
        grid = wavelet.build_grid(n_weeks, s0=s0, dj=dj)
    regions = [
        analyze_region(
            counts, grid, region_id=rid, bands=bands, p_level=p_level, preprocessed=preprocessed
        )
        for rid, counts in sorted(region_counts.items())
    ]
    composed = compose.composed_spectrum(
        [(r.spectrum, r.spectrum_mask) for r in regions]
    )
    composed_bands = {}
    surveys = {}
    for band in bands:
        composed_bands[band] = compose.composed_band_series(
            [(*r.band_results[band], r.transform.coi) for r in regions]
        )
        region_masks = []
        for r in regions:
            sap, mask = r.band_results[band]
            valid = sap.band_coi_valid(r.transform.coi)
            region_masks.append((r.region_id, mask.mask, valid))
        surveys[band] = waves.duration_survey(region_masks, band=band)
    return CityAnalysis(
        regions=regions,
        composed=composed,
        composed_bands=composed_bands,
        surveys=surveys,
        grid=grid,
    )
