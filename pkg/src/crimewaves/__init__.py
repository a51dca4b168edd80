"""Detect, localize, and track periodic components in spatiotemporal event data.

The pipeline: weekly event series per region -> log/detrend/smooth
preprocessing -> Morlet wavelet spectra -> red-noise significance ->
city-level composed spectra -> travelling-wave duration statistics.
"""

__version__ = "0.1.0"

from .ingest import EventSet, FormatConfig, RawSeries, bin_weekly, parse_events
from .partition import Partition, PopulationWeights, grid_partition, region_sweep, split
from .pipeline import analyze_city, analyze_region
from .preprocess import ProcessedSeries, pipeline
from .synth import SynthConfig, WaveSpec, gen_event_stream, gen_region_series
from .wavelet import (
    CIRCANNUAL_BAND,
    C_DELTA,
    ScaleGrid,
    WaveletTransform,
    build_grid,
    global_spectrum,
    reconstruct_delta,
    scale_avg_power,
    transform,
)

__all__ = [
    "EventSet",
    "FormatConfig",
    "RawSeries",
    "bin_weekly",
    "parse_events",
    "Partition",
    "PopulationWeights",
    "grid_partition",
    "region_sweep",
    "split",
    "analyze_city",
    "analyze_region",
    "ProcessedSeries",
    "pipeline",
    "SynthConfig",
    "WaveSpec",
    "gen_event_stream",
    "gen_region_series",
    "CIRCANNUAL_BAND",
    "C_DELTA",
    "ScaleGrid",
    "WaveletTransform",
    "build_grid",
    "global_spectrum",
    "reconstruct_delta",
    "scale_avg_power",
    "transform",
]
