"""Turn raw weekly count series into detrended, smoothed analysis series.

The chain is r(t) -> x(t) -> d(t) -> y(t): a log10 transform to tame
skewness, removal of the one-year moving-average trend, and a short
moving-average filter to suppress intra-month variance.
"""

from dataclasses import dataclass

import numpy as np

from .ingest import RawSeries

# Half-width (weeks) of the detrending window; one year total.
DETREND_HALF_WINDOW = 26
# Width (weeks) of the final smoothing filter.
SMOOTH_WINDOW = 5


@dataclass(frozen=True)
class ProcessedSeries:
    """All stages of the preprocessing chain for one region.

    Attributes
    ----------
    y : ndarray
        Final analysis series (detrended and smoothed).
    x : ndarray
        Log-transformed stage.
    d : ndarray
        Detrended stage.
    valid_range : (int, int)
        Inclusive index interval where the +-26-week trend window is
        fully supported; statistics should be computed there.
    variance : float
        Variance of ``y`` over ``valid_range``.
    region_id : int | None
        Carried through from the input series, if any.
    """

    y: np.ndarray
    x: np.ndarray
    d: np.ndarray
    valid_range: tuple[int, int]
    variance: float
    region_id: int | None = None

    @property
    def n_weeks(self) -> int:
        return self.y.size

    def valid_slice(self) -> slice:
        lo, hi = self.valid_range
        return slice(lo, hi + 1)


def log_transform(counts: np.ndarray) -> np.ndarray:
    """x(t) = log10(r(t) + 1), elementwise."""
    counts = np.asarray(counts, dtype=float)
    if np.any(counts < 0):
        raise ValueError("counts must be non-negative")
    return np.log10(counts + 1.0)


def moving_average(x: np.ndarray, n1: int, n2: int) -> np.ndarray:
    """Moving average over the index window [t + n1, t + n2).

    The window holds n2 - n1 samples when fully in bounds, matching the
    1/(n2 - n1) normalization; near the series borders the mean is taken
    over the in-bounds samples only.
    """
    x = np.asarray(x, dtype=float)
    if n1 >= n2:
        raise ValueError("require n1 < n2")
    if x.size < 2:
        raise ValueError("series too short for a moving average")
    n = x.size
    # Cumulative-sum formulation: window [t+n1, t+n2) clipped to [0, n).
    csum = np.concatenate(([0.0], np.cumsum(x)))
    t = np.arange(n)
    lo = np.clip(t + n1, 0, n)
    hi = np.clip(t + n2, 0, n)
    width = hi - lo
    if np.any(width == 0):
        raise ValueError("moving-average window falls entirely out of bounds")
    return (csum[hi] - csum[lo]) / width


def detrend(x: np.ndarray) -> np.ndarray:
    """d(t) = x(t) minus the one-year moving average around t."""
    x = np.asarray(x, dtype=float)
    if x.size < 2 * DETREND_HALF_WINDOW + 1:
        raise ValueError(
            f"need at least {2 * DETREND_HALF_WINDOW + 1} weeks to detrend, got {x.size}"
        )
    trend = moving_average(x, -DETREND_HALF_WINDOW, DETREND_HALF_WINDOW)
    return x - trend


def smooth(d: np.ndarray) -> np.ndarray:
    """y(t) = 5-week moving average of d starting at t."""
    d = np.asarray(d, dtype=float)
    if d.size < SMOOTH_WINDOW + 1:
        raise ValueError(f"need more than {SMOOTH_WINDOW} weeks to smooth")
    return moving_average(d, 0, SMOOTH_WINDOW)


def valid_range_for(n_weeks: int) -> tuple[int, int]:
    """Index interval fully supported by the detrending window."""
    lo = DETREND_HALF_WINDOW
    hi = n_weeks - DETREND_HALF_WINDOW - 1
    if hi < lo:
        raise ValueError(f"series of {n_weeks} weeks has no fully supported range")
    return lo, hi


def pipeline(r: RawSeries | np.ndarray, region_id: int | None = None) -> ProcessedSeries:
    """Run the full preprocessing chain on a raw weekly series."""
    if isinstance(r, RawSeries):
        counts = r.counts
        region_id = r.region_id if region_id is None else region_id
    else:
        counts = np.asarray(r, dtype=float)
    x = log_transform(counts)
    d = detrend(x)
    y = smooth(d)
    valid = valid_range_for(counts.size)
    lo, hi = valid
    variance = float(np.var(y[lo : hi + 1]))
    return ProcessedSeries(
        y=y, x=x, d=d, valid_range=valid, variance=variance, region_id=region_id
    )
