"""Period estimation from autocorrelation peak spacing, and source labeling.

Cardiac activity repeats roughly every 0.8 to 1.2 seconds while breathing
repeats every 2 to 5 seconds, so of two separated rows the one with the
shorter period is labeled heart and the longer one lung.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from . import kernels
from .signal_io import Signal
from .spectral import fundamental_frequency

# Peak gate relative to the zero-lag autocorrelation, and minimum peak
# spacing as a fraction of the signal length. Exposed as keyword arguments.
DEFAULT_MIN_REL_HEIGHT = 0.2
DEFAULT_MIN_DISTANCE_FRAC = 0.05


@dataclasses.dataclass
class PeriodEstimate:
    """Mean spacing of autocorrelation peaks, in seconds.

    ``period_seconds`` is None when fewer than two peaks support the
    estimate.
    """

    period_seconds: float | None
    peak_lags: np.ndarray
    n_peaks: int

    @property
    def detected(self) -> bool:
        return self.period_seconds is not None


def acf(samples: np.ndarray) -> np.ndarray:
    """Biased autocorrelation (1/T) sum_t x[t] x[t+p], raw samples, no mean
    removal.

    Returns lags 0..T inclusive (length T+1); the zero lag is kept for
    normalization and the empty-sum lag T is 0.
    """
    samples = np.ascontiguousarray(samples, dtype=np.float64).ravel()
    if samples.size < 2:
        raise ValueError("autocorrelation needs at least two samples")
    return kernels.acf_all_lags(samples)


def find_acf_peaks(
    acf_values: np.ndarray,
    min_rel_height: float = DEFAULT_MIN_REL_HEIGHT,
    min_distance: int | None = None,
) -> list[int]:
    """Strictly increasing lags of gated local maxima (lag 0 excluded).

    A candidate must exceed ``min_rel_height`` times the zero-lag value and
    rise strictly from the left (plateaus keep their first lag). Candidates
    closer than ``min_distance`` are pruned greedily by height, earlier lag
    winning ties. Default spacing is 5% of the lag range.
    """
    r = np.asarray(acf_values, dtype=np.float64)
    t_len = r.size - 1
    if min_distance is None:
        min_distance = max(1, math.ceil(DEFAULT_MIN_DISTANCE_FRAC * t_len))
    gate = min_rel_height * r[0]
    rising = r[1:-1] > r[:-2]
    falling = r[1:-1] >= r[2:]
    candidates = np.nonzero(rising & falling & (r[1:-1] >= gate))[0] + 1
    if candidates.size == 0:
        return []
    order = sorted(candidates, key=lambda p: (-r[p], p))
    kept: list[int] = []
    for p in order:
        if all(abs(p - k) >= min_distance for k in kept):
            kept.append(p)
    return sorted(kept)


def estimate_period(
    signal: Signal,
    min_rel_height: float = DEFAULT_MIN_REL_HEIGHT,
    min_distance: int | None = None,
) -> PeriodEstimate:
    """Period = mean spacing of consecutive autocorrelation peaks / rate."""
    r = acf(signal.samples)
    peaks = find_acf_peaks(r, min_rel_height, min_distance)
    lags = np.asarray(peaks, dtype=np.int64)
    if lags.size < 2:
        return PeriodEstimate(None, lags, int(lags.size))
    period = float(np.mean(np.diff(lags))) / signal.sample_rate
    return PeriodEstimate(period, lags, int(lags.size))


@dataclasses.dataclass
class SourceAssignment:
    heart_index: int
    lung_index: int
    periods: list[PeriodEstimate]
    by_fallback: bool


def _f0_or_zero(row: np.ndarray, sample_rate: int, band) -> float:
    try:
        return fundamental_frequency(Signal(row, sample_rate), band[0], band[1])
    except ValueError:
        return 0.0


def assign_sources(
    rows: np.ndarray,
    sample_rate: int,
    f0_bands: tuple[tuple[float, float], ...] | None = None,
) -> SourceAssignment:
    """Label separated rows: shortest period -> heart, longest -> lung.

    When a period is undetected or the extremes tie, ordering falls back to
    the dominant spectral frequency (higher frequency -> heart), which keeps
    the labeling deterministic. Swapping two rows swaps the labels.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    if rows.shape[0] < 2:
        raise ValueError("need at least two rows to assign heart and lung")
    periods = [estimate_period(Signal(r, sample_rate)) for r in rows]
    values = [p.period_seconds for p in periods]
    usable = all(v is not None for v in values)
    if usable:
        heart = int(np.argmin(values))
        lung = int(np.argmax(values))
        if heart != lung and values[heart] != values[lung]:
            return SourceAssignment(heart, lung, periods, by_fallback=False)
    # Just above 0 so the DC bin cannot win for offset-dominated rows.
    band = (1e-9, sample_rate / 2.0)
    if f0_bands is not None:
        # Widest configured band; the fallback only needs a common ordering.
        band = (min(b[0] for b in f0_bands), max(b[1] for b in f0_bands))
    f0s = [_f0_or_zero(r, sample_rate, band) for r in rows]
    order = sorted(range(rows.shape[0]), key=lambda i: (-f0s[i], i))
    return SourceAssignment(order[0], order[-1], periods, by_fallback=True)
