"""Power spectral density, dominant-frequency estimation, and waveform
features for the advisor prompts.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .signal_io import Signal


@dataclasses.dataclass
class PsdEstimate:
    """One-sided periodogram on the grid k * fs / T."""

    frequencies: np.ndarray
    power: np.ndarray
    resolution: float


@dataclasses.dataclass
class FeatureVector:
    """Waveform and spectral summary of one separated source."""

    spectral_centroid: float
    rms_energy: float
    zero_crossing_rate: float
    variance: float
    mean_frequency: float
    max_amplitude: float
    fundamental_frequency: float


def periodogram(signal: Signal) -> PsdEstimate:
    """Single-window magnitude-squared spectrum, density-normalized.

    One-sided with doubled interior bins, so that
    sum(power) * (fs / T) equals the time-domain mean square (Parseval).
    """
    x = signal.samples
    t_len = x.size
    if t_len < 2:
        raise ValueError("periodogram needs at least two samples")
    fs = signal.sample_rate
    spectrum = np.fft.rfft(x)
    power = (spectrum.real**2 + spectrum.imag**2) / (fs * t_len)
    power[1:] *= 2.0
    if t_len % 2 == 0:
        power[-1] /= 2.0  # Nyquist bin is not mirrored
    freqs = np.arange(power.size) * (fs / t_len)
    return PsdEstimate(freqs, power, fs / t_len)


def fundamental_frequency(signal: Signal, f_min: float, f_max: float) -> float:
    """Frequency of maximum spectral power inside [f_min, f_max].

    Ties resolve to the lowest frequency. Invariant to positive amplitude
    scaling of the input.
    """
    nyquist = signal.sample_rate / 2.0
    if not 0 <= f_min < f_max <= nyquist:
        raise ValueError(
            f"band [{f_min}, {f_max}] is invalid for Nyquist {nyquist} Hz"
        )
    psd = periodogram(signal)
    mask = (psd.frequencies >= f_min) & (psd.frequencies <= f_max)
    if not np.any(mask):
        raise ValueError(f"band [{f_min}, {f_max}] contains no frequency bins")
    band_power = psd.power[mask]
    band_freqs = psd.frequencies[mask]
    return float(band_freqs[np.argmax(band_power)])


def extract_features(
    signal: Signal, f0_band: tuple[float, float] | None = None
) -> FeatureVector:
    """Compute the advisor feature set for one signal.

    Centroid and mean frequency are both power-weighted mean frequencies of
    the periodogram. The zero-crossing rate counts sign changes per sample
    step; the dominant frequency is searched in ``f0_band`` (whole positive
    spectrum when omitted).
    """
    x = signal.samples
    if x.size < 2:
        raise ValueError("feature extraction needs at least two samples")
    psd = periodogram(signal)
    total_power = psd.power.sum()
    if total_power > 0:
        centroid = float((psd.frequencies * psd.power).sum() / total_power)
    else:
        centroid = 0.0
    negative = x < 0
    crossings = int(np.count_nonzero(negative[1:] != negative[:-1]))
    if f0_band is None:
        f0_band = (1e-9, signal.sample_rate / 2.0)
    f0 = fundamental_frequency(signal, f0_band[0], f0_band[1])
    return FeatureVector(
        spectral_centroid=centroid,
        rms_energy=float(np.sqrt(np.mean(x**2))),
        zero_crossing_rate=crossings / (x.size - 1),
        variance=float(np.mean((x - x.mean()) ** 2)),
        mean_frequency=centroid,
        max_amplitude=float(np.max(np.abs(x))),
        fundamental_frequency=f0,
    )


def spectrogram(
    signal: Signal, window_len: int = 256, hop: int = 128
) -> np.ndarray:
    """Hann-windowed magnitude spectrogram, one column per frame.

    Column count is 1 + floor((T - window_len) / hop); rows map to
    frequencies k * fs / window_len.
    """
    x = signal.samples
    if window_len > x.size:
        raise ValueError(
            f"window of {window_len} samples exceeds signal length {x.size}"
        )
    if window_len < 2 or hop < 1:
        raise ValueError("window must span >= 2 samples and hop >= 1")
    window = np.hanning(window_len)
    starts = range(0, x.size - window_len + 1, hop)
    frames = np.stack([x[s : s + window_len] * window for s in starts])
    return np.abs(np.fft.rfft(frames, axis=1)).T
