"""Audio/matrix I/O, affine nonnegativity shifts, and synthetic mixtures.

All separation math runs on nonnegative matrices, but recorded sound is
signed; the affine shift ``lam1 * Y + lam2`` maps mixtures into the
nonnegative orthant and ``invert_affine`` maps estimated rows back before
features, metrics, or export.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy.io import wavfile

from .errors import DataFormatError

# Margin added by the "auto" offset so every shifted entry is strictly
# positive (the update rules divide by the model matrix).
EPS_POS = 1e-6

_PCM_SCALE = {
    np.dtype(np.int16): 32768.0,
    np.dtype(np.int32): 2147483648.0,
}


@dataclasses.dataclass
class Signal:
    """A finite, single-channel waveform with its sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64).ravel()
        if int(self.sample_rate) <= 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate}")
        self.sample_rate = int(self.sample_rate)
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("signal contains NaN or Inf samples")

    def __len__(self):
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclasses.dataclass
class MixtureSet:
    """Observed mixture rows plus (for synthetic data) the ground truth."""

    mixtures: np.ndarray
    sample_rate: int
    sources: np.ndarray | None = None
    mixing: np.ndarray | None = None

    def __post_init__(self):
        self.mixtures = np.atleast_2d(np.asarray(self.mixtures, dtype=np.float64))
        if self.sources is not None:
            self.sources = np.atleast_2d(np.asarray(self.sources, dtype=np.float64))
            if self.sources.shape[1] != self.mixtures.shape[1]:
                raise ValueError("sources and mixtures must share the sample count")
        if self.mixing is not None:
            self.mixing = np.atleast_2d(np.asarray(self.mixing, dtype=np.float64))

    @property
    def n_mixtures(self) -> int:
        return self.mixtures.shape[0]

    @property
    def n_samples(self) -> int:
        return self.mixtures.shape[1]


def _decode_pcm(data: np.ndarray) -> np.ndarray:
    if data.dtype in _PCM_SCALE:
        return data.astype(np.float64) / _PCM_SCALE[data.dtype]
    if data.dtype == np.uint8:
        return (data.astype(np.float64) - 128.0) / 128.0
    if data.dtype in (np.float32, np.float64):
        return data.astype(np.float64)
    raise DataFormatError(f"unsupported WAV sample format: {data.dtype}")


def _read_wav_raw(path) -> tuple[np.ndarray, int]:
    try:
        rate, data = wavfile.read(path)
    except (OSError, ValueError) as exc:
        raise DataFormatError(f"cannot read WAV file {path}: {exc}") from exc
    if data.size == 0:
        raise DataFormatError(f"WAV file {path} contains no audio")
    return _decode_pcm(data), int(rate)


def read_wav(path) -> Signal:
    """Read a PCM WAV file; multi-channel input yields channel 0.

    Integer PCM is scaled into [-1, 1] (full-scale int16 32767 maps to
    32767/32768).
    """
    data, rate = _read_wav_raw(path)
    if data.ndim > 1:
        data = data[:, 0]
    return Signal(data, rate)


def read_wav_matrix(path) -> tuple[np.ndarray, int]:
    """Read every channel of a WAV file as one row of a (channels, T) matrix."""
    data, rate = _read_wav_raw(path)
    if data.ndim == 1:
        data = data[:, None]
    return np.ascontiguousarray(data.T), rate


def _quantize_int16(samples: np.ndarray) -> np.ndarray:
    peak = np.max(np.abs(samples)) if samples.size else 0.0
    scale = 1.0 if peak <= 1.0 else 1.0 / peak
    # Same 1/32768 step the reader assumes; +1.0 clips to 32767, which stays
    # within the half-step error bound.
    q = np.round(samples * (scale * 32768.0))
    return np.clip(q, -32768, 32767).astype(np.int16)


def write_wav(signal: Signal, path) -> None:
    """Write 16-bit PCM; signals peaking above 1 are peak-normalized first."""
    if signal.samples.size == 0:
        raise ValueError("refusing to write an empty signal")
    try:
        wavfile.write(path, signal.sample_rate, _quantize_int16(signal.samples))
    except OSError as exc:
        raise DataFormatError(f"cannot write WAV file {path}: {exc}") from exc


def write_wav_matrix(matrix: np.ndarray, sample_rate: int, path) -> None:
    """Write a (channels, T) matrix as one multi-channel 16-bit PCM file."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    if matrix.size == 0:
        raise ValueError("refusing to write an empty matrix")
    try:
        wavfile.write(path, int(sample_rate), _quantize_int16(matrix).T.copy())
    except OSError as exc:
        raise DataFormatError(f"cannot write WAV file {path}: {exc}") from exc


def synth_mixtures(
    sources: np.ndarray,
    mixing: np.ndarray,
    noise_db: float | None = None,
    seed: int = 0,
    sample_rate: int = 4000,
) -> MixtureSet:
    """Mix N source rows through an M x N nonnegative matrix.

    ``noise_db`` adds white Gaussian noise at the requested SNR (dB,
    measured against the clean mixtures). Ground truth is retained.
    """
    sources = np.atleast_2d(np.asarray(sources, dtype=np.float64))
    mixing = np.atleast_2d(np.asarray(mixing, dtype=np.float64))
    if mixing.shape[1] != sources.shape[0]:
        raise ValueError(
            f"mixing is {mixing.shape} but there are {sources.shape[0]} sources"
        )
    if np.any(mixing < 0):
        raise ValueError("mixing coefficients must be nonnegative")
    clean = mixing @ sources
    if noise_db is not None:
        noise_power = np.mean(clean**2) / 10.0 ** (noise_db / 10.0)
        rng = np.random.default_rng(seed)
        clean = clean + rng.normal(0.0, np.sqrt(noise_power), size=clean.shape)
    return MixtureSet(clean, sample_rate, sources=sources, mixing=mixing)


def resolve_offset(y: np.ndarray, lam1: float, lam2) -> float:
    """Resolve the shift offset; "auto" picks -lam1*min(Y) + EPS_POS."""
    if lam1 <= 0:
        raise ValueError(f"shift scale must be positive, got {lam1}")
    if isinstance(lam2, str):
        if lam2 != "auto":
            raise ValueError(f"offset must be a number or 'auto', got {lam2!r}")
        return float(-lam1 * np.min(y) + EPS_POS)
    return float(lam2)


def affine_shift(y: np.ndarray, lam1: float, lam2) -> np.ndarray:
    """Entrywise lam1 * y + lam2; the result must be nonnegative."""
    y = np.asarray(y, dtype=np.float64)
    offset = resolve_offset(y, lam1, lam2)
    shifted = lam1 * y + offset
    if shifted.size and np.min(shifted) < 0:
        raise ValueError(
            f"shift lam1={lam1}, lam2={offset} leaves negative entries "
            f"(min {np.min(shifted):g})"
        )
    return shifted


def invert_affine(x: np.ndarray, lam1: float, lam2: float) -> np.ndarray:
    """Entrywise (x - lam2) / lam1, undoing affine_shift."""
    if lam1 == 0:
        raise ValueError("cannot invert a shift with zero scale")
    return (np.asarray(x, dtype=np.float64) - lam2) / lam1


def save_matrix_csv(matrix: np.ndarray, path) -> None:
    """Comma-separated rows, 17 significant digits (exact float round-trip)."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    try:
        np.savetxt(path, matrix, delimiter=",", fmt="%.17g")
    except OSError as exc:
        raise DataFormatError(f"cannot write CSV file {path}: {exc}") from exc


def load_matrix_csv(path) -> np.ndarray:
    """Read a headerless numeric CSV into a 2-D float matrix."""
    try:
        matrix = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    except OSError as exc:
        raise DataFormatError(f"cannot read CSV file {path}: {exc}") from exc
    except ValueError as exc:
        raise DataFormatError(f"malformed CSV file {path}: {exc}") from exc
    if matrix.size == 0:
        raise DataFormatError(f"CSV file {path} is empty")
    return matrix


# ---------------------------------------------------------------------------
# Synthetic cardiorespiratory sources
# ---------------------------------------------------------------------------
#
# Stand-ins for stethoscope recordings: a fast periodic pulse train with a
# low-frequency carrier (cardiac-like, period around 1 s) and a slow
# band-textured breathing envelope (respiratory-like, period of several
# seconds). Both are nonnegative so that an exact nonnegative factorization
# of their noiseless mixtures exists.


def make_heart_source(
    sample_rate: int,
    duration: float,
    rate_hz: float = 1.0,
    carrier_hz: float = 50.0,
    width_s: float = 0.04,
    seed: int = 0,
) -> Signal:
    """Periodic nonnegative beat train: Gaussian bumps with a cosine carrier."""
    rng = np.random.default_rng(seed)
    t = np.arange(int(round(sample_rate * duration))) / sample_rate
    carrier = carrier_hz * (1.0 + 0.05 * (rng.random() - 0.5))
    phase = rng.random() * 0.5 / rate_hz
    x = np.zeros_like(t)
    beat = phase
    while beat < duration:
        window = np.exp(-0.5 * ((t - beat) / width_s) ** 2)
        x += window * (0.6 + 0.4 * np.cos(2.0 * np.pi * carrier * (t - beat)))
        beat += 1.0 / rate_hz
    peak = np.max(x)
    if peak > 0:
        x *= 0.9 / peak
    return Signal(x, sample_rate)


def make_lung_source(
    sample_rate: int,
    duration: float,
    rate_hz: float = 0.25,
    band: tuple[float, float] = (150.0, 280.0),
    n_tones: int = 24,
    seed: int = 0,
) -> Signal:
    """Breath-like envelope at ``rate_hz`` carrying band-limited texture."""
    rng = np.random.default_rng(seed)
    t = np.arange(int(round(sample_rate * duration))) / sample_rate
    cycle = np.mod(t * rate_hz, 1.0)
    breath_fraction = 0.45
    env = np.where(
        cycle < breath_fraction,
        np.sin(np.pi * cycle / breath_fraction) ** 2,
        0.0,
    )
    freqs = rng.uniform(band[0], band[1], size=n_tones)
    amps = rng.uniform(0.3, 1.0, size=n_tones)
    # One deterministic dominant tone keeps the in-band PSD peak stable.
    freqs[0] = 0.5 * (band[0] + band[1])
    amps[0] = 2.0
    phases = rng.uniform(0.0, 2.0 * np.pi, size=n_tones)
    texture = np.zeros_like(t)
    for f, a, p in zip(freqs, amps, phases):
        texture += a * np.sin(2.0 * np.pi * f * t + p)
    texture /= np.max(np.abs(texture))
    x = env * (1.0 + 0.5 * texture) / 1.5
    peak = np.max(x)
    if peak > 0:
        x *= 0.9 / peak
    return Signal(x, sample_rate)


DEFAULT_MIXING = np.array([[1.0, 0.6], [0.6, 1.0]])


def make_heart_lung_case(
    sample_rate: int = 800,
    duration: float = 12.0,
    seed: int = 0,
    mixing: np.ndarray | None = None,
    noise_db: float | None = None,
) -> MixtureSet:
    """One synthetic two-source case; sources row 0 = heart, row 1 = lung."""
    heart = make_heart_source(sample_rate, duration, seed=seed)
    lung = make_lung_source(
        sample_rate,
        duration,
        band=(150.0, min(280.0, 0.45 * sample_rate)),
        seed=seed + 1_000_003,
    )
    sources = np.vstack([heart.samples, lung.samples])
    if mixing is None:
        mixing = DEFAULT_MIXING
    return synth_mixtures(
        sources, mixing, noise_db=noise_db, seed=seed + 7, sample_rate=sample_rate
    )


def make_synthetic_dataset(
    n_cases: int,
    sample_rate: int = 800,
    duration: float = 12.0,
    seed: int = 0,
    mixing: np.ndarray | None = None,
    noise_db: float | None = None,
) -> list[MixtureSet]:
    """A list of seeded heart+lung cases with ground truth."""
    return [
        make_heart_lung_case(sample_rate, duration, seed + i, mixing, noise_db)
        for i in range(n_cases)
    ]
