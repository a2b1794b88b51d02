"""Signal primitives: framing, autocorrelation, LPC, inverse filtering, cepstrum."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.signal import lfilter

from .errors import DegenerateInputError, InstabilityError

# Numerical slack on |r(eta)| <= 1 for normalized autocorrelations.
AUTOCORR_EPS = 1e-9
LOG_MAG_FLOOR = 1e-10
SPECTROGRAM_FLOOR_DB = -120.0


@dataclass(frozen=True)
class AudioBuffer:
    """Mono audio samples with their sample rate."""

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1:
            raise ValueError("AudioBuffer samples must be one-dimensional")
        if not self.sample_rate_hz > 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate_hz}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("AudioBuffer samples must be finite")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    def __len__(self):
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    def scaled(self, gain: float) -> "AudioBuffer":
        return AudioBuffer(self.samples * gain, self.sample_rate_hz)


@dataclass(frozen=True)
class Frame:
    """One windowed analysis block."""

    samples: np.ndarray
    start_sample: int
    frame_index: int


@dataclass(frozen=True)
class LpcModel:
    """All-pole predictor ``x[n] ~ sum_k a_k x[n-k]`` from the autocorrelation method."""

    coefficients: np.ndarray
    prediction_error: float
    reflection_coefficients: np.ndarray = field(repr=False)

    @property
    def order(self) -> int:
        return self.coefficients.size

    @property
    def inverse_filter_taps(self) -> np.ndarray:
        """FIR taps of the whitening filter A(z) = 1 - sum_k a_k z^-k."""
        return np.concatenate(([1.0], -self.coefficients))


@dataclass(frozen=True)
class Cepstrum:
    values: np.ndarray
    sample_rate_hz: float

    @property
    def quefrency_s(self) -> np.ndarray:
        return np.arange(self.values.size) / self.sample_rate_hz


def ms_to_samples(duration_ms: float, sample_rate_hz: float) -> int:
    """Round a duration in milliseconds to a whole number of samples."""
    return int(round(duration_ms * 1e-3 * sample_rate_hz))


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n) - 1).bit_length()


def hamming(length: int) -> np.ndarray:
    """Symmetric Hamming window, 0.54 - 0.46 cos(2 pi n / (L - 1))."""
    if length == 1:
        return np.ones(1)
    n = np.arange(length)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * n / (length - 1))


_WINDOWS = {
    "hamming": hamming,
    "rectangular": np.ones,
    "hann": lambda n: np.hanning(n),
}


def frame_signal(audio, frame_len_samples: int, hop_samples: int, window="hamming") -> List[Frame]:
    """Cut a signal into overlapping windowed frames.

    Only complete frames are emitted; a trailing partial block is dropped
    rather than zero-padded.

    Parameters
    ----------
    audio : AudioBuffer or array_like
        Source signal.
    frame_len_samples : int
        Frame length, at least 2.
    hop_samples : int
        Frame advance, between 1 and ``frame_len_samples``.
    window : str or array_like
        Window name (``hamming``, ``hann``, ``rectangular``) or explicit
        coefficients of length ``frame_len_samples``.
    """
    x = audio.samples if isinstance(audio, AudioBuffer) else np.asarray(audio, dtype=float)
    if frame_len_samples < 2:
        raise ValueError(f"frame length must be >= 2, got {frame_len_samples}")
    if hop_samples < 1 or hop_samples > frame_len_samples:
        raise ValueError(f"hop must lie in [1, {frame_len_samples}], got {hop_samples}")
    if isinstance(window, str):
        try:
            coeffs = _WINDOWS[window](frame_len_samples)
        except KeyError:
            raise ValueError(f"unknown window {window!r}") from None
    else:
        coeffs = np.asarray(window, dtype=float)
        if coeffs.shape != (frame_len_samples,):
            raise ValueError("window length must equal frame length")

    if x.size < frame_len_samples:
        return []
    count = (x.size - frame_len_samples) // hop_samples + 1
    frames = []
    for i in range(count):
        start = i * hop_samples
        frames.append(Frame(x[start:start + frame_len_samples] * coeffs, start, i))
    return frames


def normalized_autocorrelation(frame, max_lag: int) -> np.ndarray:
    """Biased autocorrelation divided by its lag-0 value.

    Returns ``r[0..max_lag]`` with ``r[0] == 1``. A zero-energy frame raises
    :class:`DegenerateInputError`.
    """
    x = np.asarray(frame, dtype=float)
    if x.size == 0:
        raise ValueError("frame is empty")
    if not 0 < max_lag < x.size:
        raise ValueError(f"max_lag must lie in (0, {x.size}), got {max_lag}")
    energy = float(np.dot(x, x))
    if energy <= 0.0:
        raise DegenerateInputError("zero-energy frame has no autocorrelation")
    full = np.correlate(x, x, mode="full")[x.size - 1:x.size + max_lag]
    r = full / energy
    r[0] = 1.0
    return r


def levinson_durbin(autocorr, order: int = 4) -> LpcModel:
    """Solve the Yule-Walker equations by the Levinson-Durbin recursion.

    Raises :class:`InstabilityError` when a reflection coefficient reaches
    magnitude one, i.e. the autocorrelation is not positive definite.
    """
    r = np.asarray(autocorr, dtype=float)
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if r.size <= order:
        raise ValueError(f"need {order + 1} autocorrelation lags, got {r.size}")
    if not r[0] > 0:
        raise DegenerateInputError("autocorrelation at lag 0 must be positive")

    a = np.zeros(order)
    k = np.zeros(order)
    err = float(r[0])
    for i in range(order):
        acc = r[i + 1] - np.dot(a[:i], r[i:0:-1])
        ki = acc / err
        if not abs(ki) < 1.0:
            raise InstabilityError(f"reflection coefficient {ki:.6g} at stage {i + 1}")
        prev = a[:i].copy()
        a[:i] = prev - ki * prev[::-1]
        a[i] = ki
        k[i] = ki
        err *= 1.0 - ki * ki
    return LpcModel(a, err, k)


def inverse_filter(frame, model: LpcModel) -> np.ndarray:
    """Prediction residual ``e[n] = x[n] - sum_k a_k x[n-k]`` with zero initial history."""
    x = np.asarray(frame, dtype=float)
    if x.size <= model.order:
        raise ValueError("frame must be longer than the model order")
    return lfilter(model.inverse_filter_taps, [1.0], x)


def real_cepstrum(frame, fft_size: int, sample_rate_hz: float = 1.0) -> Cepstrum:
    """Inverse FFT of the log magnitude spectrum (magnitudes floored at 1e-10)."""
    x = np.asarray(frame, dtype=float)
    if fft_size < x.size or fft_size & (fft_size - 1):
        raise ValueError(f"fft_size must be a power of two >= {x.size}, got {fft_size}")
    if not np.any(x):
        raise DegenerateInputError("zero-energy frame has no cepstrum")
    mag = np.abs(np.fft.rfft(x, fft_size))
    log_mag = np.log(np.maximum(mag, LOG_MAG_FLOOR))
    return Cepstrum(np.fft.irfft(log_mag, fft_size), float(sample_rate_hz))


def spectral_flatness(x, fft_size: int = None) -> float:
    """Geometric over arithmetic mean of the power spectrum."""
    x = np.asarray(x, dtype=float)
    n = fft_size or next_pow2(x.size)
    power = np.abs(np.fft.rfft(x, n)) ** 2
    power = np.maximum(power, LOG_MAG_FLOOR ** 2)
    return float(np.exp(np.mean(np.log(power))) / np.mean(power))


@dataclass(frozen=True)
class SpectrogramMatrix:
    """Log-magnitude short-time spectrum; rows are frequency bins, columns frames."""

    freqs_hz: np.ndarray
    times_s: np.ndarray
    db: np.ndarray
    frame_len_samples: int
    fft_size: int


def spectrogram(audio: AudioBuffer, frame_ms: float = 20.0, hop_ms: float = 10.0) -> SpectrogramMatrix:
    """Hamming-windowed STFT magnitude in dB, floored at -120 dB.

    The FFT size is the next power of two at or above the frame length.
    """
    if not frame_ms > hop_ms > 0:
        raise ValueError("need frame_ms > hop_ms > 0")
    fs = audio.sample_rate_hz
    frame_len = ms_to_samples(frame_ms, fs)
    hop = ms_to_samples(hop_ms, fs)
    nfft = next_pow2(frame_len)
    freqs = np.fft.rfftfreq(nfft, 1.0 / fs)
    frames = frame_signal(audio, frame_len, hop, "hamming")
    if not frames:
        return SpectrogramMatrix(freqs, np.empty(0), np.empty((freqs.size, 0)), frame_len, nfft)
    block = np.stack([f.samples for f in frames], axis=1)
    mag = np.abs(np.fft.rfft(block, nfft, axis=0))
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag)
    db = np.maximum(db, SPECTROGRAM_FLOOR_DB)
    times = (np.array([f.start_sample for f in frames]) + frame_len / 2) / fs
    return SpectrogramMatrix(freqs, times, db, frame_len, nfft)
