"""Modified SIFT F0 tracker and a cepstral baseline."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np

from . import dsp
from .contour import Contour
from .dsp import AudioBuffer
from .errors import DegenerateInputError, InstabilityError

# Windowed frames with less energy than this are treated as digital silence.
SILENCE_ENERGY = 1e-12


@dataclass(frozen=True)
class TrapezoidSpec:
    """Corner frequencies of the lag-domain search weight.

    The weight is 0 at or below ``f1`` and at or above ``f4``, 1 on
    ``[f2, f3]``, and linear on the two ramps.
    """

    f1_hz: float
    f2_hz: float
    f3_hz: float
    f4_hz: float

    def __post_init__(self):
        if not 0 < self.f1_hz < self.f2_hz < self.f3_hz < self.f4_hz:
            raise ValueError(f"trapezoid corners must increase strictly: {self}")

    @classmethod
    def around(cls, f0_min_hz: float, f0_max_hz: float) -> "TrapezoidSpec":
        """Flat top over [f0_min, f0_max] with ramps of 25% below and 20% above."""
        return cls(0.75 * f0_min_hz, f0_min_hz, f0_max_hz, 1.2 * f0_max_hz)

    def weight(self, freq_hz):
        f = np.asarray(freq_hz, dtype=float)
        f1, f2, f3, f4 = self.f1_hz, self.f2_hz, self.f3_hz, self.f4_hz
        w = np.zeros_like(f)
        rise = (f > f1) & (f < f2)
        w[rise] = (f[rise] - f1) / (f2 - f1)
        w[(f >= f2) & (f <= f3)] = 1.0
        fall = (f > f3) & (f < f4)
        w[fall] = (f4 - f[fall]) / (f4 - f3)
        return w


@dataclass(frozen=True)
class TrackerConfig:
    frame_ms: float = 16.0
    hop_ms: float = 8.0
    lpc_order: int = 4
    f0_min_hz: float = 200.0
    f0_max_hz: float = 2500.0
    trapezoid: Optional[TrapezoidSpec] = None
    voiced_threshold: float = 0.4
    borderline_threshold: float = 0.3
    history_len: int = 2
    submultiple_ratio: float = 0.7

    def __post_init__(self):
        if self.trapezoid is None:
            object.__setattr__(self, "trapezoid", TrapezoidSpec.around(self.f0_min_hz, self.f0_max_hz))
        if not 0 < self.borderline_threshold < self.voiced_threshold < 1:
            raise ValueError("need 0 < borderline_threshold < voiced_threshold < 1")
        if not 0 < self.f0_min_hz < self.f0_max_hz:
            raise ValueError("need 0 < f0_min_hz < f0_max_hz")
        if not 5.0 <= self.frame_ms <= 25.0:
            raise ValueError(f"frame_ms must lie in [5, 25], got {self.frame_ms}")
        if not 0 < self.hop_ms <= self.frame_ms:
            raise ValueError("need 0 < hop_ms <= frame_ms")
        if self.lpc_order < 1:
            raise ValueError("lpc_order must be >= 1")
        if self.history_len < 0:
            raise ValueError("history_len must be >= 0")
        if not 0 < self.submultiple_ratio <= 1:
            raise ValueError("submultiple_ratio must lie in (0, 1]")

    def validate_for(self, sample_rate_hz: float):
        if not self.f0_max_hz < sample_rate_hz / 2:
            raise ValueError(f"f0_max_hz {self.f0_max_hz} must be below Nyquist {sample_rate_hz / 2}")

    def frame_len(self, sample_rate_hz: float) -> int:
        return dsp.ms_to_samples(self.frame_ms, sample_rate_hz)

    def hop(self, sample_rate_hz: float) -> int:
        return max(1, dsp.ms_to_samples(self.hop_ms, sample_rate_hz))

    def with_(self, **changes) -> "TrackerConfig":
        if ("f0_min_hz" in changes or "f0_max_hz" in changes) and "trapezoid" not in changes:
            changes["trapezoid"] = None
        return replace(self, **changes)


@dataclass(frozen=True)
class PitchCandidate:
    lag_samples: int
    f0_hz: float
    peak_value: float

    @classmethod
    def from_lag(cls, lag: int, sample_rate_hz: float, peak_value: float) -> "PitchCandidate":
        return cls(int(lag), sample_rate_hz / lag, float(peak_value))


def lag_band(sample_rate_hz: float, spec: TrapezoidSpec):
    """Smallest and largest lag whose frequency ``fs / lag`` lies strictly inside (f1, f4)."""
    lo = int(np.floor(sample_rate_hz / spec.f4_hz)) + 1
    hi = int(np.ceil(sample_rate_hz / spec.f1_hz)) - 1
    return max(lo, 1), hi


def trapezoid_weight(autocorr, sample_rate_hz: float, spec: TrapezoidSpec) -> np.ndarray:
    """Multiply each lag by the trapezoid weight of its frequency ``fs / lag``; lag 0 gets 0."""
    r = np.asarray(autocorr, dtype=float)
    lags = np.arange(1, r.size)
    weighted = np.zeros_like(r)
    weighted[1:] = r[1:] * spec.weight(sample_rate_hz / lags)
    return weighted


def _submultiple(r, lo, peak_lag, ratio):
    """Smallest lag whose comb of multiples reaches ``peak_lag`` at ``ratio`` of its height."""
    floor = ratio * r[peak_lag]
    for lag in range(lo, peak_lag):
        if r[lag] < floor or r[lag] <= r[lag - 1] or r[lag] < r[lag + 1]:
            continue
        k = int(round(peak_lag / lag))
        if k < 2 or abs(peak_lag - k * lag) > 0.5 * (k + 1):
            continue
        period = peak_lag / k
        comb = (int(round(j * period)) for j in range(1, k))
        if all(r[max(c - 1, 0):c + 2].max() >= floor for c in comb):
            return lag
    return peak_lag


def pick_candidate(weighted, sample_rate_hz: float, spec: TrapezoidSpec,
                   submultiple_ratio: float = 1.0) -> PitchCandidate:
    """Pitch candidate from the weighted autocorrelation over the admissible lag band.

    The starting point is the global maximum (ties to the smaller lag). With
    ``submultiple_ratio < 1`` a shorter lag replaces it when that lag is a
    local peak, the maximum lies near an integer multiple ``k`` of it, and
    every intermediate multiple also carries a peak of at least
    ``submultiple_ratio`` times the maximum. This guards against locking
    onto a period multiple when the true period falls between two integer
    lags. A negative winner is reported with peak 0.
    """
    r = np.asarray(weighted, dtype=float)
    lo, hi = lag_band(sample_rate_hz, spec)
    hi = min(hi, r.size - 1)
    if hi < lo:
        raise ValueError(f"empty lag search band [{lo}, {hi}]")
    lag = lo + int(np.argmax(r[lo:hi + 1]))
    if submultiple_ratio < 1.0:
        lag = _submultiple(r, lo, lag, submultiple_ratio)
    return PitchCandidate.from_lag(lag, sample_rate_hz, max(r[lag], 0.0))


def frame_candidate(frame, sample_rate_hz: float, config: TrackerConfig) -> Optional[PitchCandidate]:
    """Inverse-filter one windowed frame and pick its pitch candidate.

    Returns None for frames with no usable energy.
    """
    x = np.asarray(frame, dtype=float)
    if float(np.dot(x, x)) < SILENCE_ENERGY:
        return None
    spec = config.trapezoid
    try:
        model = dsp.levinson_durbin(dsp.normalized_autocorrelation(x, config.lpc_order), config.lpc_order)
        residual = dsp.inverse_filter(x, model)
    except InstabilityError:
        residual = x
    max_lag = min(lag_band(sample_rate_hz, spec)[1], x.size - 1)
    try:
        r = dsp.normalized_autocorrelation(residual, max_lag)
    except DegenerateInputError:
        return None
    weighted = trapezoid_weight(r, sample_rate_hz, spec)
    return pick_candidate(weighted, sample_rate_hz, spec, config.submultiple_ratio)


def _pass_one(peaks, voiced_threshold, borderline_threshold, history_len):
    labels = np.zeros(len(peaks), dtype=bool)
    for i, peak in enumerate(peaks):
        if peak is None:
            continue
        if peak > voiced_threshold:
            labels[i] = True
        elif peak >= borderline_threshold and i >= history_len and labels[i - history_len:i].all():
            labels[i] = True
    return labels


def repair_neighbours(labels, eligible=None) -> np.ndarray:
    """Relabel as voiced every unvoiced frame whose both neighbours are voiced."""
    labels = np.asarray(labels, dtype=bool)
    out = labels.copy()
    if labels.size >= 3:
        gap = ~labels[1:-1] & labels[:-2] & labels[2:]
        if eligible is not None:
            gap &= np.asarray(eligible, dtype=bool)[1:-1]
        out[1:-1] |= gap
    return out


def voicing_pass(candidates: Sequence[Optional[PitchCandidate]], config: TrackerConfig = TrackerConfig()):
    """Voiced/unvoiced labels for a frame-ordered run of candidates.

    Pass 1 is causal: a frame is voiced if its peak exceeds
    ``voiced_threshold``, or if the peak lies in the borderline band and the
    previous ``history_len`` frames were voiced. Pass 2 voices any remaining
    frame whose immediate neighbours are both voiced. ``None`` entries
    (silent frames) stay unvoiced.

    Returns ``(voiced, f0_hz, peak_value)`` arrays.
    """
    peaks = [None if c is None else c.peak_value for c in candidates]
    first = _pass_one(peaks, config.voiced_threshold, config.borderline_threshold, config.history_len)
    voiced = repair_neighbours(first, [c is not None for c in candidates])
    f0 = np.array([c.f0_hz if (c is not None and v) else 0.0 for c, v in zip(candidates, voiced)])
    peak = np.array([0.0 if p is None else p for p in peaks])
    return voiced, f0, peak


def track_contour(audio: AudioBuffer, config: TrackerConfig = TrackerConfig()) -> Contour:
    """Raw F0 contour: framing, LPC inverse filtering, weighted autocorrelation, voicing."""
    fs = audio.sample_rate_hz
    config.validate_for(fs)
    frame_len = config.frame_len(fs)
    hop = config.hop(fs)
    frames = dsp.frame_signal(audio, frame_len, hop, "hamming")
    candidates = [frame_candidate(f.samples, fs, config) for f in frames]
    voiced, f0, peak = voicing_pass(candidates, config)
    index = np.arange(len(frames))
    times = (index * hop + frame_len / 2) / fs
    return Contour(index, times, f0, peak, voiced)


def cepstral_pitch(frame, sample_rate_hz: float, f0_min_hz: float = 200.0, f0_max_hz: float = 2500.0,
                   fft_size: int = None) -> PitchCandidate:
    """Pitch from the largest cepstral peak in [1/f0_max, 1/f0_min].

    ``peak_value`` is that peak divided by ``|c[0]|``; it is a confidence
    figure only.
    """
    x = np.asarray(frame, dtype=float)
    n = fft_size or max(512, dsp.next_pow2(2 * x.size))
    cep = dsp.real_cepstrum(x, n, sample_rate_hz).values
    lo = max(1, int(np.ceil(sample_rate_hz / f0_max_hz)))
    hi = min(int(np.floor(sample_rate_hz / f0_min_hz)), n // 2)
    if hi < lo:
        raise ValueError("empty quefrency search band")
    q = lo + int(np.argmax(cep[lo:hi + 1]))
    c0 = abs(cep[0])
    return PitchCandidate.from_lag(q, sample_rate_hz, cep[q] / c0 if c0 > 0 else 0.0)
