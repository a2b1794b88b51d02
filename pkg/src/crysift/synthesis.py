"""Source-filter synthetic cries with exact F0 ground truth."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from scipy.signal import lfilter

from .dsp import AudioBuffer

DEFAULT_FORMANTS = ((1000.0, 150.0), (3000.0, 250.0), (4500.0, 300.0))
SEGMENT_MODES = ("voiced", "unvoiced", "silence")
PEAK_LEVEL = 0.9
# Excitation std of unvoiced (aspiration) segments, relative to unit pulses.
UNVOICED_LEVEL = 0.1
SINC_HALF_WIDTH = 8


@dataclass(frozen=True)
class Segment:
    duration_s: float
    mode: str
    f0_start_hz: float = 0.0
    f0_end_hz: float = None

    def __post_init__(self):
        if self.f0_end_hz is None:
            object.__setattr__(self, "f0_end_hz", self.f0_start_hz)
        if not self.duration_s > 0:
            raise ValueError(f"segment duration must be positive, got {self.duration_s}")
        if self.mode not in SEGMENT_MODES:
            raise ValueError(f"segment mode must be one of {SEGMENT_MODES}, got {self.mode!r}")


@dataclass(frozen=True)
class CrySpec:
    segments: Tuple[Segment, ...]
    formants: Tuple[Tuple[float, float], ...] = DEFAULT_FORMANTS
    sample_rate_hz: float = 16000.0
    noise_level: float = 0.01
    seed: int = 0
    band_limited_pulses: bool = True

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "formants", tuple(tuple(map(float, f)) for f in self.formants))
        nyquist = self.sample_rate_hz / 2
        if not self.segments:
            raise ValueError("CrySpec needs at least one segment")
        for seg in self.segments:
            if seg.mode == "voiced":
                for f0 in (seg.f0_start_hz, seg.f0_end_hz):
                    if not 0 < f0 < nyquist:
                        raise ValueError(f"voiced F0 {f0} Hz outside (0, {nyquist})")
        for center, bw in self.formants:
            if not 0 < center < nyquist:
                raise ValueError(f"formant {center} Hz outside (0, {nyquist})")
            if not bw > 0:
                raise ValueError(f"formant bandwidth must be positive, got {bw}")
        if self.noise_level < 0:
            raise ValueError("noise_level must be >= 0")

    @classmethod
    def constant(cls, f0_hz: float, duration_s: float = 1.0, **kwargs) -> "CrySpec":
        """Single voiced segment at a fixed F0."""
        return cls((Segment(duration_s, "voiced", f0_hz, f0_hz),), **kwargs)


@dataclass(frozen=True)
class GroundTruth:
    """Exact per-sample F0 (0 where not voiced) and the segment layout behind it."""

    f0_per_sample: np.ndarray
    sample_rate_hz: float
    boundaries: np.ndarray = field(repr=False)
    segments: Tuple[Segment, ...] = field(repr=False)

    def f0_at(self, t_s) -> np.ndarray:
        """Analytic F0 trajectory evaluated at arbitrary times."""
        t = np.atleast_1d(np.asarray(t_s, dtype=float))
        out = np.zeros_like(t)
        bounds_s = self.boundaries / self.sample_rate_hz
        for i, seg in enumerate(self.segments):
            if seg.mode != "voiced":
                continue
            t0, t1 = bounds_s[i], bounds_s[i + 1]
            inside = (t >= t0) & (t < t1)
            out[inside] = _glide(seg, t[inside] - t0, t1 - t0)
        return out

    def reference_contour(self, frame_len_samples: int, hop_samples: int) -> np.ndarray:
        """Reference F0 at each frame center for a given framing."""
        n = self.f0_per_sample.size
        if n < frame_len_samples:
            return np.zeros(0)
        count = (n - frame_len_samples) // hop_samples + 1
        centers = (np.arange(count) * hop_samples + frame_len_samples / 2) / self.sample_rate_hz
        return self.f0_at(centers)


def _glide(seg: Segment, offset_s, length_s):
    return seg.f0_start_hz + (seg.f0_end_hz - seg.f0_start_hz) * (offset_s / length_s)


def pulse_train(f0_trajectory, sample_rate_hz: float, fractional: bool = False) -> np.ndarray:
    """Pulses placed by integrating instantaneous phase.

    ``phi[n] = phi[n-1] + f0[n] / fs``; a pulse is emitted wherever ``phi``
    crosses an integer. Samples with F0 = 0 hold the phase.

    With ``fractional=False`` each pulse is a unit impulse on the crossing
    sample, so non-integer periods carry up to half a sample of jitter. With
    ``fractional=True`` each pulse is a Hann-windowed sinc centred on the
    exact (linearly interpolated) crossing instant, which keeps the train
    truly periodic for any F0.
    """
    f0 = np.asarray(f0_trajectory, dtype=float)
    if f0.size == 0:
        return np.zeros(0)
    if np.any(f0 < 0) or np.any(f0 >= sample_rate_hz / 2):
        raise ValueError("F0 trajectory must lie in [0, fs/2)")
    phase = np.cumsum(f0 / sample_rate_hz)
    # Small offset keeps exact integer crossings from slipping a sample on rounding.
    cycles = np.floor(phase + 1e-9)
    hits = np.flatnonzero(np.diff(np.concatenate(([0.0], cycles))) > 0)
    if not fractional:
        out = np.zeros(f0.size)
        out[hits] = 1.0
        return out

    half = SINC_HALF_WIDTH
    prev = np.concatenate(([0.0], phase[:-1]))
    padded = np.zeros(f0.size + 2 * half)
    taps = np.arange(-half + 1, half + 1)
    for n in hits:
        t = n - 1 + (cycles[n] - 1e-9 - prev[n]) / (phase[n] - prev[n])
        base = int(np.floor(t))
        d = base + taps - t
        padded[base + taps + half] += np.sinc(d) * (0.5 + 0.5 * np.cos(np.pi * d / half))
    return padded[half:half + f0.size]


def resonator_coefficients(center_hz: float, bandwidth_hz: float, sample_rate_hz: float):
    """Second-order all-pole resonator with unit DC gain.

    Pole radius is ``exp(-pi * bw / fs)`` at angle ``2 pi fc / fs``.
    """
    radius = np.exp(-np.pi * bandwidth_hz / sample_rate_hz)
    theta = 2.0 * np.pi * center_hz / sample_rate_hz
    a = np.array([1.0, -2.0 * radius * np.cos(theta), radius * radius])
    return np.array([a.sum()]), a


def formant_filter(x, formants: Sequence[Tuple[float, float]], sample_rate_hz: float) -> np.ndarray:
    y = np.asarray(x, dtype=float)
    for center, bw in formants:
        b, a = resonator_coefficients(center, bw, sample_rate_hz)
        y = lfilter(b, a, y)
    return y


def synth_cry(spec: CrySpec) -> Tuple[AudioBuffer, GroundTruth]:
    """Render a synthetic cry and its exact F0 trajectory.

    Voiced segments drive the formant cascade with a pulse train
    (band-limited unless ``spec.band_limited_pulses`` is False) plus
    Gaussian noise at ``noise_level``; unvoiced segments with noise alone;
    silence is zero. The result is peak-normalized to 0.9.
    """
    fs = spec.sample_rate_hz
    rng = np.random.default_rng(spec.seed)
    edges = np.concatenate(([0.0], np.cumsum([s.duration_s for s in spec.segments])))
    boundaries = np.round(edges * fs).astype(int)
    n = int(boundaries[-1])

    f0 = np.zeros(n)
    excitation_noise = np.zeros(n)
    silent = np.zeros(n, dtype=bool)
    noise = rng.standard_normal(n)
    for i, seg in enumerate(spec.segments):
        lo, hi = boundaries[i], boundaries[i + 1]
        if hi <= lo:
            continue
        if seg.mode == "voiced":
            offsets = (np.arange(lo, hi) - lo) / fs
            f0[lo:hi] = _glide(seg, offsets, (hi - lo) / fs)
            excitation_noise[lo:hi] = spec.noise_level * noise[lo:hi]
        elif seg.mode == "unvoiced":
            excitation_noise[lo:hi] = UNVOICED_LEVEL * noise[lo:hi]
        else:
            silent[lo:hi] = True

    excitation = pulse_train(f0, fs, spec.band_limited_pulses) + excitation_noise
    y = formant_filter(excitation, spec.formants, fs)
    y[silent] = 0.0
    peak = np.max(np.abs(y)) if n else 0.0
    if peak > 0:
        y *= PEAK_LEVEL / peak
    truth = GroundTruth(f0, fs, boundaries, spec.segments)
    return AudioBuffer(y, fs), truth
