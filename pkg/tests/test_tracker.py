import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crysift import dsp
from crysift.dsp import AudioBuffer
from crysift.errors import DegenerateInputError
from crysift.evaluation import quantization_bound
from crysift.synthesis import CrySpec, Segment, synth_cry
from crysift.tracker import (PitchCandidate, TrackerConfig, TrapezoidSpec, _pass_one, cepstral_pitch,
                             frame_candidate, lag_band, pick_candidate, repair_neighbours, track_contour,
                             trapezoid_weight, voicing_pass)

from conftest import FS, synth_frame

SPEC = TrapezoidSpec(150, 200, 2500, 3000)
CFG = TrackerConfig()


def cand(peak, f0=400.0):
    return PitchCandidate(int(round(FS / f0)), f0, peak)


def labels(peaks, config=CFG):
    voiced, _, _ = voicing_pass([None if p is None else cand(p) for p in peaks], config)
    return voiced.tolist()


# -- trapezoid --------------------------------------------------------------

def test_default_trapezoid_corners():
    assert CFG.trapezoid == SPEC


@pytest.mark.parametrize("freq, weight", [(380, 1.0), (200, 1.0), (2500, 1.0), (100, 0.0), (150, 0.0),
                                          (175, 0.5), (2750, 0.5), (3000, 0.0), (5000, 0.0)])
def test_trapezoid_weight_values(freq, weight):
    assert SPEC.weight(np.array([freq]))[0] == pytest.approx(weight)


def test_trapezoid_weight_applies_per_lag():
    r = np.ones(120)
    w = trapezoid_weight(r, FS, SPEC)
    assert w[0] == 0.0
    lag_380 = FS / 380
    assert w[int(lag_380)] == 1.0
    assert w[110] == 0.0  # 145 Hz
    np.testing.assert_allclose(w[1:], SPEC.weight(FS / np.arange(1, 120)))


def test_trapezoid_corner_order_enforced():
    with pytest.raises(ValueError):
        TrapezoidSpec(200, 150, 2500, 3000)


# -- candidate picking -----------------------------------------------------

def test_lag_band_is_open_interval():
    lo, hi = lag_band(FS, SPEC)
    assert (lo, hi) == (6, 106)
    assert SPEC.f1_hz < FS / hi and FS / lo < SPEC.f4_hz


def test_phonated_frame_candidate():
    c = frame_candidate(synth_frame(380.0), FS, CFG)
    assert c.lag_samples == 42
    assert c.f0_hz == pytest.approx(380.95, abs=0.01)
    assert c.f0_hz == FS / c.lag_samples


def test_hyperphonated_frame_candidate():
    c = frame_candidate(synth_frame(1250.0), FS, CFG)
    assert c.lag_samples == 13
    assert c.f0_hz == pytest.approx(1230.8, abs=0.1)


def test_flat_band_picks_smallest_admissible_lag():
    c = pick_candidate(np.zeros(120), FS, SPEC)
    assert c.lag_samples == lag_band(FS, SPEC)[0]
    assert c.peak_value == 0.0
    voiced, f0, _ = voicing_pass([c], CFG)
    assert not voiced[0] and f0[0] == 0


def test_ties_go_to_smaller_lag():
    r = np.zeros(120)
    r[30] = r[60] = 0.8
    assert pick_candidate(r, FS, SPEC).lag_samples == 30


def test_global_maximum_without_submultiple_check():
    r = np.zeros(120)
    r[32] = r[33] = 0.55
    r[65] = 0.7
    assert pick_candidate(r, FS, SPEC).lag_samples == 65
    assert pick_candidate(r, FS, SPEC, submultiple_ratio=0.7).lag_samples == 32


def test_submultiple_needs_consistent_comb():
    r = np.zeros(120)
    r[65] = 0.7
    r[11] = 0.6  # 65 / 6: intermediate multiples are empty
    assert pick_candidate(r, FS, SPEC, submultiple_ratio=0.7).lag_samples == 65


def test_empty_band_rejected():
    with pytest.raises(ValueError):
        pick_candidate(np.zeros(4), FS, SPEC)


def test_negative_peak_reported_as_zero():
    c = pick_candidate(-np.ones(120), FS, SPEC)
    assert c.peak_value == 0.0


# -- voicing decision -------------------------------------------------------

def test_isolated_strong_peak_is_voiced():
    assert labels([0.45]) == [True]


def test_borderline_needs_voiced_history():
    assert labels([0.5, 0.5, 0.35]) == [True, True, True]
    assert labels([0.1, 0.5, 0.35]) == [False, True, False]
    assert labels([0.35]) == [False]


def test_borderline_band_is_inclusive():
    assert labels([0.5, 0.5, 0.3]) == [True, True, True]
    assert labels([0.5, 0.5, 0.4]) == [True, True, True]
    assert labels([0.4]) == [False]


def test_weak_peak_needs_voiced_neighbours():
    assert labels([0.5, 0.2, 0.5]) == [True, True, True]
    assert labels([0.2]) == [False]
    assert labels([0.5, 0.2, 0.1]) == [True, False, False]


def test_neighbour_repair_takes_candidate_f0():
    cands = [cand(0.5, 400.0), cand(0.2, 800.0), cand(0.5, 400.0)]
    voiced, f0, peak = voicing_pass(cands, CFG)
    assert voiced.all()
    assert f0[1] == 800.0
    assert peak[1] == 0.2


def test_silent_frames_never_repaired():
    assert labels([0.5, None, 0.5]) == [True, False, True]


def test_history_counts_pass_one_only():
    # Frame 2 is only voiced by neighbour repair, so it does not give frame 3 history.
    assert labels([0.5, 0.5, 0.1, 0.5, 0.1, 0.35]) == [True, True, True, True, False, False]


@given(st.lists(st.booleans(), max_size=40))
def test_neighbour_repair_idempotent(bits):
    once = repair_neighbours(bits)
    np.testing.assert_array_equal(repair_neighbours(once), once)


@given(st.lists(st.floats(0, 1), min_size=1, max_size=30), st.floats(0.31, 0.95), st.floats(0.0, 0.04))
def test_raising_threshold_never_adds_voicing(peaks, low, step):
    high = min(low + step, 0.99)
    a = TrackerConfig(voiced_threshold=low)
    b = TrackerConfig(voiced_threshold=high)
    la = _pass_one(peaks, a.voiced_threshold, a.borderline_threshold, a.history_len)
    lb = _pass_one(peaks, b.voiced_threshold, b.borderline_threshold, b.history_len)
    assert not np.any(lb & ~la)


# -- whole tracks -------------------------------------------------------------

def test_phonated_track(cry_380):
    audio, _ = cry_380
    c = track_contour(audio)
    assert c.voiced.mean() >= 0.95
    assert np.all(np.abs(c.voiced_f0 - 380) <= 0.02 * 380)


def test_silence_track():
    c = track_contour(AudioBuffer(np.zeros(16000), FS))
    assert len(c) == 124
    assert not c.voiced.any()
    assert np.all(c.f0_hz == 0) and np.all(c.peak_value == 0)


def test_hyperphonated_track_within_quantization(cry_1250):
    audio, _ = cry_1250
    c = track_contour(audio)
    assert c.voiced.mean() >= 0.95
    # One lag step around P = 12.8 is bounded by twice the half-lag bound.
    assert np.all(np.abs(c.voiced_f0 - 1250) <= 2 * quantization_bound(1250, FS))


def test_short_audio_gives_empty_contour():
    assert len(track_contour(AudioBuffer(np.ones(100), FS))) == 0


def test_frame_times_are_centres():
    c = track_contour(AudioBuffer(np.zeros(4000), FS))
    assert c.time_s[0] == pytest.approx(0.008)
    assert np.all(np.diff(c.time_s) == pytest.approx(0.008))


def test_voiced_f0_inside_band():
    audio, _ = synth_cry(CrySpec((Segment(0.3, "voiced", 300, 1800), Segment(0.2, "unvoiced"),
                                  Segment(0.3, "voiced", 2400, 2400)), seed=9))
    c = track_contour(audio)
    assert np.all((c.voiced_f0 > CFG.trapezoid.f1_hz) & (c.voiced_f0 < CFG.trapezoid.f4_hz))


def test_track_deterministic(cry_380):
    audio, _ = cry_380
    a, b = track_contour(audio), track_contour(audio)
    for name in ("f0_hz", "peak_value", "voiced", "time_s"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))


@settings(max_examples=15, deadline=None)
@given(st.floats(300, 1900), st.floats(1e-3, 1e3), st.integers(0, 1000))
def test_track_amplitude_invariant(f0, alpha, seed):
    audio, _ = synth_cry(CrySpec.constant(f0, duration_s=0.2, seed=seed))
    a, b = track_contour(audio), track_contour(audio.scaled(alpha))
    np.testing.assert_array_equal(a.f0_hz, b.f0_hz)
    np.testing.assert_array_equal(a.voiced, b.voiced)
    np.testing.assert_allclose(a.peak_value, b.peak_value, rtol=0, atol=1e-9)


def test_config_validation():
    with pytest.raises(ValueError):
        TrackerConfig(voiced_threshold=0.3, borderline_threshold=0.4)
    with pytest.raises(ValueError):
        TrackerConfig(frame_ms=30)
    with pytest.raises(ValueError):
        TrackerConfig(f0_min_hz=500, f0_max_hz=400)
    with pytest.raises(ValueError):
        track_contour(AudioBuffer(np.zeros(1000), 4000.0))


def test_config_f0_range_moves_trapezoid():
    cfg = CFG.with_(f0_max_hz=2000)
    assert cfg.trapezoid == TrapezoidSpec(150, 200, 2000, 2400)


# -- cepstral baseline ------------------------------------------------------

def test_cepstral_pitch_phonated():
    c = cepstral_pitch(synth_frame(380.0), FS)
    assert c.lag_samples / FS == pytest.approx(2.6e-3, abs=0.15e-3)


def test_cepstral_pitch_pure_cosine_on_bin():
    # At 12.8 kHz a 400 Hz tone sits exactly on bin 16 of a 512-point FFT.
    fs = 12800.0
    x = np.cos(2 * np.pi * 400 * np.arange(512) / fs)
    # The comb repeats at 5 ms with equal height, so keep that lag out of the search range.
    c = cepstral_pitch(x, fs, f0_min_hz=250.0, fft_size=512)
    assert c.lag_samples == 32
    assert c.lag_samples / fs == pytest.approx(2.5e-3)


def test_cepstral_pitch_pure_cosine_16k():
    x = np.cos(2 * np.pi * 400 * np.arange(256) / FS) * dsp.hamming(256)
    c = cepstral_pitch(x, FS)
    assert abs(c.lag_samples - 40) <= 1


def test_cepstral_baseline_worse_than_sift_on_hyperphonated():
    cep_err, sift_err = [], []
    for f0 in (2000.0, 1800.0):
        audio, _ = synth_cry(CrySpec.constant(f0, duration_s=0.3, seed=1))
        for frame in dsp.frame_signal(audio, 256, 128)[2:-2]:
            cep_err.append(abs(cepstral_pitch(frame.samples, FS).f0_hz - f0) / f0)
            sift_err.append(abs(frame_candidate(frame.samples, FS, CFG).f0_hz - f0) / f0)
    assert all(np.isfinite(cep_err))
    assert np.mean(sift_err) < np.mean(cep_err)


def test_cepstral_pitch_rejects_silence():
    with pytest.raises(DegenerateInputError):
        cepstral_pitch(np.zeros(256), FS)
