"""Infant-cry F0 estimation by a modified SIFT tracker."""
from .contour import Contour
from .dsp import AudioBuffer, spectrogram
from .evaluation import ErrorReport, build_report, classify_frame, contour_error_pct, quantization_bound
from .pipeline import analyze
from .smoothing import dominant_f0, harmonic_correct, median_smooth, smooth_contour
from .synthesis import CrySpec, GroundTruth, Segment, synth_cry
from .tracker import PitchCandidate, TrackerConfig, TrapezoidSpec, cepstral_pitch, track_contour

__all__ = [
    "AudioBuffer", "Contour", "CrySpec", "ErrorReport", "GroundTruth", "PitchCandidate", "Segment",
    "TrackerConfig", "TrapezoidSpec", "analyze", "build_report", "cepstral_pitch", "classify_frame",
    "contour_error_pct", "dominant_f0", "harmonic_correct", "median_smooth", "quantization_bound",
    "smooth_contour", "spectrogram", "synth_cry", "track_contour",
]
__version__ = "0.1.0"
