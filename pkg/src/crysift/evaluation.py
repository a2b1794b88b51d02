"""Percentage F0 error, cry-register classification and lag quantization bound."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .contour import Contour
from .errors import EmptyEvaluationError

UNVOICED = "unvoiced"
PHONATED = "phonated"
HYPERPHONATED = "hyperphonated"
OUT_OF_BAND = "out_of_band"

PHONATED_MIN_HZ = 250.0
HYPERPHONATED_MIN_HZ = 700.0

# Published per-class error rates on clinically annotated cries, for side-by-side display.
PUBLISHED_PHONATED_ERROR_PCT = 3.75
PUBLISHED_HYPERPHONATED_ERROR_PCT = 6.15

REFERENCE_NOTE = "reference F0 is synthetic ground truth, not visual annotation"


def classify_frame(f0_hz: float) -> str:
    """Cry register of one F0 value: 0 unvoiced, [250, 700) phonated, >= 700 hyperphonated."""
    if f0_hz < 0:
        raise ValueError(f"F0 must be >= 0, got {f0_hz}")
    if f0_hz == 0:
        return UNVOICED
    if f0_hz < PHONATED_MIN_HZ:
        return OUT_OF_BAND
    if f0_hz < HYPERPHONATED_MIN_HZ:
        return PHONATED
    return HYPERPHONATED


def classify_frames(f0_hz) -> np.ndarray:
    f0 = np.asarray(f0_hz, dtype=float)
    if np.any(f0 < 0):
        raise ValueError("F0 values must be >= 0")
    return np.array([classify_frame(v) for v in f0], dtype=object)


def _f0_array(contour) -> np.ndarray:
    return contour.f0_hz if isinstance(contour, Contour) else np.asarray(contour, dtype=float)


def _eligible(estimated, reference, class_filter):
    if estimated.shape != reference.shape:
        raise ValueError(f"frame count mismatch: {estimated.size} estimated vs {reference.size} reference")
    both = (estimated > 0) & (reference > 0)
    if class_filter is not None:
        both &= classify_frames(reference) == class_filter
    return both


def voicing_disagreements(estimated, reference) -> int:
    """Frames where exactly one of the two contours is voiced."""
    est, ref = _f0_array(estimated), _f0_array(reference)
    return int(np.count_nonzero((est > 0) != (ref > 0)))


def contour_error_pct(estimated, reference, class_filter: Optional[str] = None) -> float:
    """Mean of ``100 |f_est - f_ref| / f_ref`` over frames voiced in both contours.

    ``class_filter`` restricts the mean to frames whose reference falls in one
    register. Frames voiced in only one contour are left out; see
    :func:`voicing_disagreements`.
    """
    est, ref = _f0_array(estimated), _f0_array(reference)
    mask = _eligible(est, ref, class_filter)
    if not mask.any():
        raise EmptyEvaluationError(f"no jointly voiced frames (class={class_filter})")
    return float(np.mean(100.0 * np.abs(est[mask] - ref[mask]) / ref[mask]))


def quantization_bound(f0_hz: float, sample_rate_hz: float) -> float:
    """Frequency shift caused by half a sample of lag error: ``Fs / (2 P^2)`` with ``P = Fs / f0``."""
    if not 0 < f0_hz < sample_rate_hz / 2:
        raise ValueError(f"F0 must lie in (0, {sample_rate_hz / 2}), got {f0_hz}")
    period = sample_rate_hz / f0_hz
    return sample_rate_hz / (2.0 * period * period)


@dataclass
class ErrorReport:
    phonated_error_pct: Optional[float]
    hyperphonated_error_pct: Optional[float]
    overall_error_pct: Optional[float]
    phonated_frames: int
    hyperphonated_frames: int
    out_of_band_frames: int
    voicing_disagreements: int
    reference_note: str = REFERENCE_NOTE
    published_phonated_error_pct: float = PUBLISHED_PHONATED_ERROR_PCT
    published_hyperphonated_error_pct: float = PUBLISHED_HYPERPHONATED_ERROR_PCT

    def to_dict(self) -> dict:
        return asdict(self)


def _maybe_error(est, ref, class_filter):
    try:
        return contour_error_pct(est, ref, class_filter)
    except EmptyEvaluationError:
        return None


def build_report(estimated, reference) -> ErrorReport:
    """Per-register and overall errors; a register with no frames reports ``None``."""
    est, ref = _f0_array(estimated), _f0_array(reference)
    mask = _eligible(est, ref, None)
    classes = classify_frames(ref[mask])
    return ErrorReport(
        phonated_error_pct=_maybe_error(est, ref, PHONATED),
        hyperphonated_error_pct=_maybe_error(est, ref, HYPERPHONATED),
        overall_error_pct=_maybe_error(est, ref, None),
        phonated_frames=int(np.count_nonzero(classes == PHONATED)),
        hyperphonated_frames=int(np.count_nonzero(classes == HYPERPHONATED)),
        out_of_band_frames=int(np.count_nonzero(classes == OUT_OF_BAND)),
        voicing_disagreements=voicing_disagreements(est, ref),
    )
