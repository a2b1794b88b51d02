"""End-to-end analysis: raw tracking followed by contour smoothing."""
from __future__ import annotations

from typing import Tuple

from .contour import Contour
from .dsp import AudioBuffer
from .smoothing import DEFAULT_FACTORS, DEFAULT_MEDIAN_ORDER, DEFAULT_REL_TOL, smooth_contour
from .tracker import TrackerConfig, track_contour


def analyze(audio: AudioBuffer, config: TrackerConfig = TrackerConfig(), smooth: bool = True,
            median_order: int = DEFAULT_MEDIAN_ORDER, factors=DEFAULT_FACTORS,
            rel_tol: float = DEFAULT_REL_TOL) -> Tuple[Contour, Contour]:
    """Return ``(raw, smoothed)`` contours; with ``smooth=False`` both are the raw track."""
    raw = track_contour(audio, config)
    if not smooth:
        return raw, raw
    return raw, smooth_contour(raw, median_order, factors, rel_tol)
