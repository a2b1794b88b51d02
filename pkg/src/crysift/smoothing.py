"""Contour post-processing: run-wise median filter and harmonic-error correction."""
from __future__ import annotations

from typing import Iterable

import numpy as np

from .contour import Contour
from .errors import NoDominantError

DEFAULT_MEDIAN_ORDER = 4
DEFAULT_FACTORS = (2, 3)
DEFAULT_REL_TOL = 0.10


def median_smooth(contour: Contour, order: int = DEFAULT_MEDIAN_ORDER) -> Contour:
    """Sliding median of ``order // 2`` frames each side, within each voiced run.

    Order 4 gives a centred 5-frame window. Near run edges the window shrinks
    symmetrically so it never crosses into unvoiced frames, which keeps every
    output an element of its own run.
    """
    if order < 2:
        raise ValueError(f"median order must be >= 2, got {order}")
    half = order // 2
    src = contour.f0_hz
    out = src.copy()
    for start, stop in contour.voiced_runs():
        for i in range(start, stop):
            h = min(half, i - start, stop - 1 - i)
            out[i] = np.median(src[i - h:i + h + 1])
    return contour.with_f0(out)


def dominant_f0(contour: Contour) -> float:
    """Median F0 over all voiced frames."""
    voiced = contour.voiced_f0
    if voiced.size == 0:
        raise NoDominantError("contour has no voiced frames")
    return float(np.median(voiced))


def harmonic_correct(contour: Contour, dominant: float, factors: Iterable[int] = DEFAULT_FACTORS,
                     rel_tol: float = DEFAULT_REL_TOL) -> Contour:
    """Fold values near integer multiples or sub-multiples of ``dominant`` back onto it.

    A voiced value ``v`` within ``rel_tol * k * dominant`` of ``k * dominant``
    becomes ``v / k``; one within ``rel_tol * dominant / k`` of
    ``dominant / k`` becomes ``v * k``. Values within the k = 1 band are left
    alone and the smallest matching ``k`` wins.
    """
    if not dominant > 0:
        raise ValueError(f"dominant F0 must be positive, got {dominant}")
    if not 0 < rel_tol < 0.5:
        raise ValueError(f"rel_tol must lie in (0, 0.5), got {rel_tol}")
    ks = sorted(int(k) for k in factors)
    if any(k < 2 for k in ks):
        raise ValueError("correction factors must be integers >= 2")

    f0 = contour.f0_hz.copy()
    flags = contour.corrected.copy()
    for i in np.flatnonzero(contour.voiced):
        v = f0[i]
        if abs(v - dominant) <= rel_tol * dominant:
            continue
        for k in ks:
            if abs(v - k * dominant) <= rel_tol * k * dominant:
                f0[i] = v / k
            elif abs(v - dominant / k) <= rel_tol * dominant / k:
                f0[i] = v * k
            else:
                continue
            flags[i] = True
            break
    return contour.with_f0(f0, flags)


def smooth_contour(contour: Contour, median_order: int = DEFAULT_MEDIAN_ORDER,
                   factors: Iterable[int] = DEFAULT_FACTORS, rel_tol: float = DEFAULT_REL_TOL) -> Contour:
    """Median filter, then harmonic correction against the smoothed dominant F0.

    All-unvoiced contours come back unchanged.
    """
    smoothed = median_smooth(contour, median_order)
    try:
        dominant = dominant_f0(smoothed)
    except NoDominantError:
        return smoothed
    return harmonic_correct(smoothed, dominant, factors, rel_tol)
