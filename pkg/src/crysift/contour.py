"""Per-frame F0 contour container."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator, List, Tuple

import numpy as np


@dataclass(frozen=True)
class Contour:
    """Frame-ordered F0 track; ``f0_hz`` is 0 exactly where ``voiced`` is False."""

    frame_index: np.ndarray
    time_s: np.ndarray
    f0_hz: np.ndarray
    peak_value: np.ndarray
    voiced: np.ndarray
    corrected: np.ndarray = None

    def __post_init__(self):
        n = len(self.frame_index)
        arrays = {
            "frame_index": np.asarray(self.frame_index, dtype=int),
            "time_s": np.asarray(self.time_s, dtype=float),
            "f0_hz": np.asarray(self.f0_hz, dtype=float),
            "peak_value": np.asarray(self.peak_value, dtype=float),
            "voiced": np.asarray(self.voiced, dtype=bool),
            "corrected": (np.zeros(n, dtype=bool) if self.corrected is None
                          else np.asarray(self.corrected, dtype=bool)),
        }
        for name, arr in arrays.items():
            if arr.shape != (n,):
                raise ValueError(f"{name} has shape {arr.shape}, expected ({n},)")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any((self.f0_hz == 0) != ~self.voiced):
            raise ValueError("f0_hz must be 0 exactly on unvoiced frames")
        if n > 1 and np.any(np.diff(self.time_s) <= 0):
            raise ValueError("frame times must increase strictly")

    def __len__(self):
        return self.frame_index.size

    @classmethod
    def from_f0(cls, f0_hz, hop_s: float = 0.008, peak_value=None) -> "Contour":
        """Build a contour from bare F0 values (0 = unvoiced) on a uniform time grid."""
        f0 = np.asarray(f0_hz, dtype=float)
        idx = np.arange(f0.size)
        peak = np.where(f0 > 0, 1.0, 0.0) if peak_value is None else peak_value
        return cls(idx, (idx + 1) * hop_s, f0, peak, f0 > 0)

    def with_f0(self, f0_hz, corrected=None) -> "Contour":
        return replace(self, f0_hz=np.asarray(f0_hz, dtype=float),
                       corrected=self.corrected if corrected is None else corrected)

    @property
    def voiced_f0(self) -> np.ndarray:
        return self.f0_hz[self.voiced]

    def voiced_runs(self) -> Iterator[Tuple[int, int]]:
        """Half-open ``(start, stop)`` index ranges of maximal voiced runs."""
        v = np.concatenate(([False], self.voiced, [False])).astype(np.int8)
        edges = np.diff(v)
        starts = np.flatnonzero(edges == 1)
        stops = np.flatnonzero(edges == -1)
        return zip(starts.tolist(), stops.tolist())
