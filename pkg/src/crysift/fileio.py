"""WAV ingestion, contour/truth serialization and key-value config files."""
from __future__ import annotations

import csv
import io
import json
import struct
import wave
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

from .contour import Contour
from .dsp import AudioBuffer
from .errors import EmptyAudioError, MalformedFileError, UnsupportedCodecError
from .smoothing import DEFAULT_FACTORS, DEFAULT_MEDIAN_ORDER, DEFAULT_REL_TOL
from .synthesis import CrySpec, Segment
from .tracker import TrackerConfig, TrapezoidSpec

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE

CONTOUR_FIELDS = ("frame_index", "time_s", "f0_raw_hz", "f0_smoothed_hz", "peak_value", "voiced", "corrected")
TRUTH_FIELDS = ("frame_index", "time_s", "f0_hz")


# -- audio -------------------------------------------------------------------

def _decode_pcm(raw: bytes, bits: int) -> np.ndarray:
    if bits == 8:
        return (np.frombuffer(raw, dtype=np.uint8).astype(float) - 128.0) / 128.0
    if bits == 16:
        return np.frombuffer(raw, dtype="<i2") / 32768.0
    if bits == 24:
        b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        v = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        v = np.where(v >= 1 << 23, v - (1 << 24), v)
        return v / float(1 << 23)
    if bits == 32:
        return np.frombuffer(raw, dtype="<i4") / 2147483648.0
    raise UnsupportedCodecError(f"unsupported PCM bit depth {bits}")


def _decode_float(raw: bytes, bits: int) -> np.ndarray:
    if bits == 32:
        return np.frombuffer(raw, dtype="<f4").astype(float)
    if bits == 64:
        return np.frombuffer(raw, dtype="<f8").copy()
    raise UnsupportedCodecError(f"unsupported float bit depth {bits}")


def read_audio(path) -> AudioBuffer:
    """Read a RIFF/WAVE file as mono samples in [-1, 1] at the file's own rate.

    Handles PCM 8/16/24/32-bit and IEEE float 32/64-bit, plain or
    WAVE_FORMAT_EXTENSIBLE. Channels are averaged.
    """
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedFileError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (size,) = struct.unpack("<I", data[pos + 4:pos + 8])
        body = data[pos + 8:pos + 8 + size]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise MalformedFileError(f"{path}: fmt chunk is {len(body)} bytes")
            fmt = struct.unpack("<HHIIHH", body[:16])
            if fmt[0] == WAVE_FORMAT_EXTENSIBLE:
                if len(body) < 26:
                    raise MalformedFileError(f"{path}: truncated extensible fmt chunk")
                (sub,) = struct.unpack("<H", body[24:26])
                fmt = (sub,) + fmt[1:]
        elif chunk_id == b"data":
            payload = body
            break
        pos += 8 + size + (size & 1)

    if fmt is None:
        raise MalformedFileError(f"{path}: missing fmt chunk")
    if payload is None:
        raise MalformedFileError(f"{path}: missing data chunk")
    tag, channels, rate, _, block_align, bits = fmt
    if channels < 1 or rate < 1 or bits < 1:
        raise MalformedFileError(f"{path}: invalid fmt fields {fmt}")
    width = bits // 8
    if bits % 8 or block_align != width * channels:
        raise UnsupportedCodecError(f"{path}: unsupported sample layout ({bits} bits, align {block_align})")

    usable = len(payload) - len(payload) % block_align
    if usable == 0:
        raise EmptyAudioError(f"{path}: no samples")
    raw = payload[:usable]
    if tag == WAVE_FORMAT_PCM:
        samples = _decode_pcm(raw, bits)
    elif tag == WAVE_FORMAT_IEEE_FLOAT:
        samples = _decode_float(raw, bits)
    else:
        raise UnsupportedCodecError(f"{path}: unsupported format tag 0x{tag:04x}")
    samples = samples.reshape(-1, channels).mean(axis=1)
    return AudioBuffer(samples, float(rate))


def write_audio(path, audio: AudioBuffer):
    """Write 16-bit PCM mono; samples outside [-1, 1] are clipped."""
    pcm = np.clip(np.round(audio.samples * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(int(round(audio.sample_rate_hz)))
        w.writeframes(pcm.tobytes())


# -- contours ----------------------------------------------------------------

def _g6(x: float) -> float:
    return float(f"{x:.6g}")


@dataclass(frozen=True)
class ContourRecord:
    frame_index: int
    time_s: float
    f0_raw_hz: float
    f0_smoothed_hz: float
    peak_value: float
    voiced: bool
    corrected: bool

    def rounded(self) -> "ContourRecord":
        """Copy with every real rounded to 6 significant digits."""
        return ContourRecord(int(self.frame_index), _g6(self.time_s), _g6(self.f0_raw_hz),
                             _g6(self.f0_smoothed_hz), _g6(self.peak_value),
                             bool(self.voiced), bool(self.corrected))

    def csv_row(self) -> List[str]:
        return [str(int(self.frame_index)), f"{self.time_s:.6g}", f"{self.f0_raw_hz:.6g}",
                f"{self.f0_smoothed_hz:.6g}", f"{self.peak_value:.6g}",
                "true" if self.voiced else "false", "true" if self.corrected else "false"]


def contour_records(raw: Contour, smoothed: Contour = None) -> List[ContourRecord]:
    """Pair a raw contour with its smoothed version (or itself) frame by frame."""
    smoothed = raw if smoothed is None else smoothed
    if len(smoothed) != len(raw):
        raise ValueError("raw and smoothed contours differ in length")
    return [
        ContourRecord(int(raw.frame_index[i]), float(raw.time_s[i]), float(raw.f0_hz[i]),
                      float(smoothed.f0_hz[i]), float(raw.peak_value[i]),
                      bool(raw.voiced[i]), bool(smoothed.corrected[i]))
        for i in range(len(raw))
    ]


def format_contour(records: Sequence[ContourRecord], fmt: str = "csv") -> str:
    if not records:
        raise ValueError("cannot serialize an empty contour")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CONTOUR_FIELDS)
        writer.writerows(r.csv_row() for r in records)
        return buf.getvalue()
    if fmt == "json":
        return json.dumps([asdict(r.rounded()) for r in records], indent=1) + "\n"
    raise ValueError(f"unknown contour format {fmt!r}")


def write_contour(records: Sequence[ContourRecord], path, fmt: str = "csv"):
    Path(path).write_text(format_contour(records, fmt))


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("true", "1", "yes"):
        return True
    if value in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _record_from_mapping(row) -> ContourRecord:
    try:
        return ContourRecord(int(row["frame_index"]), float(row["time_s"]), float(row["f0_raw_hz"]),
                             float(row["f0_smoothed_hz"]), float(row["peak_value"]),
                             _parse_bool(row["voiced"]), _parse_bool(row["corrected"]))
    except KeyError as exc:
        raise ValueError(f"contour record lacks field {exc}") from None


def _load_rows(path) -> List[dict]:
    text = Path(path).read_text()
    if text.lstrip().startswith("["):
        return json.loads(text)
    return list(csv.DictReader(io.StringIO(text)))


def read_contour(path) -> List[ContourRecord]:
    """Read a contour written by :func:`write_contour` (CSV or JSON, detected from content)."""
    return [_record_from_mapping(row) for row in _load_rows(path)]


def read_f0_column(path, columns=("f0_smoothed_hz", "f0_hz", "f0_raw_hz")) -> np.ndarray:
    """F0 values from a contour or truth file, taking the first column present."""
    rows = _load_rows(path)
    if not rows:
        raise ValueError(f"{path}: no rows")
    for name in columns:
        if name in rows[0]:
            return np.array([float(r[name]) for r in rows])
    raise ValueError(f"{path}: none of the columns {columns} present")


def write_truth(path, reference_f0, frame_len_samples: int, hop_samples: int, sample_rate_hz: float):
    ref = np.asarray(reference_f0, dtype=float)
    times = (np.arange(ref.size) * hop_samples + frame_len_samples / 2) / sample_rate_hz
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRUTH_FIELDS)
        for i, (t, f) in enumerate(zip(times, ref)):
            writer.writerow([i, f"{t:.6g}", f"{f:.6g}"])


def write_matrix_csv(path, corner: str, column_axis, row_axis, values):
    """CSV whose first row is ``column_axis`` and first column ``row_axis``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([corner] + [f"{v:.6g}" for v in column_axis])
        for label, row in zip(row_axis, values):
            writer.writerow([f"{label:.6g}"] + [f"{v:.6g}" for v in row])


# -- config files ------------------------------------------------------------

class ConfigError(ValueError):
    """Bad key or value in a key-value config file."""


def parse_keyvalue(text: str) -> List[tuple]:
    """``key = value`` lines; ``#`` starts a comment. Keys may repeat."""
    pairs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        pairs.append((key, value))
    return pairs


_TRACKER_KEYS = {f.name: f.type for f in fields(TrackerConfig)}
SMOOTHING_KEYS = ("median_order", "harmonic_factors", "harmonic_rel_tol")


def _as_number(key, value, cast):
    try:
        return cast(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r}") from None


def tracker_settings(pairs, overrides: Dict = None):
    """Split config pairs into a :class:`TrackerConfig` and smoothing keyword arguments.

    ``overrides`` (e.g. from command-line flags) win over file values;
    ``None`` override values are ignored.
    """
    values = dict(pairs)
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    tracker_kwargs = {}
    smoothing = {"median_order": DEFAULT_MEDIAN_ORDER, "factors": DEFAULT_FACTORS, "rel_tol": DEFAULT_REL_TOL}
    for key, value in values.items():
        if key == "trapezoid":
            corners = value.split() if isinstance(value, str) else value
            if len(corners) != 4:
                raise ConfigError("trapezoid needs four corner frequencies")
            tracker_kwargs[key] = TrapezoidSpec(*(_as_number(key, c, float) for c in corners))
        elif key in ("lpc_order", "history_len"):
            tracker_kwargs[key] = _as_number(key, value, int)
        elif key in _TRACKER_KEYS:
            tracker_kwargs[key] = _as_number(key, value, float)
        elif key == "median_order":
            smoothing["median_order"] = _as_number(key, value, int)
        elif key == "harmonic_factors":
            items = value.replace(",", " ").split() if isinstance(value, str) else value
            smoothing["factors"] = tuple(_as_number(key, v, int) for v in items)
        elif key == "harmonic_rel_tol":
            smoothing["rel_tol"] = _as_number(key, value, float)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    try:
        return TrackerConfig(**tracker_kwargs), smoothing
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_tracker_config(path=None, overrides: Dict = None):
    pairs = parse_keyvalue(Path(path).read_text()) if path else []
    return tracker_settings(pairs, overrides)


def cry_spec_from_pairs(pairs) -> CrySpec:
    """Build a :class:`CrySpec` from config pairs.

    Recognised keys: ``sample_rate_hz``, ``noise_level``, ``seed``,
    ``band_limited_pulses``, repeated ``segment = <duration_s> <mode>
    [<f0_start_hz> [<f0_end_hz>]]`` and repeated ``formant = <center_hz>
    <bandwidth_hz>`` (any formant line replaces the default set).
    """
    kwargs = {}
    segments = []
    formants = []
    for key, value in pairs:
        if key == "segment":
            parts = value.split()
            if len(parts) < 2:
                raise ConfigError(f"segment needs duration and mode: {value!r}")
            nums = [_as_number(key, p, float) for p in parts[2:]]
            try:
                segments.append(Segment(_as_number(key, parts[0], float), parts[1], *nums))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"segment {value!r}: {exc}") from None
        elif key == "formant":
            parts = value.split()
            if len(parts) != 2:
                raise ConfigError(f"formant needs center and bandwidth: {value!r}")
            formants.append(tuple(_as_number(key, p, float) for p in parts))
        elif key in ("sample_rate_hz", "noise_level"):
            kwargs[key] = _as_number(key, value, float)
        elif key == "seed":
            kwargs[key] = _as_number(key, value, int)
        elif key == "band_limited_pulses":
            kwargs[key] = _parse_bool(value)
        else:
            raise ConfigError(f"unknown synthesis key {key!r}")
    if formants:
        kwargs["formants"] = tuple(formants)
    try:
        return CrySpec(tuple(segments), **kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_cry_spec(path) -> CrySpec:
    return cry_spec_from_pairs(parse_keyvalue(Path(path).read_text()))
