"""Command-line interface: ``crysift {track,eval,synth,spectrogram,cepstrum}``.

Exit codes: 0 success, 2 usage error, 3 input-format error, 4 evaluation error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import dsp
from .errors import AudioFormatError, EmptyEvaluationError
from .evaluation import build_report
from .fileio import (ConfigError, contour_records, format_contour, load_cry_spec, load_tracker_config,
                     read_audio, read_f0_column, write_audio, write_matrix_csv, write_truth)
from .pipeline import analyze
from .synthesis import synth_cry

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_EVAL = 4

log = logging.getLogger("crysift")


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _tracker_overrides(args):
    return {
        "frame_ms": args.frame_ms,
        "hop_ms": args.hop_ms,
        "lpc_order": args.lpc_order,
        "f0_min_hz": args.f0_min,
        "f0_max_hz": args.f0_max,
        "voiced_threshold": args.voiced_threshold,
    }


def _settings(args):
    try:
        return load_tracker_config(args.config, _tracker_overrides(args))
    except ConfigError as exc:
        raise CliError(f"config: {exc}", EXIT_USAGE) from None
    except OSError as exc:
        raise CliError(f"config: {exc}", EXIT_USAGE) from None


def _read_audio(path):
    try:
        return read_audio(path)
    except (AudioFormatError, OSError) as exc:
        raise CliError(str(exc), EXIT_INPUT) from None


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_track(args):
    config, smoothing = _settings(args)
    audio = _read_audio(args.input)
    try:
        config.validate_for(audio.sample_rate_hz)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None
    raw, smoothed = analyze(audio, config, smooth=not args.no_smooth, **smoothing)
    if len(raw) == 0:
        raise CliError(f"{args.input}: shorter than one {config.frame_ms} ms frame", EXIT_INPUT)
    _emit(format_contour(contour_records(raw, smoothed), args.format), args.out)
    log.info("%d frames, %d voiced", len(raw), int(raw.voiced.sum()))


def cmd_eval(args):
    try:
        est = read_f0_column(args.est)
        ref = read_f0_column(args.ref, ("f0_hz", "f0_smoothed_hz"))
    except (OSError, ValueError, KeyError) as exc:
        raise CliError(str(exc), EXIT_INPUT) from None
    try:
        report = build_report(est, ref)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_EVAL) from None
    if report.overall_error_pct is None:
        raise CliError("no frame is voiced in both contours", EXIT_EVAL)
    _emit(json.dumps(report.to_dict(), indent=2) + "\n", args.out)


def cmd_synth(args):
    try:
        spec = load_cry_spec(args.spec)
    except ConfigError as exc:
        raise CliError(f"{args.spec}: {exc}", EXIT_INPUT) from None
    except OSError as exc:
        raise CliError(str(exc), EXIT_INPUT) from None
    config, _ = _settings(args)
    audio, truth = synth_cry(spec)
    write_audio(args.out, audio)
    if args.truth:
        fs = audio.sample_rate_hz
        frame_len, hop = config.frame_len(fs), config.hop(fs)
        write_truth(args.truth, truth.reference_contour(frame_len, hop), frame_len, hop, fs)


def cmd_spectrogram(args):
    audio = _read_audio(args.input)
    try:
        spec = dsp.spectrogram(audio, args.frame_ms, args.hop_ms)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None
    write_matrix_csv(args.out, "time_s\\freq_hz", spec.freqs_hz, spec.times_s, spec.db.T)


def cmd_cepstrum(args):
    config, _ = _settings(args)
    audio = _read_audio(args.input)
    fs = audio.sample_rate_hz
    frames = dsp.frame_signal(audio, config.frame_len(fs), config.hop(fs), "hamming")
    if not 0 <= args.frame_index < len(frames):
        raise CliError(f"frame index {args.frame_index} outside [0, {len(frames)})", EXIT_USAGE)
    frame = frames[args.frame_index].samples
    try:
        cep = dsp.real_cepstrum(frame, max(512, dsp.next_pow2(2 * frame.size)), fs)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INPUT) from None
    lines = ["quefrency_s,cepstrum"]
    lines += [f"{q:.6g},{v:.6g}" for q, v in zip(cep.quefrency_s, cep.values)]
    _emit("\n".join(lines) + "\n", args.out)


def _add_tracker_flags(p):
    p.add_argument("--config", help="key = value file with TrackerConfig fields")
    p.add_argument("--frame-ms", type=float)
    p.add_argument("--hop-ms", type=float)
    p.add_argument("--lpc-order", type=int)
    p.add_argument("--f0-min", type=float)
    p.add_argument("--f0-max", type=float)
    p.add_argument("--voiced-threshold", type=float)


def build_parser():
    parser = argparse.ArgumentParser(prog="crysift", description="Infant-cry F0 tracking (modified SIFT).")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("track", help="estimate the F0 contour of a WAV file")
    p.add_argument("input")
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--no-smooth", action="store_true")
    _add_tracker_flags(p)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("eval", help="percentage F0 error against a reference contour")
    p.add_argument("--est", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="render a synthetic cry and its ground truth")
    p.add_argument("spec")
    p.add_argument("--out", required=True)
    p.add_argument("--truth")
    _add_tracker_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("spectrogram", help="log-magnitude STFT matrix as CSV")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--frame-ms", type=float, default=20.0)
    p.add_argument("--hop-ms", type=float, default=10.0)
    p.set_defaults(func=cmd_spectrogram)

    p = sub.add_parser("cepstrum", help="real cepstrum of one analysis frame")
    p.add_argument("input")
    p.add_argument("--frame-index", type=int, required=True)
    p.add_argument("--out")
    _add_tracker_flags(p)
    p.set_defaults(func=cmd_cepstrum)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 for --help
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        args.func(args)
    except CliError as exc:
        print(f"crysift: {exc}", file=sys.stderr)
        return exc.code
    except EmptyEvaluationError as exc:
        print(f"crysift: {exc}", file=sys.stderr)
        return EXIT_EVAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
