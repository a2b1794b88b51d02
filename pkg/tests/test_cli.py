import json

import numpy as np
import pytest

from crysift.cli import main
from crysift.dsp import AudioBuffer
from crysift.fileio import read_audio, read_contour, write_audio


@pytest.fixture
def cry_files(tmp_path):
    spec = tmp_path / "cry.cfg"
    spec.write_text("seed = 1\nsegment = 0.4 voiced 450\nsegment = 0.1 silence\n")
    wav, truth = tmp_path / "cry.wav", tmp_path / "truth.csv"
    assert main(["synth", str(spec), "--out", str(wav), "--truth", str(truth)]) == 0
    return wav, truth


def test_synth_writes_audio_and_truth(cry_files):
    wav, truth = cry_files
    audio = read_audio(wav)
    assert len(audio) == 8000 and audio.sample_rate_hz == 16000
    lines = truth.read_text().splitlines()
    assert lines[0] == "frame_index,time_s,f0_hz"
    assert lines[1] == "0,0.008,450"
    assert lines[-1].endswith(",0")


def test_track_then_eval(cry_files, tmp_path):
    wav, truth = cry_files
    contour = tmp_path / "c.csv"
    assert main(["track", str(wav), "--out", str(contour)]) == 0
    records = read_contour(contour)
    assert len(records) == 61
    assert sum(r.voiced for r in records) >= 40
    report_path = tmp_path / "r.json"
    assert main(["eval", "--est", str(contour), "--ref", str(truth), "--out", str(report_path)]) == 0
    report = json.loads(report_path.read_text())
    for key in ("phonated_error_pct", "hyperphonated_error_pct", "overall_error_pct", "phonated_frames",
                "hyperphonated_frames", "voicing_disagreements"):
        assert key in report
    assert report["phonated_error_pct"] < 3.75
    assert report["hyperphonated_error_pct"] is None


def test_track_json_to_stdout(cry_files, capsys):
    wav, _ = cry_files
    assert main(["track", str(wav), "--format", "json", "--no-smooth", "--frame-ms", "20", "--hop-ms", "10"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert rows[0]["time_s"] == 0.01
    assert all(r["f0_raw_hz"] == r["f0_smoothed_hz"] for r in rows)


def test_track_config_file(cry_files, tmp_path):
    wav, _ = cry_files
    cfg = tmp_path / "t.cfg"
    cfg.write_text("hop_ms = 16\n")
    out = tmp_path / "c.csv"
    assert main(["track", str(wav), "--config", str(cfg), "--out", str(out)]) == 0
    assert len(read_contour(out)) == 31
    assert main(["track", str(wav), "--config", str(cfg), "--hop-ms", "8", "--out", str(out)]) == 0
    assert len(read_contour(out)) == 61


def test_spectrogram_command(cry_files, tmp_path):
    wav, _ = cry_files
    out = tmp_path / "s.csv"
    assert main(["spectrogram", str(wav), "--out", str(out)]) == 0
    rows = [line.split(",") for line in out.read_text().splitlines()]
    assert rows[0][0] == "time_s\\freq_hz"
    assert len(rows[0]) == 1 + 257
    assert float(rows[1][0]) == pytest.approx(0.01)
    assert len(rows) == 1 + 49


def test_cepstrum_command(tmp_path, capsys):
    wav = tmp_path / "tone.wav"
    write_audio(wav, AudioBuffer(0.5 * np.cos(2 * np.pi * 400 * np.arange(4000) / 16000), 16000))
    assert main(["cepstrum", str(wav), "--frame-index", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "quefrency_s,cepstrum"
    assert len(lines) == 1 + 512


def test_usage_errors_exit_2(cry_files, tmp_path):
    wav, _ = cry_files
    assert main([]) == 2
    assert main(["track"]) == 2
    assert main(["track", str(wav), "--format", "xml"]) == 2
    assert main(["cepstrum", str(wav), "--frame-index", "999"]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense = 1\n")
    assert main(["track", str(wav), "--config", str(bad)]) == 2


def test_input_errors_exit_3(tmp_path):
    junk = tmp_path / "junk.wav"
    junk.write_bytes(b"not audio")
    assert main(["track", str(junk)]) == 3
    assert main(["track", str(tmp_path / "missing.wav")]) == 3
    spec = tmp_path / "s.cfg"
    spec.write_text("segment = 0.1 whisper\n")
    assert main(["synth", str(spec), "--out", str(tmp_path / "o.wav")]) == 3


def test_eval_errors_exit_4(tmp_path):
    est, ref = tmp_path / "est.csv", tmp_path / "ref.csv"
    est.write_text("frame_index,time_s,f0_hz\n0,0.008,0\n1,0.016,0\n")
    ref.write_text("frame_index,time_s,f0_hz\n0,0.008,400\n1,0.016,400\n")
    assert main(["eval", "--est", str(est), "--ref", str(ref)]) == 4
    ref.write_text("frame_index,time_s,f0_hz\n0,0.008,400\n")
    assert main(["eval", "--est", str(est), "--ref", str(ref)]) == 4
