"""Scene resolution, the render/analyze orchestration, and the CLI."""

import json

import numpy as np
import pytest

from harmoniclines import cli, pipeline
from harmoniclines.control import SynthParams
from harmoniclines.errors import InputError
from harmoniclines.synth import read_wav

SCENE = {
    "schema_version": 1,
    "name": "test-scene",
    "duration": 1.0,
    "f0": {"program": "constant", "hz": 110.0},
    "frames": {"generator": "full_series", "args": {"K": 4, "rolloff_db_per_octave": 6.0}},
    "params": {"filter_cutoff": 8000.0, "attack": 0.0},
}


class TestResolveScene:
    def test_inline_scene(self):
        resolved = pipeline.resolve_scene(SCENE)
        assert resolved.name == "test-scene"
        assert resolved.f0.duration == pytest.approx(1.0)
        assert resolved.frames.K == 4
        assert len(resolved.f0) == len(resolved.frames)

    def test_preset_reference(self):
        resolved = pipeline.resolve_scene({"preset": "woofer-mode-3"})
        assert resolved.name == "woofer-mode-3"
        assert resolved.params.harmonics == 10

    def test_preset_param_overlay(self):
        resolved = pipeline.resolve_scene(
            {"preset": "woofer-mode-3", "params": {"filter_cutoff": 2000.0}}
        )
        assert resolved.params.filter_cutoff == 2000.0
        assert resolved.params.harmonics == 10  # preset default survives

    def test_unknown_preset(self):
        with pytest.raises(InputError):
            pipeline.resolve_scene({"preset": "nope"})

    def test_unknown_param(self):
        with pytest.raises(InputError):
            pipeline.resolve_scene({**SCENE, "params": {"wobble": 3}})

    def test_missing_fields(self):
        with pytest.raises(InputError):
            pipeline.resolve_scene({"duration": 1.0})

    def test_explicit_values(self):
        scene = {
            "duration": 1.0,
            "f0": {"rate": 10.0, "values": [110.0] * 10},
            "frames": {"rate": 10.0, "values": [[0.0, -6.0]] * 10},
        }
        resolved = pipeline.resolve_scene(scene)
        assert resolved.frames.K == 2

    def test_rate_mismatch_resolved_to_common_grid(self):
        scene = {
            "duration": 1.0,
            "f0": {"rate": 10.0, "values": [110.0] * 10},
            "frames": {"rate": 50.0, "values": [[0.0]] * 50},
        }
        resolved = pipeline.resolve_scene(scene)
        assert resolved.f0.rate == resolved.frames.rate == 50.0
        assert len(resolved.f0) == len(resolved.frames)


class TestShapeFrames:
    def test_gains_normalized_to_unit_max(self):
        resolved = pipeline.resolve_scene(SCENE)
        shaped = pipeline.shape_frames(resolved.frames, resolved.params)
        gains = [af.frame_gain for af in shaped]
        assert max(gains) == pytest.approx(1.0)

    def test_truncation_applied(self):
        resolved = pipeline.resolve_scene(SCENE)
        params = SynthParams(harmonics=2, attack=0.0)
        shaped = pipeline.shape_frames(resolved.frames, params)
        assert all(af.K == 2 for af in shaped)


class TestRenderScene:
    def test_render_produces_audio_and_manifest(self):
        audio, data, manifest = pipeline.render_scene(SCENE)
        assert audio.duration == pytest.approx(1.0)
        assert np.max(np.abs(audio.samples)) == pytest.approx(10 ** (-3 / 20), abs=1e-6)
        assert data.startswith(b"RIFF")
        assert manifest["wav_sha256"]
        assert manifest["sample_rate"] == 48000

    def test_deterministic(self):
        _, a, ma = pipeline.render_scene(SCENE)
        _, b, mb = pipeline.render_scene(SCENE)
        assert a == b
        assert ma["wav_sha256"] == mb["wav_sha256"]

    def test_analyze_round_trip_smoke(self):
        audio, _, _ = pipeline.render_scene(SCENE)
        result = pipeline.analyze(audio)
        assert result.spectrogram.n_frames > 0
        assert result.percepts
        assert result.document["schema_version"] == 1

    def test_f0_hint_bypasses_estimation(self):
        audio, _, _ = pipeline.render_scene(SCENE)
        resolved = pipeline.resolve_scene(SCENE)
        result = pipeline.analyze(audio, f0_hint=resolved.f0)
        assert result.document["params"]["f0_source"] == "metadata"
        assert result.f0 is resolved.f0


class TestCli:
    def test_render_and_analyze_commands(self, tmp_path):
        scene_path = tmp_path / "scene.json"
        scene_path.write_text(json.dumps(SCENE))
        wav_path = tmp_path / "out.wav"

        rc = cli.main(["render", "--scene", str(scene_path), "--out", str(wav_path)])
        assert rc == cli.EXIT_OK
        assert wav_path.exists()
        manifest = json.loads((tmp_path / "out.wav.manifest.json").read_text())
        assert manifest["scene"] == "test-scene"
        audio = read_wav(wav_path)
        assert audio.duration == pytest.approx(1.0)

        rc = cli.main(["analyze", str(wav_path), "--overlay"])
        assert rc == cli.EXIT_OK
        doc = json.loads((tmp_path / "out.analysis.json").read_text())
        assert doc["schema_version"] == 1
        ppm = (tmp_path / "out.spectrogram.ppm").read_bytes()
        assert ppm.startswith(b"P6\n")

    def test_render_preset(self, tmp_path):
        out = tmp_path / "p.wav"
        rc = cli.main(["render", "--preset", "woofer-mode-2", "--out", str(out)])
        assert rc == cli.EXIT_OK
        assert out.exists()

    def test_render_with_set_override(self, tmp_path):
        out = tmp_path / "o.wav"
        rc = cli.main(
            ["render", "--preset", "woofer-mode-2", "--out", str(out), "--set", "filter_cutoff=500"]
        )
        assert rc == cli.EXIT_OK
        manifest = json.loads((tmp_path / "o.wav.manifest.json").read_text())
        assert manifest["params"]["filter_cutoff"] == 500

    def test_missing_scene_file_is_input_error(self, tmp_path):
        rc = cli.main(["render", "--scene", str(tmp_path / "missing.json"), "--out", str(tmp_path / "x.wav")])
        assert rc == cli.EXIT_INPUT

    def test_invalid_json_is_input_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        rc = cli.main(["render", "--scene", str(bad), "--out", str(tmp_path / "x.wav")])
        assert rc == cli.EXIT_INPUT

    def test_unknown_preset_is_input_error(self, tmp_path):
        rc = cli.main(["render", "--preset", "nope", "--out", str(tmp_path / "x.wav")])
        assert rc == cli.EXIT_INPUT

    def test_analyze_missing_wav_is_input_error(self, tmp_path):
        rc = cli.main(["analyze", str(tmp_path / "missing.wav")])
        assert rc == cli.EXIT_INPUT

    def test_iso_tables(self, capsys):
        rc = cli.main(["iso-tables"])
        assert rc == cli.EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert len(doc["frequencies_hz"]) == 29
        assert len(doc["checksum_sha256"]) == 64
