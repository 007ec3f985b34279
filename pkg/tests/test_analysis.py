"""Spectral analysis: STFT calibration, partial tracking, harmonic
labeling, line extraction, pitch-count rules, f0 estimation, images."""

import numpy as np
import pytest

from harmoniclines import analysis
from harmoniclines.analysis import (
    LineSegment,
    MelodicLine,
    PartialTrack,
    PitchPercept,
    colormap,
    concurrent_line_counts,
    estimate_f0,
    estimate_pitch_count,
    extract_melodic_lines,
    label_harmonics,
    measure_harmonic_levels,
    nearest_harmonic_cents,
    pitch_to_note,
    spectrogram_to_ppm,
    stft,
    track_partials,
    transcribe,
    transcription_to_lines,
    weight_spectrogram,
)
from harmoniclines.control import F0Trajectory
from harmoniclines.errors import ParameterError
from harmoniclines.synth import AudioBuffer

SR = 48000


def tone(freqs_amps, duration=1.0, sr=SR):
    t = np.arange(int(duration * sr)) / sr
    x = np.zeros_like(t)
    for f, a in freqs_amps:
        x += a * np.sin(2 * np.pi * f * t)
    return AudioBuffer(sr, x)


class TestStft:
    # 1500 Hz = bin 128 exactly at window 4096 / 48 kHz: no scalloping
    def test_unit_sine_is_zero_dbfs(self):
        spec = stft(tone([(1500.0, 1.0)]), window_size=4096, hop=512)
        peak = spec.magnitudes[4].max()
        assert peak == pytest.approx(0.0, abs=0.1)

    def test_amplitude_calibration_minus_20(self):
        spec = stft(tone([(1500.0, 0.1)]), window_size=4096, hop=512)
        assert spec.magnitudes[4].max() == pytest.approx(-20.0, abs=0.1)

    def test_peak_bin_at_tone_frequency(self):
        spec = stft(tone([(440.0, 1.0)]))
        i = np.argmax(spec.magnitudes[4])
        assert spec.bins[i] == pytest.approx(440.0, abs=spec.bins[1])

    def test_times_are_frame_centers(self):
        spec = stft(tone([(440.0, 1.0)], duration=0.5), window_size=2048, hop=256)
        assert spec.times[0] == pytest.approx(1024 / SR)
        assert spec.times[1] - spec.times[0] == pytest.approx(256 / SR)

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ParameterError):
            stft(tone([(440.0, 1.0)], duration=0.1), window_size=3000)

    def test_rejects_bad_hop(self):
        with pytest.raises(ParameterError):
            stft(tone([(440.0, 1.0)], duration=0.1), window_size=1024, hop=2048)


class TestWeighting:
    def test_bass_pulled_down_relative_to_reference(self):
        audio = tone([(60.0, 1.0), (1000.0, 1.0)])
        spec = stft(audio)
        wspec = weight_spectrogram(spec, 60.0)
        i60 = np.argmin(np.abs(spec.bins - 60.0))
        i1k = np.argmin(np.abs(spec.bins - 1000.0))
        raw_diff = spec.magnitudes[4, i1k] - spec.magnitudes[4, i60]
        w_diff = wspec.magnitudes[4, i1k] - wspec.magnitudes[4, i60]
        assert w_diff > raw_diff + 20.0


class TestPartialTracking:
    def test_two_steady_partials(self):
        spec = stft(tone([(220.0, 0.5), (440.0, 0.25)], duration=1.0))
        tracks = track_partials(spec, peak_floor=-40.0)
        freqs = sorted(tr.mean_frequency for tr in tracks if tr.duration > 0.5)
        assert len(freqs) == 2
        assert freqs[0] == pytest.approx(220.0, abs=1.0)
        assert freqs[1] == pytest.approx(440.0, abs=1.0)

    def test_parabolic_refinement_beats_bin_spacing(self):
        # 317 Hz sits between bins (bin spacing 11.7 Hz)
        spec = stft(tone([(317.0, 1.0)], duration=1.0))
        tracks = track_partials(spec, peak_floor=-40.0)
        main = max(tracks, key=len)
        assert main.mean_frequency == pytest.approx(317.0, abs=1.0)

    def test_glissando_tracked_as_one_partial(self):
        t = np.arange(SR) / SR
        freq = 200.0 + 40.0 * t
        phase = 2 * np.pi * np.cumsum(freq) / SR
        spec = stft(AudioBuffer(SR, np.sin(phase)))
        tracks = track_partials(spec, peak_floor=-40.0, max_jump=30.0)
        main = max(tracks, key=len)
        assert main.duration > 0.8
        assert main.frequencies[-1] > main.frequencies[0] + 25.0

    def test_short_blips_dropped(self):
        spec = stft(tone([(440.0, 1.0)], duration=1.0))
        tracks = track_partials(spec, peak_floor=-40.0, min_duration=5.0)
        assert tracks == []


class TestHarmonicLabeling:
    def test_nearest_harmonic_basic(self):
        assert nearest_harmonic_cents(200.0, 100.0) == (2, pytest.approx(0.0))
        h, c = nearest_harmonic_cents(250.0, 100.0)
        assert h in (2, 3)
        assert abs(c) == pytest.approx(1200.0 * abs(np.log2(250.0 / (h * 100.0))))

    def test_sub_fundamental_clamps_to_one(self):
        h, c = nearest_harmonic_cents(50.0, 100.0)
        assert h == 1 and c == pytest.approx(-1200.0)

    def test_labels_on_synthetic_harmonics(self):
        audio = tone([(110.0, 0.5), (220.0, 0.3), (330.0, 0.2)])
        spec = stft(audio)
        tracks = track_partials(spec, peak_floor=-40.0)
        f0 = F0Trajectory(rate=50.0, values=np.full(50, 110.0))
        label_harmonics(tracks, f0)
        labels = sorted(tr.harmonic_index for tr in tracks if tr.duration > 0.5)
        assert labels == [1, 2, 3]

    def test_inharmonic_partial_unlabeled(self):
        detuned = 330.0 * 2 ** (80.0 / 1200.0)
        audio = tone([(110.0, 0.5), (detuned, 0.3)])
        spec = stft(audio)
        tracks = track_partials(spec, peak_floor=-40.0)
        f0 = F0Trajectory(rate=50.0, values=np.full(50, 110.0))
        label_harmonics(tracks, f0)
        off = [tr for tr in tracks if tr.duration > 0.5 and tr.harmonic_index is None]
        assert len(off) == 1
        assert off[0].inharmonicity_cents == pytest.approx(80.0, abs=10.0)

    def test_measure_harmonic_levels_reads_back_amplitudes(self):
        # f0 on an exact bin center (bin 10) to avoid scalloping error
        hz = SR / 4096 * 10
        audio = tone([(hz, 0.5), (2 * hz, 0.25)], duration=1.0)
        spec = stft(audio)
        f0 = F0Trajectory(rate=50.0, values=np.full(50, hz))
        levels = measure_harmonic_levels(spec, f0, 3)
        mid = levels[len(levels) // 2]
        assert mid[0] == pytest.approx(20 * np.log10(0.5), abs=0.2)
        assert mid[1] == pytest.approx(20 * np.log10(0.25), abs=0.2)
        assert mid[2] < -40.0


def make_line(h, start, end, pitch=220.0, level=-10.0):
    return MelodicLine(
        segments=(LineSegment(start=start, end=end, pitch_hz=pitch, mean_level_db=level),),
        harmonic_index=h,
    )


class TestLineExtraction:
    def test_two_comparable_partials_two_lines(self):
        audio = tone([(220.0, 0.5), (330.0, 0.4)], duration=2.0)
        wspec = weight_spectrogram(stft(audio), 60.0)
        tracks = track_partials(wspec, peak_floor=-60.0)
        f0 = F0Trajectory(rate=50.0, values=np.full(100, 110.0))
        label_harmonics(tracks, f0)
        lines = extract_melodic_lines(tracks, wspec, audibility_margin=20.0)
        indices = sorted(ln.harmonic_index for ln in lines)
        assert indices == [2, 3]

    def test_weak_partial_not_promoted(self):
        audio = tone([(220.0, 0.5), (330.0, 0.002)], duration=2.0)
        wspec = weight_spectrogram(stft(audio), 60.0)
        tracks = track_partials(wspec, peak_floor=-70.0)
        f0 = F0Trajectory(rate=50.0, values=np.full(100, 110.0))
        label_harmonics(tracks, f0)
        lines = extract_melodic_lines(tracks, wspec, audibility_margin=20.0)
        assert [ln.harmonic_index for ln in lines] == [2]

    def test_concurrent_counts(self):
        lines = [make_line(2, 0.0, 1.0), make_line(3, 0.5, 1.5)]
        counts = concurrent_line_counts(lines, [0.25, 0.75, 1.25, 2.0])
        np.testing.assert_array_equal(counts, [1, 2, 1, 0])

    def test_merge_gap(self):
        tr = PartialTrack(
            frame_indices=list(range(10)),
            times=[i * 0.1 for i in range(10)],
            frequencies=[220.0] * 10,
            levels_db=[-10.0] * 5 + [-100.0] + [-10.0] * 4,
            harmonic_index=2,
        )
        class FakeSpec:
            magnitudes = np.full((10, 4), -10.0)
        lines = extract_melodic_lines(
            [tr], FakeSpec(), audibility_margin=20.0, min_duration=0.15, merge_gap=0.3
        )
        assert len(lines) == 1
        assert len(lines[0].segments) == 2


class TestPitchCountRules:
    def f0_const(self, hz=110.0, n=50):
        return F0Trajectory(rate=50.0, values=np.full(n, hz))

    def steady_track(self, freq, level, n=50, h=None, cents=0.0):
        return PartialTrack(
            frame_indices=list(range(n)),
            times=[i * 0.02 for i in range(n)],
            frequencies=[freq] * n,
            levels_db=[level] * n,
            harmonic_index=h,
            inharmonicity_cents=cents,
        )

    def test_single_line_counts_one(self):
        tracks = [self.steady_track(110.0, -10.0, h=1)]
        lines = [make_line(1, 0.0, 1.0)]
        percepts = estimate_pitch_count(lines, tracks, self.f0_const())
        assert len(percepts) == 1
        assert percepts[0].estimated_pitch_count == 1
        assert percepts[0].triggered_rules == ()

    def test_rule_a_two_lines(self):
        tracks = [self.steady_track(220.0, -10.0, h=2), self.steady_track(330.0, -12.0, h=3)]
        lines = [make_line(2, 0.0, 1.0), make_line(3, 0.0, 1.0)]
        p = estimate_pitch_count(lines, tracks, self.f0_const())[0]
        assert p.estimated_pitch_count == 2
        assert "A" in p.triggered_rules

    def test_rule_b_odd_spaced_harmonics(self):
        # strong partials 3, 5, 7 of 110 Hz: lowest is odd >= 3, spacing 220 Hz
        tracks = [
            self.steady_track(330.0, -10.0, h=3),
            self.steady_track(550.0, -12.0, h=5),
            self.steady_track(770.0, -14.0, h=7),
            self.steady_track(110.0, -50.0, h=1),  # weak fundamental, outside window
        ]
        p = estimate_pitch_count([make_line(3, 0.0, 1.0)], tracks, self.f0_const())[0]
        assert "B" in p.triggered_rules
        assert p.estimated_pitch_count >= 2

    def test_rule_b_not_triggered_with_strong_fundamental(self):
        tracks = [
            self.steady_track(110.0, -6.0, h=1),
            self.steady_track(220.0, -10.0, h=2),
            self.steady_track(330.0, -12.0, h=3),
        ]
        p = estimate_pitch_count([make_line(1, 0.0, 1.0)], tracks, self.f0_const())[0]
        assert "B" not in p.triggered_rules

    def test_rule_c_inharmonic_strong_partial(self):
        tracks = [
            self.steady_track(110.0, -10.0, h=1),
            self.steady_track(460.0, -12.0, h=None, cents=81.0),
        ]
        p = estimate_pitch_count([make_line(1, 0.0, 1.0)], tracks, self.f0_const())[0]
        assert "C" in p.triggered_rules
        assert p.estimated_pitch_count >= 2

    def test_empty_input(self):
        assert estimate_pitch_count([], [], self.f0_const()) == []

    def test_percept_invariants(self):
        with pytest.raises(ParameterError):
            PitchPercept(0.0, 1.0, estimated_pitch_count=0, triggered_rules=())
        with pytest.raises(ParameterError):
            PitchPercept(0.0, 1.0, estimated_pitch_count=2, triggered_rules=())


class TestTranscription:
    def test_pitch_to_note(self):
        assert pitch_to_note(440.0) == ("A4", pytest.approx(0.0))
        name, cents = pitch_to_note(261.63)
        assert name == "C4" and abs(cents) < 1.0
        name, cents = pitch_to_note(453.0)
        assert name == "A#4" and cents == pytest.approx(-49.6, abs=0.5)

    def test_round_trip(self):
        lines = [make_line(2, 0.0, 1.0, pitch=220.0), make_line(3, 0.5, 1.5, pitch=330.0)]
        doc = transcribe(lines)
        back = transcription_to_lines(doc)
        assert len(back) == len(lines)
        for a, b in zip(sorted(lines, key=lambda l: l.harmonic_index), back):
            assert a.harmonic_index == b.harmonic_index
            assert a.segments == b.segments

    def test_voices_ordered_by_harmonic(self):
        lines = [make_line(5, 0.0, 1.0), make_line(2, 0.0, 1.0), make_line(None, 0.0, 1.0)]
        doc = transcribe(lines)
        order = [v["harmonic_index"] for v in doc["voices"]]
        assert order == [2, 5, None]


class TestF0Estimation:
    def test_full_series(self):
        audio = tone([(110.0, 0.4), (220.0, 0.2), (330.0, 0.13), (440.0, 0.1)], duration=1.0)
        f0 = estimate_f0(stft(audio))
        voiced = f0.values[f0.voiced_mask]
        cents = 1200.0 * np.log2(np.median(voiced) / 110.0)
        assert abs(cents) < 2.0

    def test_missing_fundamental(self):
        audio = tone([(330.0, 0.3), (440.0, 0.25), (550.0, 0.2), (660.0, 0.15)], duration=1.0)
        f0 = estimate_f0(stft(audio))
        voiced = f0.values[f0.voiced_mask]
        cents = 1200.0 * np.log2(np.median(voiced) / 110.0)
        assert abs(cents) < 10.0

    def test_silence_is_unvoiced(self):
        f0 = estimate_f0(stft(AudioBuffer(SR, np.zeros(SR // 2))))
        assert not f0.voiced_mask.any()


class TestImages:
    def test_colormap_endpoints(self):
        np.testing.assert_array_equal(colormap(np.array(0.0)), [0, 0, 4])
        np.testing.assert_array_equal(colormap(np.array(1.0)), [252, 255, 164])
        np.testing.assert_array_equal(colormap(np.array(-5.0)), [0, 0, 4])

    def test_ppm_header_and_size(self):
        spec = stft(tone([(220.0, 0.5)], duration=0.5))
        data = spectrogram_to_ppm(spec)
        assert data.startswith(b"P6\n")
        header, rest = data.split(b"\n255\n", 1)
        w, h = map(int, header.split(b"\n")[1].split())
        assert len(rest) == w * h * 3
        n_rows = int(np.sum(spec.bins <= 5000.0))
        assert (w, h) == (spec.n_frames, n_rows)

    def test_overlay_draws_yellow(self):
        spec = stft(tone([(220.0, 0.5)], duration=0.5))
        line = make_line(2, 0.1, 0.4, pitch=220.0)
        plain = spectrogram_to_ppm(spec)
        overlaid = spectrogram_to_ppm(spec, lines=[line])
        assert plain != overlaid
        body = overlaid.split(b"\n255\n", 1)[1]
        px = np.frombuffer(body, dtype=np.uint8).reshape(-1, 3)
        assert np.any(np.all(px == (255, 255, 0), axis=1))

    def test_document_shape(self):
        audio = tone([(220.0, 0.5), (330.0, 0.4)], duration=1.0)
        spec = stft(audio)
        wspec = weight_spectrogram(spec)
        tracks = track_partials(wspec, peak_floor=-60.0)
        f0 = F0Trajectory(rate=50.0, values=np.full(50, 110.0))
        label_harmonics(tracks, f0)
        lines = extract_melodic_lines(tracks, wspec)
        percepts = estimate_pitch_count(lines, tracks, f0)
        doc = analysis.analysis_document(f0, tracks, lines, percepts, {"phon": 60.0}, weighted=wspec)
        assert doc["schema_version"] == 1
        assert doc["params"]["phon"] == 60.0
        assert len(doc["tracks"]) == len(tracks)
        assert len(doc["percepts"]) == 1
        assert "magnitudes_db" in doc["spectrogram"]
        import json

        json.dumps(doc)  # must be JSON-serializable
