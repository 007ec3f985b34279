"""Scene resolution and the render/analyze orchestration shared by the
CLI and the HTTP service."""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass

import numpy as np

from . import analysis, control, presets, synth
from .control import (
    AmplitudeFrame,
    F0Trajectory,
    HarmonicFrameSequence,
    SynthParams,
    harmonic_variation_transform,
    odd_even_balance,
    resample_f0,
    resample_frames,
    truncate_harmonics,
)
from .errors import InputError, ParameterError
from .synth import AudioBuffer

SCHEMA_VERSION = 1
RENDER_PEAK_DBFS = -3.0


@dataclass(frozen=True)
class ResolvedScene:
    name: str
    f0: F0Trajectory
    frames: HarmonicFrameSequence
    params: SynthParams
    detune_cents: dict


def _resolve_f0(doc: dict, duration: float) -> F0Trajectory:
    if "values" in doc:
        values = np.array(
            [np.nan if v is None else float(v) for v in doc["values"]], dtype=np.float64
        )
        return F0Trajectory(rate=float(doc.get("rate", presets.DEFAULT_CONTROL_RATE)), values=values)
    program = doc.get("program")
    if program == "constant":
        return presets.f0_constant(doc["hz"], duration)
    if program == "glissando":
        return presets.f0_glissando(doc["start_hz"], doc["end_hz"], duration)
    if program == "steps":
        return presets.f0_steps(
            [(s.get("hz"), s["duration"]) for s in doc["steps"]],
            gap=float(doc.get("gap", 0.0)),
        )
    raise InputError(f"unknown f0 program: {program!r}")


def _resolve_frames(doc: dict, duration: float) -> HarmonicFrameSequence:
    if "values" in doc:
        return HarmonicFrameSequence(
            rate=float(doc.get("rate", presets.DEFAULT_CONTROL_RATE)),
            frames=np.asarray(doc["values"], dtype=np.float64),
        )
    generator = doc.get("generator")
    if generator not in presets.GENERATORS:
        raise InputError(f"unknown frame generator: {generator!r}")
    args = dict(doc.get("args", {}))
    args.setdefault("duration", duration)
    return presets.GENERATORS[generator](**args)


def resolve_scene(scene: dict) -> ResolvedScene:
    """Validate a scene document and materialize its control data."""
    if not isinstance(scene, dict):
        raise InputError("scene must be a JSON object")
    if "preset" in scene:
        reg = presets.registry()
        name = scene["preset"]
        if name not in reg:
            raise InputError(f"unknown preset: {name!r}")
        base = dict(reg[name])
        base_params = dict(base.get("params", {}))
        base_params.update(scene.get("params", {}))
        merged = {**base, **{k: v for k, v in scene.items() if k != "preset"}}
        merged["params"] = base_params
        scene = merged
    try:
        duration = float(scene.get("duration", 4.0))
        f0_doc = scene["f0"]
        frames_doc = scene["frames"]
    except KeyError as exc:
        raise InputError(f"scene missing required field: {exc}") from exc
    if duration <= 0:
        raise InputError("duration must be > 0")

    try:
        params = SynthParams(**scene.get("params", {}))
    except TypeError as exc:
        raise InputError(f"unknown synth parameter: {exc}") from exc

    f0 = _resolve_f0(f0_doc, duration)
    frames = _resolve_frames(frames_doc, duration)

    # bring both controls to a common rate and length
    rate = max(f0.rate, frames.rate)
    f0 = resample_f0(f0, rate)
    frames = resample_frames(frames, rate)
    n = min(len(f0), len(frames))
    f0 = F0Trajectory(rate=rate, values=f0.values[:n])
    frames = HarmonicFrameSequence(rate=rate, frames=frames.frames[:n])

    detune = {int(k): float(v) for k, v in scene.get("detune_cents", {}).items()}
    return ResolvedScene(
        name=str(scene.get("name", "scene")),
        f0=f0,
        frames=frames,
        params=params,
        detune_cents=detune,
    )


def shape_frames(frames: HarmonicFrameSequence, params: SynthParams) -> list[AmplitudeFrame]:
    """Per-frame dial chain: temperature softmax, odd/even balance, truncation."""
    shaped = []
    for row in frames.frames:
        af = harmonic_variation_transform(row, params.harmonic_variation)
        af = odd_even_balance(af, params.odd_even_balance)
        af = truncate_harmonics(af, params.harmonics)
        shaped.append(af)
    max_gain = max((af.frame_gain for af in shaped), default=0.0)
    if max_gain > 0:
        shaped = [
            AmplitudeFrame(af.amplitudes, frame_gain=af.frame_gain / max_gain)
            for af in shaped
        ]
    return shaped


def render(resolved: ResolvedScene) -> AudioBuffer:
    """Full synthesis chain for a resolved scene."""
    params = resolved.params
    shaped = shape_frames(resolved.frames, params)
    gains = np.array([af.frame_gain for af in shaped])
    # rests gate the level envelope so notes end at melodic gaps
    gains = gains * resolved.f0.voiced_mask
    env_db = synth.level_envelope_db(gains, resolved.f0.rate)
    notes = synth.detect_onsets(
        env_db, resolved.f0.rate, params.onset_threshold, params.onset_hysteresis
    )
    audio = synth.render_additive(
        resolved.f0, shaped, notes, params, detune_cents=resolved.detune_cents
    )
    voiced = resolved.f0.values[resolved.f0.voiced_mask]
    f0_ref = float(np.median(voiced)) if voiced.size else synth.MIDDLE_C_HZ
    audio = synth.lowpass_filter(
        audio,
        params.filter_cutoff,
        params.filter_resonance,
        params.filter_keytrack,
        f0_ref=f0_ref,
    )
    return synth.normalize_peak(audio, RENDER_PEAK_DBFS)


def render_scene(scene: dict, fmt: str = "float32") -> tuple[AudioBuffer, bytes, dict]:
    """Render a scene document; returns audio, WAV bytes and a manifest."""
    resolved = resolve_scene(scene)
    audio = render(resolved)
    data = synth.wav_bytes(audio, fmt=fmt, seed=resolved.params.seed)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "scene": resolved.name,
        "params": dataclasses.asdict(resolved.params),
        "control_rate": resolved.f0.rate,
        "duration_seconds": audio.duration,
        "sample_rate": audio.sample_rate,
        "format": fmt,
        "detune_cents": resolved.detune_cents,
        "wav_sha256": hashlib.sha256(data).hexdigest(),
    }
    return audio, data, manifest


@dataclass
class AnalysisResult:
    spectrogram: analysis.Spectrogram
    weighted: analysis.Spectrogram
    f0: F0Trajectory
    tracks: list
    lines: list
    percepts: list
    document: dict


def _trim_spectrogram(spec: analysis.Spectrogram, max_frequency: float) -> analysis.Spectrogram:
    keep = spec.bins <= max_frequency
    return analysis.Spectrogram(
        sample_rate=spec.sample_rate,
        window_size=spec.window_size,
        hop=spec.hop,
        bins=spec.bins[keep],
        magnitudes=spec.magnitudes[:, keep],
    )


def analyze(
    audio: AudioBuffer,
    f0_hint: F0Trajectory | None = None,
    phon: float = 60.0,
    window_size: int = 4096,
    hop: int = 512,
    peak_floor: float = -80.0,
    audibility_margin: float = 20.0,
    min_line_duration: float = 0.15,
    include_spectrogram: bool = True,
    max_frequency: float = 5000.0,
) -> AnalysisResult:
    """Weighted-spectrum analysis of a rendered or external buffer."""
    spec = analysis.stft(audio, window_size=window_size, hop=hop)
    wspec = analysis.weight_spectrogram(spec, phon)
    f0 = f0_hint if f0_hint is not None else analysis.estimate_f0(spec)
    tracks = analysis.track_partials(wspec, peak_floor=peak_floor)
    analysis.label_harmonics(tracks, f0)
    lines = analysis.extract_melodic_lines(
        tracks, wspec, audibility_margin=audibility_margin, min_duration=min_line_duration
    )
    percepts = analysis.estimate_pitch_count(lines, tracks, f0)
    params = {
        "phon": phon,
        "window_size": window_size,
        "hop": hop,
        "peak_floor": peak_floor,
        "audibility_margin": audibility_margin,
        "min_line_duration": min_line_duration,
        "f0_source": "metadata" if f0_hint is not None else "subharmonic-summation",
    }
    doc = analysis.analysis_document(
        f0,
        tracks,
        lines,
        percepts,
        params,
        weighted=_trim_spectrogram(wspec, max_frequency) if include_spectrogram else None,
    )
    return AnalysisResult(
        spectrogram=spec,
        weighted=wspec,
        f0=f0,
        tracks=tracks,
        lines=lines,
        percepts=percepts,
        document=doc,
    )
