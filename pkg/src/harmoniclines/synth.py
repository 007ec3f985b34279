"""Additive synthesis engine: onset gating, phase-continuous partials,
resonant low-pass, peak normalization, and WAV I/O."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy.io import wavfile
from scipy.signal import find_peaks, lfilter

from .control import AmplitudeFrame, F0Trajectory, SynthParams
from .errors import InputError, ParameterError

MIDDLE_C_HZ = 261.63


@dataclass(frozen=True)
class NoteEvent:
    onset_time: float
    duration: float
    pitch_f0: float | None = None  # None: track the trajectory within the note

    def __post_init__(self):
        if self.onset_time < 0 or self.duration <= 0:
            raise ParameterError("onset_time must be >= 0 and duration > 0")

    @property
    def end_time(self) -> float:
        return self.onset_time + self.duration


@dataclass(frozen=True)
class AudioBuffer:
    sample_rate: int
    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise InputError("audio samples must be finite")
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def detect_onsets(level_db, rate: float, threshold: float, hysteresis: float = 3.0):
    """Turn a dB level envelope into note events.

    One note per envelope peak whose prominence is at least the
    hysteresis and whose height reaches the threshold.  Prominence is a
    property of the envelope alone, so raising the threshold can only
    remove notes, never add them.  A note starts at the last rise
    through the threshold before its peak and ends at the first fall
    below (threshold - hysteresis) or at the next onset.
    """
    if hysteresis < 0:
        raise ParameterError("hysteresis must be >= 0")
    env = np.asarray(level_db, dtype=np.float64)
    if env.size == 0:
        return []
    pad = np.concatenate([[-1e9], env, [-1e9]])
    peaks, _ = find_peaks(pad, height=threshold, prominence=max(hysteresis, 1e-9))
    peaks = peaks - 1

    starts = []
    for i, p in enumerate(peaks):
        below = np.nonzero(env[: p + 1] < threshold)[0]
        start = int(below[-1] + 1) if below.size else 0
        if starts and start <= starts[-1]:
            # no dip through the threshold since the previous note: split
            # at the saddle between the two peaks
            prev_p = peaks[i - 1]
            start = int(prev_p + np.argmin(env[prev_p : p + 1]))
        starts.append(start)

    events = []
    for i, (p, start) in enumerate(zip(peaks, starts)):
        after = np.nonzero(env[p:] < threshold - hysteresis)[0]
        end = int(p + after[0]) if after.size else env.size
        if i + 1 < len(starts):
            end = min(end, starts[i + 1])
        end = max(end, start + 1)
        events.append(NoteEvent(onset_time=start / rate, duration=(end - start) / rate))
    return events


def level_envelope_db(frame_gains, rate: float, window_s: float = 0.01) -> np.ndarray:
    """RMS of the linear frame gains over a short window, in dB."""
    g = np.asarray(frame_gains, dtype=np.float64)
    n = max(1, int(round(window_s * rate)))
    kernel = np.ones(n) / n
    rms = np.sqrt(np.convolve(g**2, kernel, mode="same"))
    return 20.0 * np.log10(np.maximum(rms, 1e-6))


def _note_envelope(
    notes, n_samples: int, sample_rate: int, attack: float, release: float
) -> np.ndarray:
    env = np.zeros(n_samples)
    ordered = sorted(notes, key=lambda e: e.onset_time)
    for i, note in enumerate(ordered):
        i0 = int(round(note.onset_time * sample_rate))
        i1 = int(round(note.end_time * sample_rate))
        i0, i1 = min(i0, n_samples), min(i1, n_samples)
        if i1 <= i0:
            continue
        env[i0:i1] = 1.0
        n_att = min(max(int(round(attack * sample_rate)), 1), i1 - i0)
        env[i0 : i0 + n_att] = np.linspace(0.0, 1.0, n_att, endpoint=False) if n_att > 1 else 1.0
        # exponential release, truncated at the next onset or -80 dB
        tail_end = n_samples
        if i + 1 < len(ordered):
            tail_end = min(tail_end, int(round(ordered[i + 1].onset_time * sample_rate)))
        tau = max(release * sample_rate, 1.0)
        n_rel = min(int(np.ceil(tau * np.log(1e4))), max(tail_end - i1, 0))
        if n_rel > 0:
            env[i1 : i1 + n_rel] = np.maximum(
                env[i1 : i1 + n_rel], np.exp(-np.arange(1, n_rel + 1) / tau)
            )
    return env


def render_additive(
    f0: F0Trajectory,
    amps,
    notes,
    params: SynthParams,
    detune_cents: dict[int, float] | None = None,
) -> AudioBuffer:
    """Phase-continuous sum of sinusoidal partials at k * f0.

    ``amps`` is a sequence of AmplitudeFrame at the trajectory's control
    rate.  Per-partial amplitude interpolates linearly between control
    frames and is gated by the note envelope.  Partials at or above the
    Nyquist frequency are omitted.  ``detune_cents`` maps harmonic index
    to a fixed detuning applied at render time.
    """
    frames = list(amps)
    if len(frames) != len(f0):
        raise InputError("amplitude frames and f0 trajectory must have equal length")
    if not frames:
        raise InputError("empty control input")
    K = frames[0].K
    if any(fr.K != K for fr in frames):
        raise InputError("all amplitude frames must share harmonic count")

    sr = params.sample_rate
    n_samples = int(round(len(f0) / f0.rate * sr))
    out = np.zeros(n_samples)
    if not notes or n_samples == 0:
        return AudioBuffer(sample_rate=sr, samples=out)

    t = np.arange(n_samples) / sr
    f0_inst = f0.at(t)
    if params.pitch_hold:
        for note in notes:
            i0 = int(round(note.onset_time * sr))
            i1 = min(int(round(note.end_time * sr)), n_samples)
            if i0 < n_samples:
                pitch = note.pitch_f0 if note.pitch_f0 else f0_inst[min(i0, n_samples - 1)]
                f0_inst[i0:i1] = pitch

    env = _note_envelope(notes, n_samples, sr, params.attack, params.release)
    # silence rests entirely (rest frames only carry nearest-neighbor fill)
    rest_nearest = np.clip(np.round(t * f0.rate).astype(int), 0, len(f0) - 1)
    env = env * f0.voiced_mask[rest_nearest]

    amp_matrix = np.stack([fr.amplitudes * fr.frame_gain for fr in frames])  # (n, K)
    t_frames = f0.times
    nyquist = sr / 2.0
    detune_cents = detune_cents or {}

    # phase_k(t) = 2*pi*k*d_k * integral of f0; shared running integral
    phase_base = np.concatenate([[0.0], np.cumsum(f0_inst)[:-1]]) / sr
    for k in range(1, K + 1):
        detune = 2.0 ** (detune_cents.get(k, 0.0) / 1200.0)
        a_k = np.interp(t, t_frames, amp_matrix[:, k - 1])
        audible = (k * detune * f0_inst) < nyquist
        a_k = a_k * audible * env
        if not np.any(a_k):
            continue
        out += a_k * np.sin(2.0 * np.pi * k * detune * phase_base)
    return AudioBuffer(sample_rate=sr, samples=out)


def biquad_lowpass_coeffs(cutoff: float, q: float, sample_rate: int):
    """Second-order resonant low-pass (bilinear transform), normalized a0 = 1."""
    omega = 2.0 * np.pi * cutoff / sample_rate
    sn, cs = np.sin(omega), np.cos(omega)
    alpha = sn / (2.0 * q)
    b = np.array([(1 - cs) / 2, 1 - cs, (1 - cs) / 2])
    a = np.array([1 + alpha, -2 * cs, 1 - alpha])
    return b / a[0], a / a[0]


def effective_cutoff(
    cutoff: float, keytrack: float, f0_ref: float, sample_rate: int
) -> float:
    """Keytracked cutoff, clamped to (20, 0.95 * Nyquist)."""
    eff = cutoff * (f0_ref / MIDDLE_C_HZ) ** keytrack
    return float(np.clip(eff, 20.0 + 1e-9, 0.95 * sample_rate / 2.0))


def lowpass_filter(
    audio: AudioBuffer,
    cutoff: float,
    resonance: float = 0.707,
    keytrack: float = 0.0,
    f0_ref: float = MIDDLE_C_HZ,
) -> AudioBuffer:
    if resonance < 0.5:
        raise ParameterError("resonance (Q) must be >= 0.5")
    eff = effective_cutoff(cutoff, keytrack, f0_ref, audio.sample_rate)
    b, a = biquad_lowpass_coeffs(eff, resonance, audio.sample_rate)
    return AudioBuffer(
        sample_rate=audio.sample_rate, samples=lfilter(b, a, audio.samples)
    )


def normalize_peak(audio: AudioBuffer, target_dbfs: float = -1.0) -> AudioBuffer:
    if target_dbfs > 0:
        raise ParameterError("target_dbfs must be <= 0")
    peak = float(np.max(np.abs(audio.samples))) if len(audio) else 0.0
    if peak == 0.0:
        return audio
    scale = 10.0 ** (target_dbfs / 20.0) / peak
    return AudioBuffer(sample_rate=audio.sample_rate, samples=audio.samples * scale)


# ---------------------------------------------------------------------------
# WAV I/O (RIFF, mono; 32-bit float or dithered 16-bit PCM)
# ---------------------------------------------------------------------------

def write_wav(path_or_buf, audio: AudioBuffer, fmt: str = "float32", seed: int = 0):
    samples = np.clip(audio.samples, -1.0, 1.0)
    if fmt == "float32":
        wavfile.write(path_or_buf, audio.sample_rate, samples.astype(np.float32))
    elif fmt == "pcm16":
        # TPDF dither of one LSB, seeded for reproducible output
        rng = np.random.default_rng(seed)
        lsb = 1.0 / 32768.0
        dither = (rng.random(len(samples)) - rng.random(len(samples))) * lsb
        quantized = np.clip(np.round((samples + dither) * 32767.0), -32768, 32767)
        wavfile.write(path_or_buf, audio.sample_rate, quantized.astype(np.int16))
    else:
        raise ParameterError("fmt must be 'float32' or 'pcm16'")


def wav_bytes(audio: AudioBuffer, fmt: str = "float32", seed: int = 0) -> bytes:
    buf = io.BytesIO()
    write_wav(buf, audio, fmt=fmt, seed=seed)
    return buf.getvalue()


def read_wav(path_or_buf) -> AudioBuffer:
    try:
        sr, data = wavfile.read(path_or_buf)
    except Exception as exc:
        raise InputError(f"unreadable WAV: {exc}") from exc
    if data.ndim != 1:
        raise InputError("only mono WAV files are supported")
    if data.dtype == np.int16:
        samples = data / 32768.0
    elif data.dtype == np.int32:
        samples = data / 2147483648.0
    elif data.dtype == np.uint8:
        samples = (data.astype(np.float64) - 128.0) / 128.0
    else:
        samples = data.astype(np.float64)
    return AudioBuffer(sample_rate=int(sr), samples=samples)
