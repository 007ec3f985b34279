"""Control-signal types and the per-frame harmonic transforms.

Everything here is a pure function on immutable values: log-magnitude
frames go in, normalized per-harmonic amplitude distributions come out.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import FrameError, InputError, ParameterError

SCHEMA_VERSION = 1

# dB (amplitude convention) to natural-log units, so that temperature 1
# reproduces proportionality to linear amplitude.
DB_TO_NAT = np.log(10.0) / 20.0

# Frames at or below this level are treated as silence.
SILENCE_FLOOR_DB = -80.0

F0_MIN_HZ = 10.0
F0_MAX_HZ = 4000.0


def _as_float_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise InputError(f"{name} must be non-empty")
    return arr


@dataclass(frozen=True)
class F0Trajectory:
    """Time-sampled fundamental-frequency control signal.

    ``values`` holds Hz per control frame; NaN marks a rest.  Sample i sits
    at time i / rate seconds.
    """

    rate: float
    values: np.ndarray

    def __post_init__(self):
        if self.rate <= 0:
            raise ParameterError("control rate must be > 0")
        arr = _as_float_array(self.values, "f0 values")
        voiced = arr[~np.isnan(arr)]
        if voiced.size and (np.any(voiced <= F0_MIN_HZ) or np.any(voiced >= F0_MAX_HZ)):
            raise ParameterError(
                f"voiced f0 values must lie in ({F0_MIN_HZ}, {F0_MAX_HZ}) Hz"
            )
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def duration(self) -> float:
        return len(self.values) / self.rate

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.values)) / self.rate

    @property
    def voiced_mask(self) -> np.ndarray:
        return ~np.isnan(self.values)

    def filled(self) -> np.ndarray:
        """Values with rests replaced by the nearest voiced sample.

        All-rest trajectories fill with a nominal 100 Hz so downstream
        phase accumulation stays defined (rests render silent anyway).
        """
        mask = self.voiced_mask
        if mask.all():
            return self.values.copy()
        if not mask.any():
            return np.full_like(self.values, 100.0)
        idx = np.arange(len(self.values))
        return np.interp(idx, idx[mask], self.values[mask])

    def at(self, t) -> np.ndarray:
        """Log-linearly interpolated f0 at arbitrary times (rests filled)."""
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        logf = np.log(self.filled())
        return np.exp(np.interp(t, self.times, logf))


@dataclass(frozen=True)
class HarmonicFrameSequence:
    """Per-frame log-magnitude vectors over harmonic indices 1..K (dB, relative)."""

    rate: float
    frames: np.ndarray  # shape (n_frames, K)

    def __post_init__(self):
        if self.rate <= 0:
            raise ParameterError("control rate must be > 0")
        arr = np.asarray(self.frames, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] < 1:
            raise InputError("frames must be a non-empty (n_frames, K) array with K >= 1")
        if not np.all(np.isfinite(arr)):
            raise FrameError("log-magnitudes must be finite; encode silence as the floor value")
        object.__setattr__(self, "frames", arr)

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def K(self) -> int:
        return self.frames.shape[1]

    @property
    def duration(self) -> float:
        return len(self.frames) / self.rate

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.frames)) / self.rate


_ALLOWED_SAMPLE_RATES = (44100, 48000, 96000)


@dataclass(frozen=True)
class SynthParams:
    """The six synthesis dials plus render settings."""

    onset_threshold: float = -40.0  # dBFS level above which a new note starts
    harmonics: int = 8
    harmonic_variation: float = 1.0  # softmax temperature, > 0
    odd_even_balance: float = 0.0  # -1 all-even .. +1 all-odd
    filter_cutoff: float = 8000.0
    filter_resonance: float = 0.707
    filter_keytrack: float = 0.0
    sample_rate: int = 48000
    attack: float = 0.005
    release: float = 0.08
    seed: int = 0
    onset_hysteresis: float = 3.0
    pitch_hold: bool = False  # freeze f0 at note onset instead of tracking

    def __post_init__(self):
        if self.harmonics < 1:
            raise ParameterError("harmonics must be >= 1")
        if self.harmonic_variation <= 0:
            raise ParameterError("harmonic_variation (temperature) must be > 0")
        if not -1.0 <= self.odd_even_balance <= 1.0:
            raise ParameterError("odd_even_balance must lie in [-1, 1]")
        if self.sample_rate not in _ALLOWED_SAMPLE_RATES:
            raise ParameterError(f"sample_rate must be one of {_ALLOWED_SAMPLE_RATES}")
        if not 20.0 < self.filter_cutoff < self.sample_rate / 2:
            raise ParameterError("filter_cutoff must lie in (20, sample_rate/2)")
        if self.filter_resonance < 0.5:
            raise ParameterError("filter_resonance (Q) must be >= 0.5")
        if not 0.0 <= self.filter_keytrack <= 1.0:
            raise ParameterError("filter_keytrack must lie in [0, 1]")
        if self.attack < 0 or self.release <= 0:
            raise ParameterError("attack must be >= 0 and release > 0")
        if self.onset_hysteresis < 0:
            raise ParameterError("onset_hysteresis must be >= 0")


@dataclass(frozen=True)
class AmplitudeFrame:
    """Normalized linear amplitudes per harmonic plus an overall frame gain.

    When ``frame_gain`` > 0 the amplitudes form a distribution (sum 1);
    degenerate frames carry a uniform placeholder with gain 0.
    """

    amplitudes: np.ndarray
    frame_gain: float = 1.0

    def __post_init__(self):
        arr = _as_float_array(self.amplitudes, "amplitudes")
        if np.any(arr < 0):
            raise FrameError("amplitudes must be non-negative")
        if self.frame_gain > 0 and abs(arr.sum() - 1.0) > 1e-9:
            raise FrameError("amplitudes must sum to 1 when frame_gain > 0")
        object.__setattr__(self, "amplitudes", arr)

    @property
    def K(self) -> int:
        return len(self.amplitudes)


def _uniform_placeholder(k: int) -> AmplitudeFrame:
    return AmplitudeFrame(np.full(k, 1.0 / k), frame_gain=0.0)


def harmonic_variation_transform(frame, temperature: float) -> AmplitudeFrame:
    """Softmax over dB magnitudes; the temperature dial.

    Lower temperatures sharpen the distribution toward the loudest
    harmonic, which is what makes the favored-harmonic movement audible.
    Temperature 1 reproduces proportionality to linear amplitude.
    """
    if temperature <= 0:
        raise ParameterError("temperature must be > 0")
    m_db = np.asarray(frame, dtype=np.float64)
    if m_db.size == 0:
        raise InputError("frame must be non-empty")
    if not np.all(np.isfinite(m_db)):
        raise FrameError("frame entries must be finite")
    peak_db = float(np.max(m_db))
    z = m_db * DB_TO_NAT / temperature
    z = z - z.max()  # shift-invariant; avoids overflow
    a = np.exp(z)
    a /= a.sum()
    gain = 0.0 if peak_db <= SILENCE_FLOOR_DB else float(10.0 ** (peak_db / 20.0))
    if gain == 0.0:
        return _uniform_placeholder(len(a))
    return AmplitudeFrame(a, frame_gain=gain)


def odd_even_balance(frame: AmplitudeFrame, balance: float) -> AmplitudeFrame:
    """Scale odd vs even harmonics; +1 keeps only odd, -1 only even."""
    if not -1.0 <= balance <= 1.0:
        raise ParameterError("balance must lie in [-1, 1]")
    k = np.arange(1, frame.K + 1)
    scale = np.where(k % 2 == 0, 1.0 - max(balance, 0.0), 1.0 - max(-balance, 0.0))
    a = frame.amplitudes * scale
    total = a.sum()
    if total <= 0:
        return _uniform_placeholder(frame.K)
    return AmplitudeFrame(a / total, frame_gain=frame.frame_gain)


def truncate_harmonics(frame: AmplitudeFrame, k_max: int) -> AmplitudeFrame:
    """Drop harmonics above index ``k_max`` and renormalize."""
    if k_max < 1:
        raise ParameterError("k_max must be >= 1")
    if k_max >= frame.K:
        return frame
    a = frame.amplitudes[:k_max]
    total = a.sum()
    if total <= 0:
        return _uniform_placeholder(k_max)
    return AmplitudeFrame(a / total, frame_gain=frame.frame_gain)


def _resample_times(n_src: int, src_rate: float, target_rate: float) -> np.ndarray:
    duration = (n_src - 1) / src_rate
    n_out = int(round(duration * target_rate)) + 1
    return np.arange(n_out) / target_rate


def resample_f0(traj: F0Trajectory, target_rate: float) -> F0Trajectory:
    """Resample log-linearly in frequency; rests propagate nearest-neighbor."""
    if target_rate <= 0:
        raise ParameterError("target_rate must be > 0")
    if target_rate == traj.rate:
        return traj
    t_out = _resample_times(len(traj), traj.rate, target_rate)
    values = traj.at(t_out)
    # a resampled point is a rest iff its nearest source sample is a rest
    nearest = np.clip(np.round(t_out * traj.rate).astype(int), 0, len(traj) - 1)
    values[~traj.voiced_mask[nearest]] = np.nan
    return F0Trajectory(rate=target_rate, values=values)


def resample_frames(seq: HarmonicFrameSequence, target_rate: float) -> HarmonicFrameSequence:
    """Resample linearly in dB per harmonic."""
    if target_rate <= 0:
        raise ParameterError("target_rate must be > 0")
    if target_rate == seq.rate:
        return seq
    t_out = _resample_times(len(seq), seq.rate, target_rate)
    out = np.empty((len(t_out), seq.K))
    for k in range(seq.K):
        out[:, k] = np.interp(t_out, seq.times, seq.frames[:, k])
    return HarmonicFrameSequence(rate=target_rate, frames=out)


def resample_controls(control, target_rate: float):
    """Dispatch resampling on the control type."""
    if isinstance(control, F0Trajectory):
        return resample_f0(control, target_rate)
    if isinstance(control, HarmonicFrameSequence):
        return resample_frames(control, target_rate)
    raise InputError(f"cannot resample {type(control).__name__}")


# ---------------------------------------------------------------------------
# JSON interchange: {"schema_version", "rate", "f0" (null = rest), "frames", "K"}
# ---------------------------------------------------------------------------

def controls_to_dict(f0: F0Trajectory, frames: HarmonicFrameSequence) -> dict:
    if f0.rate != frames.rate or len(f0) != len(frames):
        raise InputError("f0 and frames must share rate and length")
    f0_json = [None if np.isnan(v) else float(v) for v in f0.values]
    return {
        "schema_version": SCHEMA_VERSION,
        "rate": float(f0.rate),
        "f0": f0_json,
        "frames": frames.frames.tolist(),
        "K": frames.K,
    }


def controls_from_dict(doc: dict) -> tuple[F0Trajectory, HarmonicFrameSequence]:
    try:
        rate = float(doc["rate"])
        f0_values = np.array(
            [np.nan if v is None else float(v) for v in doc["f0"]], dtype=np.float64
        )
        frames = np.asarray(doc["frames"], dtype=np.float64)
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed control document: {exc}") from exc
    f0 = F0Trajectory(rate=rate, values=f0_values)
    seq = HarmonicFrameSequence(rate=rate, frames=frames)
    if "K" in doc and int(doc["K"]) != seq.K:
        raise InputError("declared K does not match frame width")
    if len(f0) != len(seq):
        raise InputError("f0 and frames must have equal length")
    return f0, seq


def controls_to_json(f0: F0Trajectory, frames: HarmonicFrameSequence) -> str:
    return json.dumps(controls_to_dict(f0, frames))


def controls_from_json(text: str) -> tuple[F0Trajectory, HarmonicFrameSequence]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from exc
    return controls_from_dict(doc)
