"""Deterministic content generators: procedural stand-ins for model
output plus reproductions of the analysis fixtures."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .control import F0Trajectory, HarmonicFrameSequence, SILENCE_FLOOR_DB
from .errors import ParameterError

DEFAULT_CONTROL_RATE = 50.0

# Stand-in mode table inspired by commercial "mode" presets in which
# particular upper harmonics are selectively amplified; not a
# reproduction of any product's spectra.
WOOFER_MODE_BOOSTS = {
    1: (),
    2: (2,),
    3: (3,),
    4: (4,),
    5: (5,),
    6: (2, 4),
    7: (3, 5),
}
WOOFER_BOOST_DB = 15.0
FAVORITE_BOOST_DB = 18.0


@dataclass(frozen=True)
class PresetSpec:
    name: str
    duration: float
    f0_program: dict
    frame_program: dict
    seed: int = 0

    def __post_init__(self):
        if self.duration <= 0:
            raise ParameterError("duration must be > 0")


@dataclass(frozen=True)
class RenderDirective:
    """Frames plus per-partial detunings honored at render time."""

    frames: HarmonicFrameSequence
    detune_cents: dict = field(default_factory=dict)


def _rolloff_db(K: int) -> np.ndarray:
    """1/k amplitude baseline in dB."""
    k = np.arange(1, K + 1)
    return -20.0 * np.log10(k)


def _n_frames(duration: float, rate: float) -> int:
    return max(2, int(round(duration * rate)))


def generate_wandering_favorite(
    K: int = 8,
    favorite_period: float = 1.0,
    favored_set=(3, 5),
    seed: int = 0,
    duration: float = 8.0,
    rate: float = DEFAULT_CONTROL_RATE,
    crossfade: float = 0.05,
) -> HarmonicFrameSequence:
    """Seeded random walk that boosts one favored harmonic at a time.

    Each favorite holds for about ``favorite_period`` seconds at +18 dB
    over the 1/k baseline; switches crossfade over 50 ms.
    """
    favored = sorted(set(int(h) for h in favored_set))
    if not favored:
        raise ParameterError("favored_set must be non-empty")
    if any(h < 1 or h > K for h in favored):
        raise ParameterError("favored_set must be a subset of 1..K")
    rng = np.random.default_rng(seed)
    n = _n_frames(duration, rate)
    baseline = _rolloff_db(K)

    # per-frame boost weights for each favored harmonic, crossfaded
    boost = np.zeros((n, K))
    current = int(rng.choice(favored))
    hold = max(2, int(round(favorite_period * rate)))
    fade = max(1, int(round(crossfade * rate)))
    i = 0
    while i < n:
        j = min(i + hold, n)
        boost[i:j, current - 1] = 1.0
        if j < n and len(favored) > 1:
            choices = [h for h in favored if h != current]
            nxt = int(rng.choice(choices))
            ramp = np.linspace(0.0, 1.0, min(fade, n - j), endpoint=False)
            boost[j : j + len(ramp), current - 1] = 1.0 - ramp
            boost[j : j + len(ramp), nxt - 1] = ramp
            i = j + len(ramp)
            current = nxt
        else:
            i = j
    frames = baseline[None, :] + FAVORITE_BOOST_DB * boost
    return HarmonicFrameSequence(rate=rate, frames=frames)


def generate_odd_weak_fundamental(
    K: int = 9,
    fundamental_attenuation: float = 40.0,
    duration: float = 4.0,
    rate: float = DEFAULT_CONTROL_RATE,
) -> HarmonicFrameSequence:
    """Odd harmonics on a 1/k baseline, evens at the floor, weak fundamental."""
    if fundamental_attenuation < 0:
        raise ParameterError("fundamental_attenuation must be >= 0")
    frame = np.full(K, SILENCE_FLOOR_DB)
    base = _rolloff_db(K)
    k = np.arange(1, K + 1)
    odd = k % 2 == 1
    frame[odd] = base[odd]
    frame[0] = -fundamental_attenuation
    n = _n_frames(duration, rate)
    return HarmonicFrameSequence(rate=rate, frames=np.tile(frame, (n, 1)))


def generate_full_series(
    K: int = 9,
    rolloff_db_per_octave: float = 6.0,
    duration: float = 4.0,
    rate: float = DEFAULT_CONTROL_RATE,
) -> HarmonicFrameSequence:
    """Strong-fundamental control: full series with a smooth rolloff."""
    k = np.arange(1, K + 1)
    frame = -rolloff_db_per_octave * np.log2(k)
    n = _n_frames(duration, rate)
    return HarmonicFrameSequence(rate=rate, frames=np.tile(frame, (n, 1)))


def generate_woofer_modes(
    mode: int,
    K: int = 10,
    duration: float = 4.0,
    rate: float = DEFAULT_CONTROL_RATE,
) -> HarmonicFrameSequence:
    """Dark baseline with the mode's harmonic set boosted by +15 dB."""
    if mode not in WOOFER_MODE_BOOSTS:
        raise ParameterError("mode must lie in 1..7")
    k = np.arange(1, K + 1)
    frame = -12.0 * np.log2(k)  # dark 808-style rolloff
    for h in WOOFER_MODE_BOOSTS[mode]:
        frame[h - 1] += WOOFER_BOOST_DB
    n = _n_frames(duration, rate)
    return HarmonicFrameSequence(rate=rate, frames=np.tile(frame, (n, 1)))


POWER_CHORD_LEVELS_DB = {1: 0.0, 2: -1.5, 3: -3.0, 4: -4.5, 6: -7.5}


def generate_power_chord(
    f0_hz: float = 110.0,
    K: int = 10,
    duration: float = 3.0,
    rate: float = DEFAULT_CONTROL_RATE,
) -> HarmonicFrameSequence:
    """Distortion-style spectrum with strong harmonics {1, 2, 3, 4, 6}."""
    if not 60.0 <= f0_hz <= 250.0:
        raise ParameterError("power-chord f0 must lie in 60..250 Hz")
    frame = np.full(K, -30.0)
    for h, level in POWER_CHORD_LEVELS_DB.items():
        if h <= K:
            frame[h - 1] = level
    n = _n_frames(duration, rate)
    return HarmonicFrameSequence(rate=rate, frames=np.tile(frame, (n, 1)))


def generate_inharmonic_variant(
    base: HarmonicFrameSequence, detune_index: int, detune_cents: float
) -> RenderDirective:
    """Mark one partial for a fixed detuning at render time."""
    if detune_index < 2 or detune_index > base.K:
        raise ParameterError("detune_index must lie in 2..K")
    detune = {} if detune_cents == 0 else {int(detune_index): float(detune_cents)}
    return RenderDirective(frames=base, detune_cents=detune)


# ---------------------------------------------------------------------------
# f0 programs
# ---------------------------------------------------------------------------

def f0_constant(hz: float, duration: float, rate: float = DEFAULT_CONTROL_RATE) -> F0Trajectory:
    n = _n_frames(duration, rate)
    return F0Trajectory(rate=rate, values=np.full(n, float(hz)))


def f0_glissando(
    start_hz: float, end_hz: float, duration: float, rate: float = DEFAULT_CONTROL_RATE
) -> F0Trajectory:
    n = _n_frames(duration, rate)
    values = np.exp(np.linspace(np.log(start_hz), np.log(end_hz), n))
    return F0Trajectory(rate=rate, values=values)


def f0_steps(
    steps, rate: float = DEFAULT_CONTROL_RATE, gap: float = 0.0
) -> F0Trajectory:
    """Step melody from (hz | None, duration) pairs; ``gap`` inserts rests."""
    chunks = []
    for hz, dur in steps:
        n = max(1, int(round(dur * rate)))
        chunks.append(np.full(n, np.nan if hz is None else float(hz)))
        if gap > 0:
            chunks.append(np.full(max(1, int(round(gap * rate))), np.nan))
    values = np.concatenate(chunks)
    if len(values) < 2:
        values = np.concatenate([values, values])
    return F0Trajectory(rate=rate, values=values)


# ---------------------------------------------------------------------------
# Registry: name -> default scene document (see pipeline.render_scene)
# ---------------------------------------------------------------------------

def _preset_scene(name: str, frames: dict, f0: dict, duration: float, params: dict | None = None) -> dict:
    return {
        "schema_version": 1,
        "name": name,
        "duration": duration,
        "f0": f0,
        "frames": frames,
        "params": params or {},
    }


def registry() -> dict[str, dict]:
    presets = {
        "wandering-favorite": _preset_scene(
            "wandering-favorite",
            frames={"generator": "wandering_favorite",
                    "args": {"K": 8, "favored_set": [3, 5], "favorite_period": 1.0, "seed": 1}},
            f0={"program": "constant", "hz": 160.0},
            duration=8.0,
            params={
                "harmonic_variation": 0.7,
                "odd_even_balance": 0.5,
                "filter_cutoff": 4000.0,
            },
        ),
        "odd-weak-fundamental": _preset_scene(
            "odd-weak-fundamental",
            frames={"generator": "odd_weak_fundamental",
                    "args": {"K": 9, "fundamental_attenuation": 40.0}},
            f0={"program": "constant", "hz": 110.0},
            duration=4.0,
            params={"harmonics": 9, "filter_cutoff": 4000.0},
        ),
        "full-series": _preset_scene(
            "full-series",
            frames={"generator": "full_series",
                    "args": {"K": 9, "rolloff_db_per_octave": 24.0}},
            f0={"program": "constant", "hz": 110.0},
            duration=4.0,
            params={"harmonics": 9, "filter_cutoff": 400.0},
        ),
        "power-chord": _preset_scene(
            "power-chord",
            frames={"generator": "power_chord", "args": {"f0_hz": 110.0, "K": 10}},
            f0={"program": "constant", "hz": 110.0},
            duration=3.0,
            params={"harmonics": 10, "filter_cutoff": 4000.0},
        ),
    }
    for mode in range(1, 8):
        presets[f"woofer-mode-{mode}"] = _preset_scene(
            f"woofer-mode-{mode}",
            frames={"generator": "woofer_modes", "args": {"mode": mode, "K": 10}},
            f0={"program": "constant", "hz": 98.0},
            duration=4.0,
            params={"harmonics": 10, "filter_cutoff": 4000.0},
        )
    return presets


GENERATORS = {
    "wandering_favorite": generate_wandering_favorite,
    "odd_weak_fundamental": generate_odd_weak_fundamental,
    "full_series": generate_full_series,
    "woofer_modes": generate_woofer_modes,
    "power_chord": generate_power_chord,
}


# Dial metadata served to UIs so controls can be built generically.
DIAL_METADATA = [
    {"name": "onset_threshold", "unit": "dBFS", "min": -80.0, "max": 0.0, "default": -40.0},
    {"name": "harmonics", "unit": "count", "min": 1, "max": 32, "default": 8},
    {"name": "harmonic_variation", "unit": "temperature", "min": 0.05, "max": 8.0, "default": 1.0},
    {"name": "odd_even_balance", "unit": "ratio", "min": -1.0, "max": 1.0, "default": 0.0},
    {"name": "filter_cutoff", "unit": "Hz", "min": 30.0, "max": 16000.0, "default": 8000.0},
    {"name": "filter_resonance", "unit": "Q", "min": 0.5, "max": 12.0, "default": 0.707},
    {"name": "filter_keytrack", "unit": "ratio", "min": 0.0, "max": 1.0, "default": 0.0},
]
