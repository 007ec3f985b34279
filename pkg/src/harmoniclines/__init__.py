"""Additive bass synthesis and psychoacoustic multi-line analysis.

Monophonic harmonic complex tones can carry two or more melodic lines at
once; this package renders such tones from f0 + per-harmonic magnitude
controls and quantifies the effect with equal-loudness-weighted spectral
analysis.
"""

__version__ = "0.1.0"

from .control import (
    AmplitudeFrame,
    F0Trajectory,
    HarmonicFrameSequence,
    SynthParams,
    harmonic_variation_transform,
    odd_even_balance,
    resample_controls,
    truncate_harmonics,
)
from .errors import (
    DomainError,
    FrameError,
    HarmonicLinesError,
    InputError,
    ParameterError,
)
from .synth import (
    AudioBuffer,
    NoteEvent,
    detect_onsets,
    lowpass_filter,
    normalize_peak,
    read_wav,
    render_additive,
    write_wav,
)
from .loudness import contour, frequency_weights, weight_spectrum
from .analysis import (
    MelodicLine,
    PartialTrack,
    PitchPercept,
    Spectrogram,
    estimate_f0,
    estimate_pitch_count,
    extract_melodic_lines,
    label_harmonics,
    stft,
    track_partials,
    transcribe,
    weight_spectrogram,
)
from .pipeline import analyze, render_scene, resolve_scene
