"""Spectral analysis: STFT, partial tracking, harmonic labeling,
melodic-line extraction and rule-based pitch-count estimation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import loudness
from .control import F0Trajectory
from .errors import InputError, ParameterError
from .synth import AudioBuffer

SCHEMA_VERSION = 1
DB_FLOOR = -120.0

A4_HZ = 440.0
NOTE_NAMES = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"]


@dataclass(frozen=True)
class Spectrogram:
    sample_rate: int
    window_size: int
    hop: int
    bins: np.ndarray  # Hz, uniform spacing sample_rate / window_size
    magnitudes: np.ndarray  # (n_frames, n_bins) dB re full scale

    @property
    def hop_seconds(self) -> float:
        return self.hop / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        # frame centers
        return (np.arange(len(self.magnitudes)) * self.hop + self.window_size / 2) / self.sample_rate

    @property
    def n_frames(self) -> int:
        return len(self.magnitudes)


def stft(
    audio: AudioBuffer,
    window_size: int = 4096,
    hop: int = 512,
    window: str = "hann",
) -> Spectrogram:
    """Magnitude STFT in dB re full scale (0 dB = unit-amplitude sine)."""
    if window_size & (window_size - 1) != 0:
        raise ParameterError("window_size must be a power of two")
    if hop > window_size or hop < 1:
        raise ParameterError("hop must lie in [1, window_size]")
    from scipy.signal import get_window

    w = get_window(window, window_size, fftbins=True)
    x = audio.samples
    n_frames = max(1, 1 + int(np.ceil((len(x) - window_size) / hop)))
    padded = np.zeros((n_frames - 1) * hop + window_size)
    padded[: len(x)] = x

    idx = np.arange(window_size)[None, :] + hop * np.arange(n_frames)[:, None]
    frames = padded[idx] * w
    spec = np.fft.rfft(frames, axis=1)
    amp = 2.0 * np.abs(spec) / w.sum()
    mags = 20.0 * np.log10(np.maximum(amp, 10.0 ** (DB_FLOOR / 20.0)))
    bins = np.fft.rfftfreq(window_size, 1.0 / audio.sample_rate)
    return Spectrogram(
        sample_rate=audio.sample_rate,
        window_size=window_size,
        hop=hop,
        bins=bins,
        magnitudes=mags,
    )


def weight_spectrogram(spec: Spectrogram, phon_level: float = 60.0) -> Spectrogram:
    """Equal-loudness weighted copy of a spectrogram."""
    weighted = loudness.weight_spectrum(spec.magnitudes, spec.bins, phon_level)
    return Spectrogram(
        sample_rate=spec.sample_rate,
        window_size=spec.window_size,
        hop=spec.hop,
        bins=spec.bins,
        magnitudes=weighted,
    )


@dataclass
class PartialTrack:
    frame_indices: list = field(default_factory=list)
    times: list = field(default_factory=list)
    frequencies: list = field(default_factory=list)
    levels_db: list = field(default_factory=list)
    harmonic_index: int | None = None
    inharmonicity_cents: float = 0.0

    def __len__(self) -> int:
        return len(self.times)

    @property
    def mean_frequency(self) -> float:
        return float(np.mean(self.frequencies))

    @property
    def duration(self) -> float:
        return self.times[-1] - self.times[0] if len(self) > 1 else 0.0


def _frame_peaks(mags: np.ndarray, bins: np.ndarray, floor_db: float):
    """Local maxima above the floor, refined by 3-bin parabolic interpolation."""
    c = mags[1:-1]
    is_peak = (c > mags[:-2]) & (c >= mags[2:]) & (c > floor_db)
    out = []
    bin_hz = bins[1] - bins[0]
    for i in np.nonzero(is_peak)[0] + 1:
        a, b, cc = mags[i - 1], mags[i], mags[i + 1]
        denom = a - 2 * b + cc
        delta = 0.5 * (a - cc) / denom if denom != 0 else 0.0
        delta = float(np.clip(delta, -0.5, 0.5))
        freq = bins[i] + delta * bin_hz
        level = b - 0.25 * (a - cc) * delta
        if freq > 0:
            out.append((freq, float(level)))
    return out


def track_partials(
    spec: Spectrogram,
    peak_floor: float = -80.0,
    max_jump: float = 30.0,
    min_duration: float = 0.05,
) -> list[PartialTrack]:
    """Greedy nearest-frequency linking of per-frame spectral peaks."""
    if not np.isfinite(peak_floor) or not np.isfinite(max_jump):
        raise ParameterError("thresholds must be finite")
    times = spec.times
    active: list[PartialTrack] = []
    done: list[PartialTrack] = []
    for fi in range(spec.n_frames):
        peaks = _frame_peaks(spec.magnitudes[fi], spec.bins, peak_floor)
        # candidate (track, peak) pairs sorted by frequency distance
        pairs = []
        for ti, tr in enumerate(active):
            last_f = tr.frequencies[-1]
            for pi, (pf, _) in enumerate(peaks):
                d = abs(pf - last_f)
                if d <= max_jump:
                    pairs.append((d, ti, pi))
        pairs.sort()
        used_t, used_p = set(), set()
        for d, ti, pi in pairs:
            if ti in used_t or pi in used_p:
                continue
            used_t.add(ti)
            used_p.add(pi)
            pf, pl = peaks[pi]
            tr = active[ti]
            tr.frame_indices.append(fi)
            tr.times.append(float(times[fi]))
            tr.frequencies.append(pf)
            tr.levels_db.append(pl)
        still_active = [tr for ti, tr in enumerate(active) if ti in used_t]
        done.extend(tr for ti, tr in enumerate(active) if ti not in used_t)
        for pi, (pf, pl) in enumerate(peaks):
            if pi in used_p:
                continue
            still_active.append(
                PartialTrack(
                    frame_indices=[fi],
                    times=[float(times[fi])],
                    frequencies=[pf],
                    levels_db=[pl],
                )
            )
        active = still_active
    done.extend(active)
    return [tr for tr in done if tr.duration >= min_duration or len(tr) * spec.hop_seconds >= min_duration]


def nearest_harmonic_cents(freq: float, f0: float) -> tuple[int, float]:
    """Nearest integer multiple of f0 in cents distance, with the signed offset."""
    ratio = freq / f0
    candidates = {max(1, int(np.floor(ratio))), max(1, int(np.ceil(ratio)))}
    best = min(candidates, key=lambda h: abs(1200.0 * np.log2(ratio / h)))
    return best, float(1200.0 * np.log2(ratio / best))


def label_harmonics(
    tracks: list[PartialTrack],
    f0: F0Trajectory,
    tolerance_cents: float = 35.0,
) -> list[PartialTrack]:
    """Assign harmonic indices against the reference f0 trajectory (in place)."""
    for tr in tracks:
        if not len(tr):
            continue
        f0_at = f0.at(np.asarray(tr.times))
        cents = []
        indices = []
        for f_track, f_base in zip(tr.frequencies, f0_at):
            h, c = nearest_harmonic_cents(f_track, float(f_base))
            indices.append(h)
            cents.append(c)
        h_med = int(np.median(indices))
        c_med = float(np.median(cents))
        if abs(c_med) <= tolerance_cents:
            tr.harmonic_index = h_med
            tr.inharmonicity_cents = c_med
        else:
            tr.harmonic_index = None
            tr.inharmonicity_cents = c_med
    return tracks


def measure_harmonic_levels(spec: Spectrogram, f0: F0Trajectory, K: int) -> np.ndarray:
    """Per-frame dB level of each harmonic, read from the spectrogram.

    Independent measurement path used to cross-check the synthesis
    amplitudes.  Returns shape (n_frames, K); missing or out-of-band
    harmonics read as the dB floor.
    """
    out = np.full((spec.n_frames, K), DB_FLOOR)
    bin_hz = spec.bins[1] - spec.bins[0]
    f0_at = f0.at(spec.times)
    nyq = spec.sample_rate / 2.0
    for fi in range(spec.n_frames):
        mags = spec.magnitudes[fi]
        for k in range(1, K + 1):
            target = k * float(f0_at[fi])
            if target >= nyq:
                continue
            i = int(round(target / bin_hz))
            lo, hi = max(i - 2, 1), min(i + 3, len(mags) - 1)
            if hi <= lo:
                continue
            j = lo + int(np.argmax(mags[lo:hi]))
            a, b, c = mags[j - 1], mags[j], mags[j + 1]
            denom = a - 2 * b + c
            delta = 0.5 * (a - c) / denom if denom != 0 else 0.0
            delta = float(np.clip(delta, -0.5, 0.5))
            out[fi, k - 1] = b - 0.25 * (a - c) * delta
    return out


@dataclass(frozen=True)
class LineSegment:
    start: float
    end: float
    pitch_hz: float
    mean_level_db: float


@dataclass(frozen=True)
class MelodicLine:
    segments: tuple
    harmonic_index: int | None

    @property
    def start(self) -> float:
        return self.segments[0].start

    @property
    def end(self) -> float:
        return self.segments[-1].end

    def active_at(self, t: float) -> bool:
        return any(s.start <= t <= s.end for s in self.segments)


def _runs(mask: np.ndarray):
    """Yield (start, end) index pairs of True runs; end is exclusive."""
    padded = np.concatenate([[False], mask, [False]])
    edges = np.diff(padded.astype(int))
    starts = np.nonzero(edges == 1)[0]
    ends = np.nonzero(edges == -1)[0]
    return list(zip(starts, ends))


def extract_melodic_lines(
    tracks: list[PartialTrack],
    weighted: Spectrogram,
    audibility_margin: float = 20.0,
    min_duration: float = 0.15,
    absolute_floor: float = -60.0,
    merge_gap: float = 0.2,
) -> list[MelodicLine]:
    """Promote individually audible track segments to melodic lines.

    A track frame is audible when its weighted level is within
    ``audibility_margin`` dB of the frame-maximum weighted level and
    above the absolute floor.  Runs shorter than ``min_duration`` are
    dropped; consecutive runs on the same harmonic index merge when the
    gap between them is at most ``merge_gap`` seconds.
    """
    frame_max = weighted.magnitudes.max(axis=1)
    per_index: dict = {}
    for tr in tracks:
        if not len(tr):
            continue
        levels = np.asarray(tr.levels_db)
        fidx = np.asarray(tr.frame_indices, dtype=int)
        audible = (levels >= frame_max[fidx] - audibility_margin) & (
            levels >= absolute_floor
        )
        for i0, i1 in _runs(audible):
            start, end = tr.times[i0], tr.times[i1 - 1]
            if end - start < min_duration:
                continue
            seg = LineSegment(
                start=float(start),
                end=float(end),
                pitch_hz=float(np.mean(np.asarray(tr.frequencies)[i0:i1])),
                mean_level_db=float(np.mean(levels[i0:i1])),
            )
            per_index.setdefault(tr.harmonic_index, []).append(seg)

    lines = []
    for h_index, segs in per_index.items():
        segs.sort(key=lambda s: s.start)
        merged: list[list[LineSegment]] = [[segs[0]]]
        for seg in segs[1:]:
            if seg.start - merged[-1][-1].end <= merge_gap:
                merged[-1].append(seg)
            else:
                merged.append([seg])
        for group in merged:
            lines.append(MelodicLine(segments=tuple(group), harmonic_index=h_index))
    lines.sort(key=lambda ln: ln.start)
    return lines


@dataclass(frozen=True)
class PitchPercept:
    start: float
    end: float
    estimated_pitch_count: int
    triggered_rules: tuple  # subset of ("A", "B", "C")

    def __post_init__(self):
        if self.estimated_pitch_count < 1:
            raise ParameterError("pitch count must be >= 1")
        if self.estimated_pitch_count > 1 and not self.triggered_rules:
            raise ParameterError("count > 1 requires at least one triggered rule")


def concurrent_line_counts(lines, times) -> np.ndarray:
    """Number of melodic lines active at each query time."""
    counts = np.zeros(len(times), dtype=int)
    for i, t in enumerate(times):
        counts[i] = sum(1 for ln in lines if ln.active_at(float(t)))
    return counts


def estimate_pitch_count(
    lines: list[MelodicLine],
    tracks: list[PartialTrack],
    f0: F0Trajectory,
    spec: Spectrogram | None = None,
    strength_window: float = 10.0,
    spacing_tolerance: float = 0.1,
    inharmonicity_threshold: float = 50.0,
) -> list[PitchPercept]:
    """Rule-based perceived-pitch-count estimate over the voiced span.

    Rule A: two or more simultaneously audible melodic lines.
    Rule B: lowest strong partial is an odd harmonic >= 3 with strong
    partials spaced about twice the fundamental.
    Rule C: a strong partial deviates from its harmonic slot by more
    than the inharmonicity threshold.
    """
    if not tracks and not lines:
        return []
    voiced = f0.voiced_mask
    if not voiced.any():
        return []
    t_voiced = f0.times[voiced]
    span = (float(t_voiced[0]), float(t_voiced[-1] + 1.0 / f0.rate))

    # frame grid and frame-max level derived from the tracked partials
    all_times = sorted({t for tr in tracks for t in tr.times})
    rules = []

    counts = concurrent_line_counts(lines, np.asarray(all_times)) if all_times else np.array([0])
    rule_a_count = int(counts.max()) if counts.size else 0
    if rule_a_count >= 2:
        rules.append("A")

    rule_b_hits = 0
    rule_b_total = 0
    rule_c = False
    for t in all_times:
        at_frame = [
            (tr, tr.times.index(t))
            for tr in tracks
            if t in tr.times
        ]
        if not at_frame:
            continue
        levels = np.array([tr.levels_db[i] for tr, i in at_frame])
        frame_max = levels.max()
        strong = [
            (tr, i)
            for (tr, i), lv in zip(at_frame, levels)
            if lv >= frame_max - strength_window
        ]
        if not strong:
            continue
        for tr, i in strong:
            if tr.harmonic_index is None and abs(tr.inharmonicity_cents) > inharmonicity_threshold:
                rule_c = True
        f0_t = float(f0.at(t)[0])
        freqs = sorted(tr.frequencies[i] for tr, i in strong)
        rule_b_total += 1
        lowest = strong[int(np.argmin([tr.frequencies[i] for tr, i in strong]))]
        h_low = lowest[0].harmonic_index
        if h_low is None or h_low < 3 or h_low % 2 == 0:
            continue
        if len(freqs) >= 2:
            spacings = np.diff(freqs)
            ok = np.all(np.abs(spacings - 2.0 * f0_t) <= spacing_tolerance * 2.0 * f0_t)
            if ok:
                rule_b_hits += 1
    rule_b = rule_b_total > 0 and rule_b_hits / rule_b_total >= 0.5
    if rule_b:
        rules.append("B")
    if rule_c:
        rules.append("C")

    count = max(rule_a_count, 1)
    if (rule_b or rule_c) and count < 2:
        count = 2
    return [
        PitchPercept(
            start=span[0],
            end=span[1],
            estimated_pitch_count=count,
            triggered_rules=tuple(rules),
        )
    ]


# ---------------------------------------------------------------------------
# Transcription
# ---------------------------------------------------------------------------

def pitch_to_note(freq: float) -> tuple[str, float]:
    """Nearest equal-tempered note name (A4 = 440) and cents offset."""
    midi = 69.0 + 12.0 * np.log2(freq / A4_HZ)
    nearest = int(round(midi))
    name = NOTE_NAMES[nearest % 12] + str(nearest // 12 - 1)
    return name, float((midi - nearest) * 100.0)


def transcribe(lines: list[MelodicLine], quantize: bool = True) -> dict:
    """Serialize melodic lines as ordered voices; round-trips losslessly."""
    def sort_key(ln):
        return (ln.harmonic_index if ln.harmonic_index is not None else 10**6, ln.start)

    voices = []
    for ln in sorted(lines, key=sort_key):
        segments = []
        for seg in ln.segments:
            entry = {
                "start": seg.start,
                "end": seg.end,
                "pitch_hz": seg.pitch_hz,
                "mean_level_db": seg.mean_level_db,
            }
            if quantize:
                note, cents = pitch_to_note(seg.pitch_hz)
                entry["note"] = note
                entry["cents_offset"] = round(cents, 2)
            segments.append(entry)
        voices.append({"harmonic_index": ln.harmonic_index, "segments": segments})
    return {"schema_version": SCHEMA_VERSION, "quantized": bool(quantize), "voices": voices}


def transcription_to_lines(doc: dict) -> list[MelodicLine]:
    lines = []
    for voice in doc.get("voices", []):
        segs = tuple(
            LineSegment(
                start=s["start"],
                end=s["end"],
                pitch_hz=s["pitch_hz"],
                mean_level_db=s["mean_level_db"],
            )
            for s in voice["segments"]
        )
        lines.append(MelodicLine(segments=segs, harmonic_index=voice["harmonic_index"]))
    return lines


# ---------------------------------------------------------------------------
# f0 estimation by subharmonic summation (for audio without f0 metadata)
# ---------------------------------------------------------------------------

def estimate_f0(
    spec: Spectrogram,
    f_min: float = 30.0,
    f_max: float = 500.0,
    n_harmonics: int = 10,
    decay: float = 0.84,
    voicing_floor_db: float = -70.0,
) -> F0Trajectory:
    """Frame-wise subharmonic summation over a 5-cent candidate grid.

    The coarse grid pick is refined by a magnitude-weighted average of
    parabolic partial-peak frequencies divided by their harmonic index.
    """
    n_cands = int(np.ceil(1200.0 * np.log2(f_max / f_min) / 5.0)) + 1
    candidates = f_min * 2.0 ** (np.arange(n_cands) * 5.0 / 1200.0)
    harm = np.arange(1, n_harmonics + 1)
    weights = decay ** (harm - 1)
    query = candidates[:, None] * harm[None, :]  # (n_cands, H)

    bin_hz = spec.bins[1] - spec.bins[0]
    values = np.full(spec.n_frames, np.nan)
    for fi in range(spec.n_frames):
        mags = spec.magnitudes[fi]
        if mags.max() < voicing_floor_db:
            continue
        lin = 10.0 ** (mags / 20.0)
        sampled = np.interp(query.ravel(), spec.bins, lin).reshape(query.shape)
        scores = sampled @ weights
        best = int(np.argmax(scores))
        f0_coarse = candidates[best]
        # refine against measured partial peaks
        num, den = 0.0, 0.0
        for k in harm:
            target = k * f0_coarse
            if target >= spec.sample_rate / 2.0:
                break
            i = int(round(target / bin_hz))
            if i < 1 or i + 1 >= len(mags):
                continue
            lo, hi = max(i - 2, 1), min(i + 3, len(mags) - 1)
            j = lo + int(np.argmax(mags[lo:hi]))
            a, b, c = mags[j - 1], mags[j], mags[j + 1]
            denom = a - 2 * b + c
            delta = 0.5 * (a - c) / denom if denom != 0 else 0.0
            freq = (j + float(np.clip(delta, -0.5, 0.5))) * bin_hz
            if abs(1200.0 * np.log2(freq / target)) > 60.0:
                continue
            w = 10.0 ** (b / 20.0)
            num += w * freq / k
            den += w
        values[fi] = num / den if den > 0 else f0_coarse
    rate = 1.0 / spec.hop_seconds
    return F0Trajectory(rate=rate, values=values)


# ---------------------------------------------------------------------------
# Analysis document + PPM rendering
# ---------------------------------------------------------------------------

def analysis_document(
    f0: F0Trajectory,
    tracks: list[PartialTrack],
    lines: list[MelodicLine],
    percepts: list[PitchPercept],
    params: dict,
    weighted: Spectrogram | None = None,
) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "params": params,
        "f0": {
            "rate": f0.rate,
            "values": [None if np.isnan(v) else round(float(v), 4) for v in f0.values],
        },
        "tracks": [
            {
                "harmonic_index": tr.harmonic_index,
                "inharmonicity_cents": round(tr.inharmonicity_cents, 2),
                "times": [round(t, 5) for t in tr.times],
                "frequencies": [round(f, 3) for f in tr.frequencies],
                "levels_db": [round(l, 2) for l in tr.levels_db],
            }
            for tr in tracks
        ],
        "lines": transcribe(lines)["voices"],
        "percepts": [
            {
                "start": round(p.start, 4),
                "end": round(p.end, 4),
                "estimated_pitch_count": p.estimated_pitch_count,
                "triggered_rules": list(p.triggered_rules),
            }
            for p in percepts
        ],
    }
    if weighted is not None:
        doc["spectrogram"] = {
            "hop_seconds": weighted.hop_seconds,
            "window_size": weighted.window_size,
            "bin_hz": float(weighted.bins[1] - weighted.bins[0]),
            "magnitudes_db": np.round(weighted.magnitudes, 1).tolist(),
        }
    return doc


# Colormap: linear interpolation through five anchors from black via
# purple and orange to pale yellow (documented for golden-file tests).
_CMAP_ANCHORS = np.array(
    [[0, 0, 4], [81, 18, 124], [183, 55, 121], [252, 137, 97], [252, 255, 164]],
    dtype=np.float64,
)


def colormap(values: np.ndarray) -> np.ndarray:
    """Map values in [0, 1] to RGB uint8 via the package colormap."""
    v = np.clip(values, 0.0, 1.0) * (len(_CMAP_ANCHORS) - 1)
    i = np.minimum(v.astype(int), len(_CMAP_ANCHORS) - 2)
    frac = (v - i)[..., None]
    rgb = _CMAP_ANCHORS[i] * (1 - frac) + _CMAP_ANCHORS[i + 1] * frac
    return np.round(rgb).astype(np.uint8)


def spectrogram_to_ppm(
    spec: Spectrogram,
    lines: list[MelodicLine] | None = None,
    db_range: tuple[float, float] = (-90.0, 0.0),
    max_frequency: float = 5000.0,
) -> bytes:
    """Render a P6 PPM image (low frequencies at the bottom).

    Melodic-line overlays are drawn in pure yellow (255, 255, 0) at each
    segment's pitch frequency.
    """
    keep = spec.bins <= max_frequency
    mags = spec.magnitudes[:, keep]
    bins = spec.bins[keep]
    lo, hi = db_range
    norm = (mags - lo) / (hi - lo)
    img = colormap(norm.T[::-1])  # rows: high freq at top
    n_rows, n_cols = img.shape[0], img.shape[1]
    bin_hz = bins[1] - bins[0]
    times = spec.times
    if lines:
        for ln in lines:
            for seg in ln.segments:
                row_f = int(round(seg.pitch_hz / bin_hz))
                if row_f >= n_rows:
                    continue
                row = n_rows - 1 - row_f
                cols = np.nonzero((times >= seg.start) & (times <= seg.end))[0]
                img[row, cols] = (255, 255, 0)
    header = f"P6\n{n_cols} {n_rows}\n255\n".encode()
    return header + img.tobytes()
