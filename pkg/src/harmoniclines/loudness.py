"""Equal-loudness weighting per ISO 226:2003.

The 29-anchor parameter table ships as an embedded, checksummed JSON
asset.  Set HF_DATA_DIR to a directory containing ``iso226_2003.json``
to override it (e.g. for auditing against a separately digitized copy).
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, InputError

PHON_MIN = 20.0
PHON_MAX = 80.0
FREQ_LO = 20.0
FREQ_HI = 12500.0
REFERENCE_HZ = 1000.0

# ISO 226:2003 Table 1: 29 one-third-octave anchors with the exponent
# a_f, the transfer-function magnitude L_U (dB) and the hearing
# threshold T_f (dB SPL).
ISO226_2003_JSON = """{
  "asset": "iso226-2003-parameters",
  "version": 1,
  "frequencies_hz": [20.0, 25.0, 31.5, 40.0, 50.0, 63.0, 80.0, 100.0, 125.0,
                     160.0, 200.0, 250.0, 315.0, 400.0, 500.0, 630.0, 800.0,
                     1000.0, 1250.0, 1600.0, 2000.0, 2500.0, 3150.0, 4000.0,
                     5000.0, 6300.0, 8000.0, 10000.0, 12500.0],
  "a_f": [0.532, 0.506, 0.480, 0.455, 0.432, 0.409, 0.387, 0.367, 0.349,
          0.330, 0.315, 0.301, 0.288, 0.276, 0.267, 0.259, 0.253, 0.250,
          0.246, 0.244, 0.243, 0.243, 0.243, 0.242, 0.242, 0.245, 0.254,
          0.271, 0.301],
  "L_U_db": [-31.6, -27.2, -23.0, -19.1, -15.9, -13.0, -10.3, -8.1, -6.2,
             -4.5, -3.1, -2.0, -1.1, -0.4, 0.0, 0.3, 0.5, 0.0, -2.7, -4.1,
             -1.0, 1.7, 2.5, 1.2, -2.1, -7.1, -11.2, -10.7, -3.1],
  "T_f_db": [78.5, 68.7, 59.5, 51.1, 44.0, 37.5, 31.5, 26.5, 22.1, 17.9,
             14.4, 11.4, 8.6, 6.2, 4.4, 3.0, 2.2, 2.4, 3.5, 1.7, -1.3,
             -4.2, -6.0, -5.4, -1.5, 6.0, 12.6, 13.9, 12.3]
}"""

ISO226_2003_SHA256 = "b69e52679f7a897dd50febf0411b51abbd38b2252c765f6b0d2af61e930d6bdd"


def asset_checksum(text: str = ISO226_2003_JSON) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@lru_cache(maxsize=1)
def load_parameter_table() -> dict:
    """Return the anchor table, honoring the HF_DATA_DIR override."""
    data_dir = os.environ.get("HF_DATA_DIR")
    if data_dir:
        path = os.path.join(data_dir, "iso226_2003.json")
        if os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
            table = json.loads(text)
        else:
            table = json.loads(ISO226_2003_JSON)
    else:
        if asset_checksum() != ISO226_2003_SHA256:
            raise InputError("embedded ISO 226 asset failed its checksum")
        table = json.loads(ISO226_2003_JSON)
    for key in ("frequencies_hz", "a_f", "L_U_db", "T_f_db"):
        if key not in table or len(table[key]) != 29:
            raise InputError(f"ISO 226 table missing or malformed field: {key}")
    return table


@dataclass(frozen=True)
class LoudnessContour:
    """SPL-vs-frequency curve along which pure tones sound equally loud."""

    phon_level: float
    anchor_frequencies: np.ndarray
    spl_values: np.ndarray


def _contour_spl(phon: float) -> tuple[np.ndarray, np.ndarray]:
    table = load_parameter_table()
    f = np.asarray(table["frequencies_hz"], dtype=np.float64)
    a_f = np.asarray(table["a_f"], dtype=np.float64)
    l_u = np.asarray(table["L_U_db"], dtype=np.float64)
    t_f = np.asarray(table["T_f_db"], dtype=np.float64)

    a_term = 4.47e-3 * (10.0 ** (0.025 * phon) - 1.15)
    b_term = (0.4 * 10.0 ** ((t_f + l_u) / 10.0 - 9.0)) ** a_f
    spl = (10.0 / a_f) * np.log10(a_term + b_term) - l_u + 94.0

    # By definition of the phon, SPL at 1 kHz equals the phon level; the
    # parametric fit lands within ~0.01 dB of that, so re-anchor exactly.
    i_ref = int(np.argmin(np.abs(f - REFERENCE_HZ)))
    spl = spl - (spl[i_ref] - phon)
    return f, spl


@lru_cache(maxsize=32)
def contour(phon_level: float) -> LoudnessContour:
    """Equal-loudness contour at the given phon level (20..80 phon)."""
    if not PHON_MIN <= phon_level <= PHON_MAX:
        raise DomainError(f"phon level must lie in [{PHON_MIN}, {PHON_MAX}]")
    f, spl = _contour_spl(float(phon_level))
    return LoudnessContour(
        phon_level=float(phon_level), anchor_frequencies=f, spl_values=spl
    )


@lru_cache(maxsize=32)
def _weight_spline(phon_level: float) -> CubicSpline:
    c = contour(phon_level)
    # weight = SPL(1 kHz) - SPL(f); cubic in log frequency through all anchors
    weight = c.phon_level - c.spl_values
    return CubicSpline(np.log(c.anchor_frequencies), weight)


def frequency_weights(frequencies, phon_level: float = 60.0) -> np.ndarray:
    """Per-frequency dB weight; 0 at 1 kHz, clamped flat outside 20 Hz..12.5 kHz."""
    spline = _weight_spline(float(phon_level))
    f = np.atleast_1d(np.asarray(frequencies, dtype=np.float64))
    clamped = np.clip(f, FREQ_LO, FREQ_HI)
    # guard f <= 0 (the DC bin of a spectrum): treated as the 20 Hz edge
    clamped[~(clamped > 0)] = FREQ_LO
    return spline(np.log(clamped))


def weight_spectrum(magnitudes_db, frequencies, phon_level: float = 60.0) -> np.ndarray:
    """Add the equal-loudness weight to a dB spectrum (pointwise, level-free)."""
    mags = np.asarray(magnitudes_db, dtype=np.float64)
    w = frequency_weights(frequencies, phon_level)
    return mags + w


def weighting_filter(
    phon_level: float = 60.0, sample_rate: int = 48000, numtaps: int = 4097
) -> np.ndarray:
    """Linear-phase FIR whose magnitude matches the weighting curve.

    For listening only; all analysis applies the weight to spectra instead.
    """
    from scipy.signal import firwin2

    nyq = sample_rate / 2.0
    grid = np.concatenate([[0.0], np.geomspace(FREQ_LO, nyq * 0.999, 256), [nyq]])
    gains_db = frequency_weights(grid, phon_level)
    gains = 10.0 ** (gains_db / 20.0)
    return firwin2(numtaps, grid / nyq, gains)


def apply_weighting_filter(samples, phon_level: float = 60.0, sample_rate: int = 48000):
    """Convolve audio with the weighting FIR, compensating the group delay."""
    from scipy.signal import fftconvolve

    taps = weighting_filter(phon_level, sample_rate)
    out = fftconvolve(np.asarray(samples, dtype=np.float64), taps, mode="full")
    delay = (len(taps) - 1) // 2
    return out[delay : delay + len(samples)]
