"""How many pitches does one tone have?

Compares three spectra at the same fundamental and shows how the
rule-based estimator decides when a single tone is heard as more than
one pitch:

  * full-series control     -> 1 pitch (nothing unusual)
  * odd harmonics, weak f0  -> 2+ pitches (Rule B: the lowest strong
                               partial is an odd harmonic >= 3, spaced
                               by twice the missing fundamental)
  * detuned 4th harmonic    -> 2+ pitches (Rule C: a strong partial
                               sits 80 cents off its harmonic slot and
                               segregates from the complex)
"""

from harmoniclines import pipeline


def describe(title, scene, audibility_margin=20.0):
    resolved = pipeline.resolve_scene(scene)
    audio = pipeline.render(resolved)
    result = pipeline.analyze(
        audio,
        f0_hint=resolved.f0,
        audibility_margin=audibility_margin,
        include_spectrogram=False,
    )
    p = result.percepts[0]
    rules = ", ".join(p.triggered_rules) if p.triggered_rules else "none"
    print(f"{title}")
    print(f"  estimated pitch count: {p.estimated_pitch_count}   rules triggered: {rules}")
    print(f"  melodic lines on harmonics: {sorted(ln.harmonic_index for ln in result.lines if ln.harmonic_index)}")
    print()


def main():
    describe(
        "full series, strong fundamental (control)",
        {"preset": "full-series"},
        audibility_margin=10.0,
    )
    describe(
        "odd harmonics only, fundamental attenuated 40 dB",
        {"preset": "odd-weak-fundamental"},
        audibility_margin=10.0,
    )
    describe(
        "4th harmonic detuned +80 cents",
        {
            "duration": 3.0,
            "f0": {"program": "constant", "hz": 110.0},
            "frames": {"generator": "full_series", "args": {"K": 6, "rolloff_db_per_octave": 3.0}},
            "params": {"harmonics": 6, "filter_cutoff": 4000.0},
            "detune_cents": {"4": 80.0},
        },
    )


if __name__ == "__main__":
    main()
