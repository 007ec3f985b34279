"""Batch entry point: render scenes/presets to WAV, analyze WAV files,
print the embedded loudness tables, launch the service.

Exit codes: 0 success, 2 input error, 3 environment error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import loudness, pipeline, presets
from .errors import HarmonicLinesError
from .synth import read_wav

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ENV = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="harmoniclines",
        description="Render harmonic-complex-tone scenes and analyze their melodic lines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_render = sub.add_parser("render", help="render a scene or preset to WAV")
    src = p_render.add_mutually_exclusive_group(required=True)
    src.add_argument("--scene", type=Path, help="scene JSON file")
    src.add_argument("--preset", help="registered preset name")
    p_render.add_argument("--out", type=Path, required=True, help="output WAV path")
    p_render.add_argument("--seed", type=int, help="override the scene seed")
    p_render.add_argument(
        "--format", choices=["float32", "pcm16"], default="float32", dest="fmt"
    )
    p_render.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="PARAM=VALUE",
        help="override a synth parameter (repeatable)",
    )

    p_analyze = sub.add_parser("analyze", help="analyze a mono WAV file")
    p_analyze.add_argument("wav", type=Path)
    p_analyze.add_argument("--phon", type=float, default=60.0)
    p_analyze.add_argument("--window", type=int, default=4096)
    p_analyze.add_argument("--hop", type=int, default=512)
    p_analyze.add_argument("--overlay", action="store_true", help="draw melodic lines on the image")
    p_analyze.add_argument("--out", type=Path, help="output prefix (default: wav path stem)")

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--bind", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8775)

    sub.add_parser("iso-tables", help="print the embedded ISO 226:2003 parameter table")
    return parser


def _parse_override(item: str):
    if "=" not in item:
        raise HarmonicLinesError(f"override must look like name=value: {item!r}")
    name, raw = item.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return name, value


def cmd_render(args) -> int:
    if args.scene is not None:
        try:
            scene = json.loads(args.scene.read_text())
        except FileNotFoundError:
            print(f"error: scene file not found: {args.scene}", file=sys.stderr)
            return EXIT_INPUT
        except json.JSONDecodeError as exc:
            print(f"error: scene is not valid JSON ({exc})", file=sys.stderr)
            return EXIT_INPUT
    else:
        scene = {"preset": args.preset}
    params = dict(scene.get("params", {}))
    for item in args.set:
        name, value = _parse_override(item)
        params[name] = value
    if args.seed is not None:
        params["seed"] = args.seed
    if params:
        scene = {**scene, "params": params}

    _, data, manifest = pipeline.render_scene(scene, fmt=args.fmt)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_bytes(data)
    manifest_path = args.out.with_suffix(args.out.suffix + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {args.out} ({manifest['wav_sha256'][:12]}...) and {manifest_path.name}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    from .analysis import spectrogram_to_ppm

    audio = read_wav(args.wav)
    result = pipeline.analyze(
        audio, phon=args.phon, window_size=args.window, hop=args.hop
    )
    prefix = args.out if args.out is not None else args.wav.with_suffix("")
    json_path = Path(str(prefix) + ".analysis.json")
    ppm_path = Path(str(prefix) + ".spectrogram.ppm")
    json_path.write_text(json.dumps(result.document) + "\n")
    image = spectrogram_to_ppm(
        result.weighted, lines=result.lines if args.overlay else None
    )
    ppm_path.write_bytes(image)
    counts = [p.estimated_pitch_count for p in result.percepts]
    print(f"wrote {json_path} and {ppm_path}; estimated pitch count: {counts}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app()
    print(f"harmoniclines service ready on http://{args.bind}:{args.port}", flush=True)
    try:
        uvicorn.run(app, host=args.bind, port=args.port, log_level="warning")
    except (OSError, SystemExit):
        print(f"error: cannot bind {args.bind}:{args.port}", file=sys.stderr)
        return EXIT_ENV
    return EXIT_OK


def cmd_iso_tables() -> int:
    table = loudness.load_parameter_table()
    print(json.dumps({"checksum_sha256": loudness.asset_checksum(), **table}, indent=2))
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "render":
            return cmd_render(args)
        if args.command == "analyze":
            return cmd_analyze(args)
        if args.command == "serve":
            return cmd_serve(args)
        if args.command == "iso-tables":
            return cmd_iso_tables()
    except HarmonicLinesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
