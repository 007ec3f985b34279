"""HTTP facade over synthesis + analysis for the companion UI.

Stateless request/response under /v1; identical requests produce
byte-identical bodies.
"""

from __future__ import annotations

import base64
import hashlib
from typing import Optional

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__, pipeline, presets
from .errors import HarmonicLinesError

SCHEMA_VERSION = 1
DEFAULT_DURATION_CAP_S = 30.0


class ParamOverrides(BaseModel):
    onset_threshold: Optional[float] = Field(None, le=0.0, ge=-120.0)
    harmonics: Optional[int] = Field(None, ge=1, le=64)
    harmonic_variation: Optional[float] = Field(None, gt=0.0)
    odd_even_balance: Optional[float] = Field(None, ge=-1.0, le=1.0)
    filter_cutoff: Optional[float] = Field(None, gt=20.0)
    filter_resonance: Optional[float] = Field(None, ge=0.5)
    filter_keytrack: Optional[float] = Field(None, ge=0.0, le=1.0)
    sample_rate: Optional[int] = None
    attack: Optional[float] = Field(None, ge=0.0)
    release: Optional[float] = Field(None, gt=0.0)
    seed: Optional[int] = None


class RenderRequest(BaseModel):
    preset: Optional[str] = None
    scene: Optional[dict] = None
    params: ParamOverrides = ParamOverrides()
    phon: float = Field(60.0, ge=20.0, le=80.0)
    overlay: bool = False
    format: str = Field("float32", pattern="^(float32|pcm16)$")


def create_app(cors_origins: list[str] | None = None, duration_cap: float = DEFAULT_DURATION_CAP_S) -> FastAPI:
    app = FastAPI(title="harmoniclines", version=__version__)

    if cors_origins:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=cors_origins,
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.get("/healthz")
    def healthz():
        return {
            "status": "ok",
            "version": __version__,
            "schema_version": SCHEMA_VERSION,
        }

    @app.get("/v1/presets")
    def preset_catalog():
        reg = presets.registry()
        return {
            "schema_version": SCHEMA_VERSION,
            "dials": presets.DIAL_METADATA,
            "presets": [
                {
                    "name": name,
                    "duration": scene["duration"],
                    "defaults": scene.get("params", {}),
                }
                for name, scene in sorted(reg.items())
            ],
        }

    @app.post("/v1/render")
    def render(req: RenderRequest):
        if req.preset is None and req.scene is None:
            return JSONResponse(
                status_code=400,
                content={"error": "request must name a preset or carry a scene"},
            )
        scene = dict(req.scene) if req.scene is not None else {}
        if req.preset is not None:
            scene["preset"] = req.preset
        overrides = {k: v for k, v in req.params.model_dump().items() if v is not None}
        if overrides:
            scene["params"] = {**scene.get("params", {}), **overrides}

        try:
            resolved = pipeline.resolve_scene(scene)
        except HarmonicLinesError as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        if resolved.f0.duration > duration_cap:
            return JSONResponse(
                status_code=413,
                content={"error": f"duration exceeds the {duration_cap} s cap"},
            )

        try:
            audio, wav_data, manifest = pipeline.render_scene(scene, fmt=req.format)
        except HarmonicLinesError as exc:
            return JSONResponse(status_code=422, content={"error": str(exc)})
        result = pipeline.analyze(audio, f0_hint=resolved.f0, phon=req.phon)
        return {
            "schema_version": SCHEMA_VERSION,
            "manifest": manifest,
            "analysis": result.document,
            "audio": {
                "format": req.format,
                "sample_rate": audio.sample_rate,
                "encoding": "base64",
                "data": base64.b64encode(wav_data).decode("ascii"),
                "sha256": hashlib.sha256(wav_data).hexdigest(),
            },
        }

    return app
