"""HTTP generation service.

Endpoints: GET /info, POST /generate, POST /interpolate, POST /analyze,
POST /admin/reload.  Single clips come back as binary audio/wav with an
X-Seed header; batches as JSON arrays of base64 WAVs.  The model is held
as an immutable snapshot that /admin/reload swaps atomically, so
concurrent requests always see one consistent checkpoint.

Every error response body is {"detail": {"code", "field", "message"}}.
"""

from __future__ import annotations

import base64
import io
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from fastapi import Body, FastAPI, File, HTTPException, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware

from .audio import CANONICAL_RATE, AudioClip, peak_normalize, read_wav, standardize, wav_bytes
from .checkpoint import read_tensors
from .features import FEATURE_NAMES, N_FEATURES, SilentInputError, extract_all, extract_raw
from .latent import radial, slerp
from .nets import Generator, NetConfig, build_generator
from .synthesis import render_clips
from .train import _net_from_dict

log = logging.getLogger(__name__)

MAX_COUNT = 32
MAX_STEPS = 64


@dataclass(frozen=True)
class ModelSnapshot:
    gen: Generator
    net: NetConfig
    checkpoint_id: str
    iteration: int


def load_snapshot(ckpt_dir) -> ModelSnapshot:
    """Generator weights + config from a training checkpoint directory."""
    named, meta = read_tensors(ckpt_dir)
    net = _net_from_dict(meta["config"]["net"])
    gen = build_generator(net, seed=0)
    weights = {}
    for name in gen.state_dict():
        key = f"gen.{name}"
        if key not in named:
            raise ValueError(f"checkpoint is missing generator tensor {key}")
        weights[name] = torch.from_numpy(named[key])
    gen.load_state_dict(weights)
    gen.eval()
    manifest = json.loads((Path(ckpt_dir) / "manifest.json").read_text())
    return ModelSnapshot(gen, net, manifest["sha256"][:16], meta.get("iteration", 0))


def _bad_request(field: str, message: str, code: str = "invalid_field"):
    raise HTTPException(status_code=400, detail={"code": code, "field": field, "message": message})


def _parse_features(value, cond_dim: int):
    if cond_dim == 0:
        return None
    if value is None:
        _bad_request("features", f"required: {cond_dim} values in [0, 1]", code="missing_field")
    if not isinstance(value, (list, tuple)) or len(value) != N_FEATURES:
        _bad_request("features", f"expected exactly {N_FEATURES} values, got {value!r}")
    arr = np.asarray(value, dtype=np.float64)
    if not np.isfinite(arr).all() or arr.min() < 0.0 or arr.max() > 1.0:
        _bad_request("features", "values must be finite and within [0, 1]")
    return arr


def _parse_latent(value, latent_dim: int, field: str = "latent"):
    if not isinstance(value, (list, tuple)) or len(value) != latent_dim:
        _bad_request(field, f"expected exactly {latent_dim} values")
    arr = np.asarray(value, dtype=np.float64)
    if not np.isfinite(arr).all():
        _bad_request(field, "values must be finite")
    return arr


def _resolve_seed(seed, field: str = "seed") -> int:
    if seed is None:
        return int(np.random.SeedSequence().generate_state(1, np.uint32)[0])
    if not isinstance(seed, int) or isinstance(seed, bool):
        _bad_request(field, f"expected an integer, got {seed!r}")
    return seed


def _clip_to_wav(clip: AudioClip) -> bytes:
    return wav_bytes(peak_normalize(clip))


def _render(snapshot: ModelSnapshot, z: np.ndarray, feats) -> list:
    cond = None
    if snapshot.net.cond_dim:
        cond = np.tile(feats, (z.shape[0], 1))
    return render_clips(snapshot.gen, snapshot.net, z, cond)


def _info_payload(snapshot: ModelSnapshot) -> dict:
    net = snapshot.net
    top = net.n_scales - 1
    return {
        "features": list(FEATURE_NAMES),
        "latent_dim": net.latent_dim,
        "cond_dim": net.cond_dim,
        "scale": top,
        "grid": list(net.grid(top)),
        "sample_rate": CANONICAL_RATE,
        "checkpoint": snapshot.checkpoint_id,
        "iteration": snapshot.iteration,
    }


def create_app(ckpt_dir) -> FastAPI:
    app = FastAPI(title="drum synthesis service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
        expose_headers=["X-Seed"],
    )
    app.state.ckpt_dir = ckpt_dir
    app.state.snapshot = load_snapshot(ckpt_dir)

    @app.get("/info")
    def info():
        return _info_payload(app.state.snapshot)

    @app.post("/generate")
    def generate(req: dict = Body(...)):
        snapshot = app.state.snapshot
        feats = _parse_features(req.get("features"), snapshot.net.cond_dim)
        count = req.get("count", 1)
        if not isinstance(count, int) or isinstance(count, bool) or not 1 <= count <= MAX_COUNT:
            _bad_request("count", f"expected an integer in 1..{MAX_COUNT}, got {count!r}")
        latent = req.get("latent")
        if latent is not None and count != 1:
            _bad_request("count", "an explicit latent fixes z, so count must be 1")
        seed = _resolve_seed(req.get("seed"))
        if latent is not None:
            z = _parse_latent(latent, snapshot.net.latent_dim)[None, :]
        else:
            rng = np.random.default_rng(seed)
            z = rng.standard_normal((count, snapshot.net.latent_dim))
        clips = _render(snapshot, z, feats)
        if count == 1:
            return Response(
                content=_clip_to_wav(clips[0]),
                media_type="audio/wav",
                headers={"X-Seed": str(seed)},
            )
        encoded = [base64.b64encode(_clip_to_wav(c)).decode("ascii") for c in clips]
        return {"clips": encoded, "seed": seed, "sample_rate": CANONICAL_RATE}

    @app.post("/interpolate")
    def interpolate(req: dict = Body(...)):
        snapshot = app.state.snapshot
        net = snapshot.net
        feats = _parse_features(req.get("features"), net.cond_dim)
        mode = req.get("mode", "spherical")
        if mode not in ("spherical", "radial"):
            _bad_request("mode", f"expected 'spherical' or 'radial', got {mode!r}")
        steps = req.get("steps", 8)
        if not isinstance(steps, int) or isinstance(steps, bool) or not 2 <= steps <= MAX_STEPS:
            _bad_request("steps", f"expected an integer in 2..{MAX_STEPS}, got {steps!r}")
        # endpoint seeds reproduce /generate's seed -> z draw exactly, so a
        # UI can interpolate between two previously auditioned seeds
        seed_start = _resolve_seed(req.get("seed_start"), "seed_start")
        seed_end = _resolve_seed(req.get("seed_end"), "seed_end")
        z_start = (
            _parse_latent(req["z_start"], net.latent_dim, "z_start")
            if req.get("z_start") is not None
            else np.random.default_rng(seed_start).standard_normal(net.latent_dim)
        )
        z_end = (
            _parse_latent(req["z_end"], net.latent_dim, "z_end")
            if req.get("z_end") is not None
            else np.random.default_rng(seed_end).standard_normal(net.latent_dim)
        )
        ts = np.linspace(0.0, 1.0, steps)
        try:
            if mode == "spherical":
                z = np.stack([slerp(z_start, z_end, t) for t in ts])
            else:
                norm = float(np.linalg.norm(z_start))
                factors = 0.25 + ts * (2.0 - 0.25)
                z = np.stack([radial(z_start, f * norm) for f in factors])
        except ValueError as exc:
            _bad_request("z_start", str(exc), code="invalid_input")
        # one render per step: endpoints stay byte-identical to /generate
        # with the same latent (batched conv output differs in the last ulp)
        clips = [_render(snapshot, row[None, :], feats)[0] for row in z]
        encoded = [base64.b64encode(_clip_to_wav(c)).decode("ascii") for c in clips]
        return {
            "clips": encoded,
            "mode": mode,
            "steps": steps,
            "seed_start": seed_start,
            "seed_end": seed_end,
            "sample_rate": CANONICAL_RATE,
        }

    @app.post("/analyze")
    def analyze(file: UploadFile = File(...)):
        payload = file.file.read()
        try:
            clip = standardize(read_wav(io.BytesIO(payload)))
        except Exception as exc:
            _bad_request("file", f"could not decode WAV: {exc}", code="decode_error")
        try:
            raw = extract_raw(clip)
            normalized = extract_all(clip)
        except SilentInputError as exc:
            _bad_request("file", str(exc), code="silent_input")
        return {
            "raw": {name: raw[name] for name in FEATURE_NAMES},
            "normalized": dict(zip(FEATURE_NAMES, normalized.values.tolist())),
        }

    @app.post("/admin/reload")
    def reload_model():
        app.state.snapshot = load_snapshot(app.state.ckpt_dir)
        return _info_payload(app.state.snapshot)

    return app


def serve(ckpt_dir, host: str = "127.0.0.1", port: int = 8000):
    import uvicorn

    uvicorn.run(create_app(ckpt_dir), host=host, port=port, log_level="info")
