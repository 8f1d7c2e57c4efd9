import base64
import io
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from fastapi.testclient import TestClient

from drumsynth import data
from drumsynth.audio import read_wav, wav_bytes
from drumsynth.features import FEATURE_NAMES
from drumsynth.nets import NetConfig
from drumsynth.service import create_app, load_snapshot
from drumsynth.train import (
    ProgressiveSchedule,
    StageSpec,
    TrainConfig,
    new_state,
    save_checkpoint,
)

FEATS = [0.5, 0.4, 0.6, 0.3, 0.7, 0.5, 0.2]


def _tiny_config(seed=7):
    net = NetConfig(
        channels=(8, 8),
        base_grid=(4, 4),
        freq_up=(False, True),
        time_up=(False, True),
        latent_dim=6,
        cond_dim=7,
    )
    schedule = ProgressiveSchedule((StageSpec(4, 2, 2), StageSpec(4, 2, 2)))
    return TrainConfig(net=net, schedule=schedule, seed=seed)


@pytest.fixture(scope="module")
def ckpt_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("service_ckpt") / "ck"
    save_checkpoint(new_state(_tiny_config()), out)
    return out


@pytest.fixture(scope="module")
def client(ckpt_dir):
    with TestClient(create_app(ckpt_dir)) as c:
        yield c


class TestInfo:
    def test_payload(self, client):
        body = client.get("/info").json()
        assert body["features"] == list(FEATURE_NAMES)
        assert body["latent_dim"] == 6
        assert body["sample_rate"] == 16000
        assert body["scale"] == 1
        assert body["grid"] == [8, 8]
        assert len(body["checkpoint"]) == 16


class TestGenerate:
    def test_seeded_requests_byte_identical(self, client):
        req = {"features": FEATS, "seed": 11}
        a = client.post("/generate", json=req)
        b = client.post("/generate", json=req)
        assert a.status_code == 200
        assert a.headers["content-type"].startswith("audio/wav")
        assert a.headers["x-seed"] == "11"
        assert a.content == b.content

    def test_output_is_one_second_wav(self, client):
        resp = client.post("/generate", json={"features": FEATS, "seed": 0})
        clip = read_wav(io.BytesIO(resp.content))
        assert clip.sample_rate == 16000
        assert len(clip.samples) == 16000
        assert np.abs(clip.samples).max() <= 1.0

    def test_unseeded_requests_get_fresh_seed(self, client):
        a = client.post("/generate", json={"features": FEATS})
        b = client.post("/generate", json={"features": FEATS})
        assert a.status_code == b.status_code == 200
        assert a.headers["x-seed"] != b.headers["x-seed"]

    def test_short_feature_vector_rejected(self, client):
        resp = client.post("/generate", json={"features": FEATS[:6]})
        assert resp.status_code == 400
        detail = resp.json()["detail"]
        assert detail["field"] == "features"
        assert detail["code"] == "invalid_field"

    def test_out_of_range_features_rejected(self, client):
        resp = client.post("/generate", json={"features": [1.5] + FEATS[1:]})
        assert resp.status_code == 400
        assert resp.json()["detail"]["field"] == "features"

    def test_missing_features_rejected(self, client):
        resp = client.post("/generate", json={"seed": 3})
        assert resp.status_code == 400
        assert resp.json()["detail"]["code"] == "missing_field"

    def test_batch_returns_distinct_clips(self, client):
        resp = client.post("/generate", json={"features": FEATS, "seed": 5, "count": 5})
        assert resp.status_code == 200
        body = resp.json()
        assert len(body["clips"]) == 5
        assert len(set(body["clips"])) == 5
        assert body["seed"] == 5
        for encoded in body["clips"]:
            clip = read_wav(io.BytesIO(base64.b64decode(encoded)))
            assert len(clip.samples) == 16000

    def test_explicit_latent_deterministic(self, client):
        z = list(np.linspace(-1.0, 1.0, 6))
        a = client.post("/generate", json={"features": FEATS, "latent": z})
        b = client.post("/generate", json={"features": FEATS, "latent": z})
        assert a.content == b.content

    def test_wrong_latent_length_rejected(self, client):
        resp = client.post("/generate", json={"features": FEATS, "latent": [0.0] * 5})
        assert resp.status_code == 400
        assert resp.json()["detail"]["field"] == "latent"

    def test_latent_with_batch_rejected(self, client):
        resp = client.post(
            "/generate", json={"features": FEATS, "latent": [0.0] * 6, "count": 2}
        )
        assert resp.status_code == 400
        assert resp.json()["detail"]["field"] == "count"

    def test_bad_count_rejected(self, client):
        resp = client.post("/generate", json={"features": FEATS, "count": 0})
        assert resp.status_code == 400
        assert resp.json()["detail"]["field"] == "count"

    def test_concurrent_requests_match_serial(self, client):
        req = {"features": FEATS, "seed": 42}
        serial = client.post("/generate", json=req).content
        with ThreadPoolExecutor(max_workers=4) as pool:
            results = list(pool.map(lambda _: client.post("/generate", json=req).content, range(8)))
        assert all(r == serial for r in results)


class TestInterpolate:
    def test_step_count(self, client):
        resp = client.post(
            "/interpolate",
            json={"features": FEATS, "mode": "spherical", "steps": 5, "seed_start": 1},
        )
        assert resp.status_code == 200
        assert len(resp.json()["clips"]) == 5

    def test_two_steps_are_the_endpoints(self, client):
        rng = np.random.default_rng(3)
        z0 = list(rng.standard_normal(6))
        z1 = list(rng.standard_normal(6))
        resp = client.post(
            "/interpolate",
            json={"features": FEATS, "steps": 2, "z_start": z0, "z_end": z1},
        )
        clips = resp.json()["clips"]
        assert len(clips) == 2
        start = client.post("/generate", json={"features": FEATS, "latent": z0}).content
        end = client.post("/generate", json={"features": FEATS, "latent": z1}).content
        assert base64.b64decode(clips[0]) == start
        assert base64.b64decode(clips[1]) == end

    def test_seed_endpoints_match_generate(self, client):
        # a UI interpolating between two auditioned seeds must land exactly
        # on the clips those seeds produce via /generate
        resp = client.post(
            "/interpolate",
            json={"features": FEATS, "steps": 2, "seed_start": 11, "seed_end": 12},
        )
        clips = resp.json()["clips"]
        start = client.post("/generate", json={"features": FEATS, "seed": 11}).content
        end = client.post("/generate", json={"features": FEATS, "seed": 12}).content
        assert base64.b64decode(clips[0]) == start
        assert base64.b64decode(clips[1]) == end

    def test_radial_mode(self, client):
        resp = client.post(
            "/interpolate",
            json={"features": FEATS, "mode": "radial", "steps": 4, "seed_start": 2},
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["mode"] == "radial"
        assert len(body["clips"]) == 4

    def test_seeded_determinism(self, client):
        req = {
            "features": FEATS, "mode": "spherical", "steps": 3,
            "seed_start": 9, "seed_end": 10,
        }
        a = client.post("/interpolate", json=req).json()
        b = client.post("/interpolate", json=req).json()
        assert a["clips"] == b["clips"]
        assert (a["seed_start"], a["seed_end"]) == (9, 10)

    def test_bad_mode_rejected(self, client):
        resp = client.post("/interpolate", json={"features": FEATS, "mode": "linear"})
        assert resp.status_code == 400
        assert resp.json()["detail"]["field"] == "mode"

    def test_single_step_rejected(self, client):
        resp = client.post("/interpolate", json={"features": FEATS, "steps": 1})
        assert resp.status_code == 400
        assert resp.json()["detail"]["field"] == "steps"


class TestAnalyze:
    def test_real_clip_round_trip(self, client):
        clip = data.synth_clip(data.random_spec("kick", np.random.default_rng(0)))
        resp = client.post(
            "/analyze", files={"file": ("kick.wav", wav_bytes(clip), "audio/wav")}
        )
        assert resp.status_code == 200
        body = resp.json()
        assert set(body["raw"]) == set(FEATURE_NAMES)
        assert set(body["normalized"]) == set(FEATURE_NAMES)
        for name in FEATURE_NAMES:
            assert 0.0 <= body["raw"][name] <= 100.0
            assert body["normalized"][name] == pytest.approx(body["raw"][name] / 100.0, abs=1e-9)

    def test_corrupt_file_rejected(self, client):
        resp = client.post("/analyze", files={"file": ("x.wav", b"not a wav", "audio/wav")})
        assert resp.status_code == 400
        assert resp.json()["detail"]["code"] == "decode_error"

    def test_silent_file_rejected(self, client):
        from drumsynth.audio import AudioClip

        silent = wav_bytes(AudioClip(np.zeros(16000), 16000))
        resp = client.post("/analyze", files={"file": ("quiet.wav", silent, "audio/wav")})
        assert resp.status_code == 400
        assert resp.json()["detail"]["code"] == "silent_input"


class TestReload:
    def test_reload_swaps_snapshot(self, tmp_path):
        ckpt = tmp_path / "ck"
        save_checkpoint(new_state(_tiny_config(seed=7)), ckpt)
        with TestClient(create_app(ckpt)) as client:
            before_info = client.get("/info").json()
            before = client.post("/generate", json={"features": FEATS, "seed": 1}).content
            save_checkpoint(new_state(_tiny_config(seed=8)), ckpt)
            reloaded = client.post("/admin/reload").json()
            assert reloaded["checkpoint"] != before_info["checkpoint"]
            after = client.post("/generate", json={"features": FEATS, "seed": 1}).content
            assert after != before


class TestSnapshotLoading:
    def test_missing_checkpoint_fails_loudly(self, tmp_path):
        with pytest.raises(ValueError, match="manifest"):
            load_snapshot(tmp_path / "missing")

    def test_unconditional_checkpoint_ignores_features(self, tmp_path):
        net = NetConfig(
            channels=(8, 8),
            base_grid=(4, 4),
            freq_up=(False, True),
            time_up=(False, True),
            latent_dim=6,
            cond_dim=0,
        )
        cfg = TrainConfig(
            net=net, schedule=ProgressiveSchedule((StageSpec(4, 2, 2), StageSpec(4, 2, 2)))
        )
        save_checkpoint(new_state(cfg), tmp_path / "ck")
        with TestClient(create_app(tmp_path / "ck")) as client:
            resp = client.post("/generate", json={"seed": 1})
            assert resp.status_code == 200
