import json

import numpy as np
import pytest

from drumsynth import data
from drumsynth.evaluate import SETTINGS, EvalReport, evaluate_model
from drumsynth.inception import InceptionConfig, train_inception
from drumsynth.nets import NetConfig, build_generator


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("eval_corpus")
    return data.synth_dataset(40, seed=7, out_dir=out)


@pytest.fixture(scope="module")
def small_inception(corpus):
    cfg = InceptionConfig(channels=(8, 12, 16), emb_dim=16)
    model, _ = train_inception(corpus, cfg=cfg, seed=0, epochs=6)
    return model


def _tiny_net(cond_dim=7):
    return NetConfig(
        channels=(8, 8),
        base_grid=(4, 4),
        freq_up=(False, True),
        time_up=(False, True),
        latent_dim=6,
        cond_dim=cond_dim,
    )


@pytest.fixture(scope="module")
def report(corpus, small_inception):
    net = _tiny_net()
    gen = build_generator(net, seed=0)
    return evaluate_model(gen, net, corpus, small_inception, n_samples=24, seed=1)


class TestReportSchema:
    def test_all_settings_present(self, report):
        assert set(report.settings) == {"real data", *SETTINGS}

    def test_conditional_rows_filled(self, report):
        for name in ("real data", "train feats", "val feats", "rand feats"):
            row = report.settings[name]
            assert set(row) == {"is_mean", "kid", "fad"}
            assert np.isfinite(row["kid"]) and np.isfinite(row["fad"])
            assert row["is_mean"] >= 1.0 - 1e-9

    def test_unconditional_null_for_conditional_model(self, report):
        assert report.settings["unconditional"] is None

    def test_real_split_row_near_zero(self, report):
        row = report.settings["real data"]
        assert abs(row["kid"]) < 0.01
        assert 0.0 <= row["fad"] < 0.1

    def test_json_round_trip(self, report):
        text = report.to_json()
        body = json.loads(text)
        assert body["version"] == 1
        again = EvalReport.from_json(text)
        assert again.settings == report.settings
        assert again.n_samples == report.n_samples

    def test_version_enforced(self, report):
        body = json.loads(report.to_json())
        body["version"] = 9
        with pytest.raises(ValueError, match="version"):
            EvalReport.from_json(json.dumps(body))


class TestReportValidation:
    def _rows(self):
        row = {"is_mean": 1.5, "kid": 0.1, "fad": 0.2}
        return {name: dict(row) for name in ("real data", *SETTINGS)}

    def test_missing_setting_rejected(self):
        rows = self._rows()
        del rows["rand feats"]
        with pytest.raises(ValueError, match="missing settings"):
            EvalReport(10, 0, rows)

    def test_negative_fad_rejected(self):
        rows = self._rows()
        rows["val feats"]["fad"] = -0.5
        with pytest.raises(ValueError, match="negative fad"):
            EvalReport(10, 0, rows)

    def test_low_is_rejected(self):
        rows = self._rows()
        rows["train feats"]["is_mean"] = 0.5
        with pytest.raises(ValueError, match="is_mean"):
            EvalReport(10, 0, rows)


class TestVariants:
    def test_unconditional_model(self, corpus, small_inception):
        net = _tiny_net(cond_dim=0)
        gen = build_generator(net, seed=0)
        report = evaluate_model(gen, net, corpus, small_inception, n_samples=24, seed=2)
        assert report.settings["unconditional"] is not None
        for name in ("train feats", "val feats", "rand feats"):
            assert report.settings[name] is None

    def test_regression_only_inception_drops_is(self, corpus, tmp_path_factory):
        import dataclasses

        entries = [dataclasses.replace(e, drum_class=None) for e in corpus.entries]
        index = data.DatasetIndex.from_entries(entries, corpus.root)
        cfg = InceptionConfig(channels=(8, 12), emb_dim=16, n_classes=0)
        model, _ = train_inception(index, cfg=cfg, seed=0, epochs=2)
        net = _tiny_net()
        gen = build_generator(net, seed=0)
        report = evaluate_model(gen, net, corpus, model, n_samples=12, seed=3)
        assert report.settings["real data"]["is_mean"] is None
        assert report.settings["train feats"]["is_mean"] is None

    def test_coherence_included_when_requested(self, corpus, small_inception):
        net = _tiny_net()
        gen = build_generator(net, seed=0)
        report = evaluate_model(
            gen, net, corpus, small_inception, n_samples=12, seed=4, coherence_trials=2
        )
        assert set(report.coherence) == {
            "brightness", "hardness", "depth", "roughness", "boominess", "warmth", "sharpness",
        }
        for row in report.coherence.values():
            assert set(row) == {"e1", "e2", "e3", "n_trials", "n_failed"}
            assert row["n_trials"] == 2

    def test_tiny_sample_count_rejected(self, corpus, small_inception):
        net = _tiny_net()
        gen = build_generator(net, seed=0)
        with pytest.raises(ValueError, match="n_samples"):
            evaluate_model(gen, net, corpus, small_inception, n_samples=2)
