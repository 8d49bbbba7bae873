import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

import hail_cil as hc

TINY = json.dumps(
    {
        "methods": ["finetune", "hail"],
        "seeds": [1],
        "synth": {
            "n_species": 2,
            "train_per_class": 12,
            "val_per_class": 3,
            "test_per_class": 6,
            "d": 10,
            "frames": 2,
            "locations": 2,
        },
        "fusion": {"steps": 3},
    }
)


def test_ridge_matches_normal_equations():
    rng = np.random.default_rng(0)
    f = rng.normal(size=(30, 7))
    y = np.eye(4)[rng.integers(0, 4, 30)]
    w = hc.ridge_solve(f, y, 1.0)
    expected = np.linalg.solve(f.T @ f + np.eye(7), f.T @ y)
    assert w.shape == (7, 4)
    assert np.max(np.abs(w - expected)) < 1e-10


def test_ridge_rejects_shape_mismatch():
    with pytest.raises(ValueError):
        hc.ridge_solve(np.ones((3, 2)), np.ones((4, 4)))


def test_kmeans_trace_and_determinism():
    pts = np.random.default_rng(1).normal(size=(40, 3))
    a = hc.kmeans(pts, 4, seed=9)
    b = hc.kmeans(pts, 4, seed=9)
    assert np.array_equal(a["centroids"], b["centroids"])
    trace = a["inertia_trace"]
    assert all(x >= y for x, y in zip(trace, trace[1:]))
    assert len(a["assignments"]) == 40


def test_softmax_and_schedule():
    p = hc.softmax(np.array([1.0, 2.0, 3.0, 1000.0]))
    assert abs(p.sum() - 1.0) < 1e-12
    assert hc.gamma_at(0, 5) == 0.8
    assert hc.gamma_at(5, 5) == 0.3


def test_metrics_hand_example():
    grid = [[0.9], [0.7, 0.8]]
    assert hc.avg_accuracy(grid) == 0.75
    assert hc.forgetting(grid) == 0.2


def test_fusion_weights_normalize():
    d, frames, locations = 4, 3, 2
    rng = np.random.default_rng(2)
    out = hc.fuse(rng.normal(size=d), rng.normal(size=(frames * locations, d)), frames, hc.FusionParams.random(d, 3))
    assert out["fused"].shape == (d,)
    assert np.allclose(out["temporal_weights"].sum(axis=0), 1.0)
    assert math.isclose(out["audio_weights"].sum(), 1.0)


def test_expand_is_nonnegative():
    e = hc.expand(np.random.default_rng(3).normal(size=(5, 8)), 80, 7)
    assert e.shape == (5, 80)
    assert (e >= 0).all()


def test_generate_and_read(tmp_path):
    paths = hc.generate(str(tmp_path), 4, TINY)
    assert [p.split("/")[-1] for p in map(str, paths)] == ["train.avc1", "val.avc1", "test.avc1"]
    ds = hc.read_dataset(str(tmp_path / "train.avc1"))
    assert ds["audio"].shape == (2 * 4 * 12, 10)
    assert ds["visual"].shape == (2 * 4 * 12, 2 * 2 * 10)
    assert sorted(set(ds["labels"])) == [0, 1, 2, 3]
    assert ds["seed"] == 4


def test_run_experiment_and_checkpoint(tmp_path):
    recs = hc.run_experiment(TINY, str(tmp_path))
    assert [r["method"] for r in recs] == ["finetune", "hail"]
    for r in recs:
        assert len(r["avg_acc"]) == 2
        assert 0.0 <= r["avg_acc"][-1] <= 1.0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["method_order"] == ["finetune", "hail"]
    svg = ET.parse(tmp_path / "accuracy_curve.svg").getroot()
    lines = [e for e in svg.iter() if e.tag.endswith("polyline")]
    assert sorted(e.get("data-method") for e in lines) == ["finetune", "hail"]
    info = hc.inspect_checkpoint(str(tmp_path / "checkpoints" / "hail_seed1.hail"))
    assert info["stages_learned"] == 2
    assert info["d"] == 10


def test_unknown_method_rejected():
    with pytest.raises(ValueError, match="bogus"):
        hc.run_experiment(json.dumps({"methods": ["bogus"]}))
