"""Tests for the command-line interface, run in-process on small synthetic scenes"""

import json

import numpy as np
import pytest

from dasc.cli import METRIC_KEYS, StageTimer, build_parser, main
from dasc.descriptor.dump import DescriptorField, read_descriptors, write_descriptors
from dasc.descriptor.patterns import read_patterns
from dasc.geometry.propagation import read_fields
from dasc.imaging.io import read_pgm16, write_image, write_pgm16
from dasc.matching.io import read_flo

SMALL = ["--patch-size", "3", "--support-size", "11", "--dim", "16", "--n-rho", "2", "--n-theta", "8", "-q"]


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        build_parser().parse_args(["--version"])
    assert info.value.code == 0
    assert "dasc" in capsys.readouterr().out


def test_stage_timer_report(capsys):
    timer = StageTimer()
    with timer.stage("load"):
        pass
    with timer.stage("load"):
        pass
    timer.report()
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("load: ") and lines[0].endswith(" s")
    assert lines[-1].startswith("total: ")


def test_stereo_round_trip(tmp_path):
    scene = tmp_path / "scene"
    assert main(["synth", "shifted_stereo", "-o", str(scene), "--param", "height=24", "--param", "width=40"]) == 0
    assert (scene / "disparity.pfm").exists()

    for name in ("image_a", "image_b"):
        code = main(["compute", str(scene / f"{name}.pgm"), "-o", str(tmp_path / f"{name}.dasc")] + SMALL)
        assert code == 0
    field = read_descriptors(tmp_path / "image_a.dasc")
    assert (field.height, field.width, field.dim) == (24, 40, 16)

    disparity = str(tmp_path / "disparity.pgm")
    descriptors = [str(tmp_path / "image_a.dasc"), str(tmp_path / "image_b.dasc")]
    assert main(["match-stereo", *descriptors, "-o", disparity, "--max-disp", "10", "-q"]) == 0

    metrics_path = tmp_path / "metrics.json"
    code = main(
        ["eval", "--disparity", disparity, "--gt-disparity", str(scene / "disparity.pfm"), "-o", str(metrics_path)]
    )
    assert code == 0
    metrics = json.loads(metrics_path.read_text())
    assert sorted(metrics) == sorted(METRIC_KEYS)
    assert 0.0 <= metrics["bad_pixel_rate"] <= 1.0
    assert metrics["endpoint_error"] is None


def test_compute_variants(tmp_path):
    img = str(tmp_path / "img.pgm")
    write_image(img, np.random.default_rng(0).random((16, 18)))
    assert main(["compute", img, "-o", str(tmp_path / "oracle.dasc"), "--oracle"] + SMALL) == 0
    assert main(["compute", img, "-o", str(tmp_path / "fast.dasc")] + SMALL) == 0
    oracle = read_descriptors(tmp_path / "oracle.dasc").values
    fast = read_descriptors(tmp_path / "fast.dasc").values
    assert np.max(np.abs(oracle - fast)) <= 1e-4

    lss_flags = ["--lss-n-rho", "2", "--lss-n-theta", "8", "--lss-patch", "3", "--lss-window", "9"]
    assert main(["compute", img, "-o", str(tmp_path / "lss.dasc"), "--lss", "-q"] + lss_flags) == 0
    assert read_descriptors(tmp_path / "lss.dasc").dim == 16


def test_error_exit_codes(tmp_path):
    missing = str(tmp_path / "missing.pgm")
    assert main(["compute", missing, "-o", str(tmp_path / "x.dasc"), "-q"]) == 2
    img = str(tmp_path / "img.pgm")
    write_image(img, np.zeros((8, 8)))
    assert main(["compute", img, "-o", str(tmp_path / "x.dasc"), "--patch-size", "4", "-q"]) == 3
    assert main(["eval", "--disparity", img, "-q"]) == 3
    assert main(["synth", "blob_scene", "-o", str(tmp_path / "s"), "--param", "colour=red", "-q"]) == 3

    (tmp_path / "bad.cfg").write_text("max_disp = -")
    assert main(["match-stereo", "a", "b", "-o", "c", "--config", str(tmp_path / "bad.cfg"), "-q"]) == 3


def test_learn_patterns(tmp_path):
    windows = tmp_path / "windows"
    assert main(["synth", "training_windows", "-o", str(windows), "--count", "20", "--param", "window=11"]) == 0
    assert (windows / "manifest.csv").read_text().startswith("path_a,path_b,label")

    patterns = tmp_path / "learned.txt"
    args = ["learn", str(windows / "manifest.csv"), "-o", str(patterns), "--epochs", "5", "--dim", "10"]
    assert main(args + SMALL[:4] + SMALL[6:]) == 0
    learned = read_patterns(patterns)
    assert len(learned) == 10
    assert np.all(np.diff(learned.weights) <= 0)
    assert (tmp_path / "learned.model").exists()

    (windows / "single.csv").write_text("pair0000_a.pgm,pair0000_b.pgm,1\npair0001_a.pgm,pair0001_b.pgm,1\n")
    assert main(["learn", str(windows / "single.csv"), "-o", str(tmp_path / "p.txt")] + SMALL) == 4


def test_detect_segment_propagate_describe(tmp_path):
    scene = tmp_path / "scene"
    assert main(["synth", "blob_scene", "-o", str(scene), "--param", "image_size=48"]) == 0
    img = str(scene / "image_a.pgm")

    keypoints, labels, fields = tmp_path / "kp.txt", tmp_path / "labels.pgm", tmp_path / "fields.txt"
    assert main(["detect", img, "-o", str(keypoints), "-q", "--patch-size", "3"]) == 0
    assert main(["segment", img, "-o", str(labels), "-q", "--superpixels", "16"]) == 0
    count = int(read_pgm16(labels).max()) + 1
    args = ["propagate", img, "--labels", str(labels), "--keypoints", str(keypoints), "-o", str(fields), "-q"]
    assert main(args) == 0
    assert len(read_fields(fields, count)) == count

    out = tmp_path / "gi.dasc"
    assert main(["gi-compute", img, "--labels", str(labels), "--fields", str(fields), "-o", str(out)] + SMALL) == 0
    values = read_descriptors(out).values
    np.testing.assert_allclose(np.linalg.norm(values, axis=2), 1.0, atol=1e-5)


def test_pipeline_with_fields_from_files(tmp_path):
    scene = tmp_path / "scene"
    assert main(["synth", "scaled_rotated", "-o", str(scene), "--param", "image_size=40"]) == 0
    out = tmp_path / "run"
    args = [
        "pipeline-gi",
        str(scene / "image_a.pgm"),
        str(scene / "image_b.pgm"),
        "-o",
        str(out),
        "--fields-from",
        str(scene / "fields_a.txt"),
        str(scene / "fields_b.txt"),
        "--gt-flow",
        str(scene / "flow.flo"),
        "--annot-a",
        str(scene / "annotation_a.pgm"),
        "--annot-b",
        str(scene / "annotation_b.pgm"),
        "--superpixels",
        "12",
        "--flow-radius",
        "3",
        "--no-persist",
    ]
    assert main(args + SMALL) == 0
    metrics = json.loads((out / "metrics.json").read_text())
    assert all(metrics[key] is not None for key in ("descriptor_distance", "endpoint_error", "label_transfer_error"))
    assert read_flo(out / "flow.flo").vectors.shape == (40, 40, 2)
    assert not (out / "labels_a.pgm").exists()


def test_pipeline_with_detection_persists_intermediates(tmp_path):
    scene = tmp_path / "scene"
    assert main(["synth", "blob_scene", "-o", str(scene), "--param", "image_size=40"]) == 0
    out = tmp_path / "run"
    img = str(scene / "image_a.pgm")
    args = ["pipeline-gi", img, img, "-o", str(out), "--superpixels", "12", "--flow-radius", "2"]
    assert main(args + SMALL) == 0
    for name in ("labels_a.pgm", "keypoints_b.txt", "fields_a.txt", "descriptors_b.dasc", "flow.flo"):
        assert (out / name).exists()
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["endpoint_error"] is None
    assert metrics["descriptor_distance"] is None


def test_eval_flow_without_ground_truth_prints_nulls(tmp_path, capsys):
    scene = tmp_path / "scene"
    assert main(["synth", "translated_flow", "-o", str(scene), "--param", "height=16", "--param", "width=16"]) == 0
    capsys.readouterr()
    assert main(["eval", "--flow", str(scene / "flow.flo"), "-q"]) == 0
    assert json.loads(capsys.readouterr().out) == dict.fromkeys(METRIC_KEYS)

    assert main(["eval", "--flow", str(scene / "flow.flo"), "--gt-flow", str(scene / "flow.flo"), "-q"]) == 0
    metrics = json.loads(capsys.readouterr().out)
    assert metrics["endpoint_error"] == 0.0 and metrics["bad_pixel_rate"] == 0.0


def test_synth_planted_features(tmp_path):
    assert main(["synth", "planted_features", "-o", str(tmp_path), "--param", "n_samples=40", "-q"]) == 0
    table = np.loadtxt(tmp_path / "features.csv", delimiter=",")
    assert table.shape == (40, 13)
    assert set(np.unique(table[:, -1])) == {0.0, 1.0}


def test_synth_multiple_items_are_prefixed(tmp_path):
    assert main(["synth", "translated_flow", "-o", str(tmp_path), "--count", "2", "-q"]) == 0
    assert (tmp_path / "0000_image_a.pgm").exists() and (tmp_path / "0001_flow.flo").exists()


def test_zero_disparities_survive_the_default_disparity_file(tmp_path):
    field = DescriptorField(np.random.default_rng(1).random((6, 9, 4)))
    write_descriptors(tmp_path / "a.dasc", field)
    disparity = str(tmp_path / "disparity.pgm")
    assert main(["match-stereo", str(tmp_path / "a.dasc"), str(tmp_path / "a.dasc"), "-o", disparity, "-q"]) == 0
    assert read_pgm16(disparity).min() == 1

    metrics_path = tmp_path / "metrics.json"
    assert main(["eval", "--disparity", disparity, "--gt-disparity", disparity, "-o", str(metrics_path), "-q"]) == 0
    assert json.loads(metrics_path.read_text())["bad_pixel_rate"] == 0.0


def test_unwritable_output_and_unexpected_failures(tmp_path, monkeypatch):
    field = DescriptorField(np.random.default_rng(2).random((5, 5, 3)))
    write_descriptors(tmp_path / "a.dasc", field)
    desc = str(tmp_path / "a.dasc")
    disparity = str(tmp_path / "d.pfm")
    assert main(["match-stereo", desc, desc, "-o", disparity, "-q"]) == 0

    missing_dir = str(tmp_path / "nodir" / "m.json")
    assert main(["eval", "--disparity", disparity, "--gt-disparity", disparity, "-o", missing_dir, "-q"]) == 2
    assert main(["match-stereo", desc, desc, "-o", str(tmp_path / "nodir" / "d.pgm"), "-q"]) == 2

    def failing_match(*args, **kwargs):
        raise RuntimeError("solver exploded")

    monkeypatch.setattr("dasc.cli.match_stereo_wta", failing_match)
    assert main(["match-stereo", desc, desc, "-o", disparity, "-q"]) == 5


def test_pipeline_on_an_identical_pair_has_zero_flow(tmp_path):
    scene = tmp_path / "scene"
    params = ["--param", "height=40", "--param", "width=40", "--param", "u=0", "--param", "v=0"]
    assert main(["synth", "translated_flow", "-o", str(scene), *params, "-q"]) == 0
    annotation = np.ones((40, 40), dtype=np.int64)
    annotation[:, 20:] = 2
    annotation[30:, :] = 3
    write_pgm16(scene / "annotation.pgm", annotation)

    out = tmp_path / "run"
    args = [
        "pipeline-gi",
        str(scene / "image_a.pgm"),
        str(scene / "image_b.pgm"),
        "-o",
        str(out),
        "--gt-flow",
        str(scene / "flow.flo"),
        "--annot-a",
        str(scene / "annotation.pgm"),
        "--annot-b",
        str(scene / "annotation.pgm"),
        "--superpixels",
        "12",
        "--flow-radius",
        "2",
    ]
    assert main(args + SMALL) == 0
    np.testing.assert_array_equal(read_flo(out / "flow.flo").vectors, 0.0)
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["endpoint_error"] == 0.0
    assert metrics["label_transfer_error"] == 0.0
    assert metrics["descriptor_distance"] == 0.0
