import json
import logging

import numpy as np
import pytest

from meshplug.body_model import BodyParams, load_params, save_params
from meshplug.cli import main
from meshplug.datagen import read_manifest
from meshplug.fitting import FitConfig

from .conftest import random_params


def _run(capsys, *argv):
    code = main([str(arg) for arg in argv])
    return code, json.loads(capsys.readouterr().out)


def _dataset(capsys, out_dir, *extra, n=3, seed=5):
    code, payload = _run(
        capsys, "gen-dataset", "--n", n, "--out", out_dir, "--seed", seed, "--width", 64, "--height", 48, *extra
    )
    assert code == 0
    return payload["manifest"]


def _config(path, **changes):
    path.write_text(json.dumps(FitConfig(**changes).to_dict()), encoding="utf-8")
    return path


def test_gen_dataset_with_no_records(capsys, tmp_path):
    code, payload = _run(capsys, "gen-dataset", "--n", 0, "--out", tmp_path)
    assert code == 0
    assert payload["schema"] == 1 and payload["n_records"] == 0
    assert read_manifest(payload["manifest"]) == ([], [])


def test_gen_dataset_is_reproducible(capsys, tmp_path):
    first = _dataset(capsys, tmp_path / "a", "--mask-ratio", 0.2)
    second = _dataset(capsys, tmp_path / "b", "--mask-ratio", 0.2)
    with open(first, "rb") as a, open(second, "rb") as b:
        assert a.read() == b.read()
    records, errors = read_manifest(first)
    assert len(records) == 3 and not errors
    assert all(len(record.mask.blocks) == 51 for record in records)


def test_gen_dataset_draws_poses_from_a_pose_file(capsys, tmp_path, toy_spec, rng):
    bank = [random_params(rng, toy_spec.joint_count, translation_sigma=0.0) for _ in range(2)]
    pose_file = save_params(tmp_path / "poses.json", bank)
    manifest = _dataset(capsys, tmp_path / "data", "--pose-source", "file", "--pose-file", pose_file, n=4)
    records, errors = read_manifest(manifest)
    assert len(records) == 4 and not errors
    for record in records:
        assert any(np.array_equal(record.world_params.pose, entry.pose) for entry in bank)

    code, payload = _run(capsys, "gen-dataset", "--n", 1, "--out", tmp_path / "none", "--pose-source", "file")
    assert code == 1 and payload["type"] == "InvariantViolation"


def test_gen_dataset_rejects_a_reversed_range(capsys, tmp_path):
    code, payload = _run(capsys, "gen-dataset", "--n", 1, "--out", tmp_path, "--pitch-range", 10, -10)
    assert code == 1
    assert payload["type"] == "InvariantViolation"


@pytest.mark.parametrize("pitch_only", [True, False])
def test_estimate_pitch_on_a_noiseless_manifest(capsys, tmp_path, pitch_only):
    manifest = _dataset(
        capsys, tmp_path / "data", "--pitch-range", -30, 30, "--roll-range", 0, 0, "--width", 160, "--height", 120
    )
    config = _config(tmp_path / "fit.json", pitch_min_deg=-40.0, pitch_max_deg=40.0, pitch_step_deg=1.0,
                     roll_min_deg=-4.0, roll_max_deg=4.0, roll_step_deg=1.0)
    argv = ["estimate-pitch", "--manifest", manifest, "--config", config] + (["--pitch-only"] if pitch_only else [])
    code, payload = _run(capsys, *argv)
    assert code == 0
    assert payload["n_records"] == 3
    assert payload["mean_abs_error_deg"] < 0.5
    for row in payload["results"]:
        assert abs(row["pitch_deg"] - row["gt_pitch_deg"]) == pytest.approx(row["error_deg"])
        if not pitch_only:
            assert abs(row["roll_deg"]) < 0.5
            assert row["cam_loss"] < 1e-4


def test_estimate_pitch_with_keypoint_noise(capsys, tmp_path):
    manifest = _dataset(
        capsys, tmp_path / "data", "--pitch-range", -30, 30, "--roll-range", 0, 0, "--width", 320, "--height", 240
    )
    config = _config(tmp_path / "fit.json", pitch_min_deg=-45.0, pitch_max_deg=45.0, pitch_step_deg=1.0)
    argv = ["estimate-pitch", "--manifest", manifest, "--config", config, "--pitch-only", "--noise-px", 2]
    code, noisy = _run(capsys, *argv, "--seed", 3)
    assert code == 0
    errors = [row["error_deg"] for row in noisy["results"]]
    assert len(errors) == 3 and all(error > 0.0 for error in errors)
    assert noisy["mean_abs_error_deg"] < 5.0
    assert _run(capsys, *argv, "--seed", 3)[1] == noisy
    assert _run(capsys, *argv, "--seed", 4)[1]["results"] != noisy["results"]


def test_estimate_pitch_on_an_empty_manifest(capsys, tmp_path):
    manifest = _dataset(capsys, tmp_path, n=0)
    code, payload = _run(capsys, "estimate-pitch", "--manifest", manifest)
    assert code == 0
    assert payload["results"] == [] and payload["mean_abs_error_deg"] is None


def test_estimate_pitch_from_depth(capsys, tmp_path):
    manifest = _dataset(
        capsys, tmp_path / "data", "--pitch-range", 25, 25, "--roll-range", 0, 0, "--width", 96, "--height", 72, n=1
    )
    config = _config(tmp_path / "fit.json", pitch_min_deg=20.0, pitch_max_deg=30.0, pitch_step_deg=0.5)
    code, payload = _run(capsys, "estimate-pitch", "--manifest", manifest, "--method", "depth", "--config", config)
    assert code == 0
    assert payload["method"] == "depth"
    assert payload["results"][0]["error_deg"] <= 0.5

    for depth_file in (tmp_path / "data" / "depth").iterdir():
        depth_file.unlink()
    code, payload = _run(capsys, "estimate-pitch", "--manifest", manifest, "--method", "depth", "--config", config)
    assert code == 0
    assert "not found" in payload["results"][0]["error"]
    assert payload["mean_abs_error_deg"] is None


def test_transform_at_zero_pitch_is_identity(capsys, tmp_path, toy_spec, rng):
    params = random_params(rng, toy_spec.joint_count)
    path = save_params(tmp_path / "p.json", params)
    code, payload = _run(capsys, "transform", "--params", path, "--pitch-deg", 0)
    assert code == 0
    assert BodyParams.from_dict(payload["params"]).allclose(params, atol=0.0)


@pytest.mark.parametrize("root", [None, (0.0, 4.0, 0.0)])
def test_transform_inverse_round_trip(capsys, tmp_path, toy_spec, rng, root):
    params = random_params(rng, toy_spec.joint_count)
    if root is not None:
        pose = params.pose.copy()
        pose[0] = root
        params = params.replace(pose=pose)
    source = save_params(tmp_path / "p.json", params)
    world, back = tmp_path / "world.json", tmp_path / "back.json"
    assert _run(capsys, "transform", "--params", source, "--pitch-deg", 20, "--pivot", "--out", world)[0] == 0
    assert not load_params(world).allclose(params)
    code, _ = _run(capsys, "transform", "--params", world, "--pitch-deg", 20, "--pivot", "--inverse", "--out", back)
    assert code == 0
    assert load_params(back).allclose(params, atol=1e-9)


def test_transform_rejects_a_malformed_params_file(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{oops", encoding="utf-8")
    code, payload = _run(capsys, "transform", "--params", path, "--pitch-deg", 10)
    assert code == 1
    assert payload["type"] == "SchemaError"


def test_fit_then_metrics(capsys, tmp_path):
    manifest = _dataset(capsys, tmp_path / "data", "--roll-range", 0, 0, n=2)
    predictions = tmp_path / "pred.jsonl"
    code, payload = _run(capsys, "fit", "--manifest", manifest, "--out", predictions, "--max-iters", 50)
    assert code == 0
    assert payload["n_fitted"] == 2 and payload["n_converged"] == 2
    assert all(row["w_mpjpe_mm"] < 1e-3 for row in payload["results"])
    lines = predictions.read_text(encoding="utf-8").splitlines()
    assert [json.loads(line)["schema"] for line in lines] == [1, 1]

    code, payload = _run(capsys, "metrics", "--gt", manifest, "--pred", predictions, "--baselines")
    assert code == 0
    names = [row["name"] for row in payload["rows"]]
    assert names == ["prediction", "naive", "geometric"]
    assert payload["wmpjpe_mm"] < 1e-3
    naive, geometric = payload["rows"][1], payload["rows"][2]
    assert naive["wmpjpe_mm"] > geometric["wmpjpe_mm"]
    assert geometric["wmpjpe_mm"] < 1e-6


def test_fit_from_a_perturbed_start(capsys, tmp_path):
    manifest = _dataset(capsys, tmp_path / "data", "--roll-range", 0, 0, n=2)
    argv = ["fit", "--manifest", manifest, "--init", "perturbed", "--max-iters", 500, "--seed", 1]
    code, payload = _run(capsys, *argv, "--out", tmp_path / "a.jsonl")
    assert code == 0
    assert payload["n_fitted"] == 2 and payload["n_converged"] == 2
    for line in (tmp_path / "a.jsonl").read_text(encoding="utf-8").splitlines():
        report = json.loads(line)["report"]
        assert report["final_loss"] < report["initial_loss"]
    assert min(row["w_mpjpe_mm"] for row in payload["results"]) < 5.0

    _run(capsys, *argv, "--out", tmp_path / "b.jsonl")
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()


def test_metrics_of_ground_truth_is_zero(capsys, tmp_path, toy_spec):
    manifest = _dataset(capsys, tmp_path / "data", n=2)
    records, _ = read_manifest(manifest)
    predictions = tmp_path / "pred.jsonl"
    predictions.write_text(
        "".join(json.dumps({"params": r.heading_params(toy_spec).to_dict()}) + "\n" for r in records), encoding="utf-8"
    )
    code, payload = _run(capsys, "metrics", "--gt", manifest, "--pred", predictions)
    assert code == 0
    assert payload["n_records"] == 2
    for key in ("wmpjpe_mm", "pampjpe_mm", "wpve_mm"):
        assert payload[key] == pytest.approx(0.0, abs=1e-6)


def test_metrics_rejects_mismatched_predictions(capsys, tmp_path, toy_spec):
    manifest = _dataset(capsys, tmp_path / "data", n=2)
    predictions = tmp_path / "pred.jsonl"
    predictions.write_text(json.dumps({"params": BodyParams.zeros(toy_spec.joint_count).to_dict()}) + "\n",
                           encoding="utf-8")
    code, payload = _run(capsys, "metrics", "--gt", manifest, "--pred", predictions)
    assert code == 1
    assert payload["type"] == "SchemaError"
    code, payload = _run(capsys, "metrics", "--gt", manifest)
    assert code == 1


def test_render_depth_and_mesh(capsys, tmp_path, toy_spec):
    params = save_params(tmp_path / "p.json", BodyParams.zeros(toy_spec.joint_count))
    outputs = []
    for name in ("a.pfm", "b.pfm"):
        code, payload = _run(capsys, "render", "--params", params, "--out", tmp_path / name, "--width", 64,
                             "--height", 48, "--pitch-deg", 10)
        assert code == 0
        assert payload["coverage"] > 0 and 0.0 < payload["depth_min"] <= payload["depth_max"]
        outputs.append((tmp_path / name).read_bytes())
    assert outputs[0] == outputs[1]

    code, payload = _run(capsys, "render", "--params", params, "--out", tmp_path / "body.obj")
    assert code == 0
    assert payload["vertices"] == toy_spec.vertex_count


def test_render_rejects_bad_arguments(capsys, tmp_path, toy_spec):
    params = save_params(tmp_path / "p.json", BodyParams.zeros(toy_spec.joint_count))
    code, payload = _run(capsys, "render", "--params", params, "--out", tmp_path / "d.pfm", "--width", 0)
    assert code == 1 and payload["type"] == "DegenerateInputError"
    code, payload = _run(capsys, "render", "--params", params, "--out", tmp_path / "d.png")
    assert code == 1 and payload["type"] == "SchemaError"
    assert not (tmp_path / "d.png").exists()


def test_logs_go_to_stderr(capsys, tmp_path):
    code = main(["gen-dataset", "--n", "1", "--out", str(tmp_path), "--width", "64", "--height", "48",
                 "--log-level", "INFO"])
    captured = capsys.readouterr()
    assert code == 0
    assert json.loads(captured.out)["n_records"] == 1
    assert "record(s) written" in captured.err
    assert logging.getLogger("meshplug").level == logging.INFO
    main(["gen-dataset", "--n", "0", "--out", str(tmp_path / "quiet")])
    assert logging.getLogger("meshplug").level == logging.WARNING


@pytest.mark.parametrize(
    "argv",
    [
        ["metrics", "--gt", "m.jsonl", "--fov-deg", "40"],
        ["transform", "--params", "p.json", "--pitch-deg", "5", "--mask-ratio", "0.2"],
        ["fit", "--manifest", "m.jsonl", "--out", "o.jsonl", "--fov-deg", "40"],
        ["estimate-pitch", "--manifest", "m.jsonl", "--spec", "toy"],
    ],
)
def test_flags_are_scoped_to_their_subcommands(capsys, argv):
    with pytest.raises(SystemExit) as exit_info:
        main(argv)
    assert exit_info.value.code == 2
    assert "unrecognized arguments" in capsys.readouterr().err
