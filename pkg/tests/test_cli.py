import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from radiocov.raytrace import load_coverage
from radiocov.scene import scene_to_json

from conftest import scene_with_tx


def run_cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "radiocov.cli", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
        timeout=600,
    )


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Scenes on disk plus simulated rasters, dataset and checkpoint."""
    root = tmp_path_factory.mktemp("cli")
    scenes = root / "scenes"
    scenes.mkdir()
    positions = [(10, 24), (12, 22), (38, 24), (40, 26), (11, 26), (39, 22)]
    for i, (tx, ty) in enumerate(positions):
        scene = scene_with_tx(48, 8, seed=300 + i, tx_x=tx, tx_y=ty)
        (scenes / f"s{i}.json").write_text(scene_to_json(scene))

    for i in range(len(positions)):
        result = run_cli(
            "simulate",
            "--scene", str(scenes / f"s{i}.json"),
            "--out", str(scenes / f"s{i}.rcov"),
            "--reflections", "2",
            "--rays", "512",
            "--max-path", "150",
        )
        assert result.returncode == 0, result.stderr

    dataset = root / "frames.ds"
    result = run_cli(
        "build-dataset",
        "--in", str(scenes),
        "--out", str(dataset),
        "--frames", "16",
        "--stride", "1",
        "--padding", "5",
    )
    assert result.returncode == 0, result.stderr

    ckpt = root / "model.ckpt"
    result = run_cli(
        "train",
        "--dataset", str(dataset),
        "--out", str(ckpt),
        "--model", "unet",
        "--width-scale", "0.125",
        "--epochs", "2",
        "--batch", "16",
        "--seed", "1",
    )
    assert result.returncode == 0, result.stderr
    return {"root": root, "scenes": scenes, "dataset": dataset, "ckpt": ckpt,
            "train_stdout": result.stdout}


class TestPipeline:
    def test_simulate_wrote_valid_rasters(self, workspace):
        grid = load_coverage(workspace["scenes"] / "s0.rcov")
        assert (grid.width, grid.height) == (48, 48)
        assert np.isfinite(grid.power_dbm).all()

    def test_train_emitted_json_report_and_table(self, workspace):
        lines = workspace["train_stdout"].strip().splitlines()
        report = json.loads(lines[0])
        assert "best_test_mae_norm" in report and report["stopped_epoch"] >= 1
        assert "# of parameters" in workspace["train_stdout"]

    def test_eval_reports_metrics(self, workspace):
        result = run_cli(
            "eval", "--dataset", str(workspace["dataset"]),
            "--checkpoint", str(workspace["ckpt"]),
        )
        assert result.returncode == 0, result.stderr
        metrics = json.loads(result.stdout.strip().splitlines()[-1])
        assert set(metrics) == {"mae_norm", "mae_dbm", "rmse_norm"}
        assert metrics["mae_norm"] > 0.0

    def test_eval_identity_is_zero(self, workspace):
        result = run_cli("eval", "--dataset", str(workspace["dataset"]), "--identity")
        assert result.returncode == 0, result.stderr
        metrics = json.loads(result.stdout.strip().splitlines()[-1])
        assert metrics == {"mae_norm": 0.0, "mae_dbm": 0.0, "rmse_norm": 0.0}

    def test_predict_writes_raster_and_png(self, workspace):
        scene_path = workspace["root"] / "predict_scene.json"
        scene = scene_with_tx(16, 3, seed=900, tx_x=8, tx_y=8)
        scene_path.write_text(scene_to_json(scene))
        out = workspace["root"] / "pred.rcov"
        png = workspace["root"] / "pred.png"
        result = run_cli(
            "predict", "--scene", str(scene_path),
            "--checkpoint", str(workspace["ckpt"]),
            "--out", str(out), "--png", str(png),
        )
        assert result.returncode == 0, result.stderr
        grid = load_coverage(out)
        assert (grid.width, grid.height) == (16, 16)
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


class TestFailures:
    def test_missing_scene_file(self, tmp_path):
        result = run_cli("simulate", "--scene", str(tmp_path / "no.json"),
                         "--out", str(tmp_path / "o.rcov"))
        assert result.returncode == 1
        assert result.stderr.startswith("error=")

    def test_bad_scene_document(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{broken")
        result = run_cli("simulate", "--scene", str(bad), "--out", str(tmp_path / "o.rcov"))
        assert result.returncode == 1
        assert result.stderr.startswith("error=scene-parse")

    def test_empty_dataset_dir(self, tmp_path):
        result = run_cli("build-dataset", "--in", str(tmp_path), "--out",
                         str(tmp_path / "d.ds"))
        assert result.returncode == 1
        assert result.stderr.startswith("error=bad-format")
