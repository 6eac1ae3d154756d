from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from vorocil.cli import main


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def workspace(runner, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli")
    result = runner.invoke(
        main,
        [
            "synth",
            "--out", str(out),
            "--classes", "6",
            "--dims", "8",
            "--samples", "30",
            "--spread", "9",
            "--seed", "3",
            "--phases", "3,3",
        ],
    )
    assert result.exit_code == 0, result.output
    return out


def test_synth_reports_files(runner, workspace):
    assert (workspace / "manifest.ini").exists()
    assert (workspace / "train_embedding.ivfs").exists()
    assert (workspace / "test_embedding.ivfs").exists()


def test_run_and_report(runner, workspace):
    out = workspace / "run_out"
    result = runner.invoke(
        main,
        [
            "run",
            "--manifest", str(workspace / "manifest.ini"),
            "--out", str(out),
            "--mode", "D",
            "--epochs", "5",
        ],
    )
    assert result.exit_code == 0, result.output
    assert "last accuracy" in result.output
    assert (out / "report.json").exists()

    again = workspace / "run_out_again"
    result = runner.invoke(
        main,
        ["report", "--from-json", str(out / "report.json"), "--out", str(again)],
    )
    assert result.exit_code == 0, result.output
    assert (again / "report.json").read_bytes() == (out / "report.json").read_bytes()
    assert (again / "accuracy_curve.svg").read_bytes() == (out / "accuracy_curve.svg").read_bytes()


def test_inspect_outputs_json(runner, workspace):
    result = runner.invoke(main, ["inspect", str(workspace / "train_embedding.ivfs")])
    assert result.exit_code == 0, result.output
    data = json.loads(result.output)
    assert data["format"] == "IVFS"
    assert data["n_dims"] == 8


def test_config_error_exit_code(runner, workspace):
    result = runner.invoke(
        main,
        [
            "run",
            "--manifest", str(workspace / "manifest.ini"),
            "--out", str(workspace / "bad"),
            "--mode", "ACAI",
        ],
    )
    assert result.exit_code == 2
    assert "config" in result.output or "config" in (result.stderr or "")


def test_data_error_exit_code(runner, tmp_path):
    result = runner.invoke(
        main,
        ["run", "--manifest", str(tmp_path / "missing.ini"), "--out", str(tmp_path / "o")],
    )
    assert result.exit_code == 3


def test_synth_validates_phase_list(runner, tmp_path):
    result = runner.invoke(
        main,
        [
            "synth",
            "--out", str(tmp_path),
            "--classes", "4",
            "--dims", "2",
            "--samples", "5",
            "--phases", "oops",
        ],
    )
    assert result.exit_code == 2
