"""Batch CLI: files on disk, byte identity with the service, exit codes."""

from __future__ import annotations

import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from runlens import RunRegistry, canonical_bytes, load_run_history, write_run_history
from runlens.cli import main
from runlens.service import create_app


@pytest.fixture(scope="module")
def sim_file(sim_history, tmp_path_factory) -> Path:
    directory = tmp_path_factory.mktemp("runs")
    path = directory / "sim.json"
    write_run_history(sim_history, str(path))
    return path


def test_analyze_writes_the_response_and_prints_the_path(sim_file, tmp_path, capsys):
    code = main(["analyze", "overview", str(sim_file), "--out", str(tmp_path)])
    assert code == 0
    out_file = tmp_path / "overview.json"
    assert out_file.exists()
    assert json.loads(out_file.read_bytes())["run"]["run_id"] == "sim"
    assert str(out_file) in capsys.readouterr().out


def test_analyze_coverage_also_writes_the_embedding_csv(sim_file, tmp_path):
    assert main(["analyze", "coverage", str(sim_file), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "coverage.json").exists()
    csv_lines = (tmp_path / "coverage-embedding.csv").read_text().splitlines()
    assert csv_lines[0] == "point_id,x,y,kind,performance,timestamp"


def test_cli_bytes_match_service_bytes(sim_file, tmp_path):
    assert main(["analyze", "coverage", str(sim_file), "--out", str(tmp_path),
                 "--seed", "0"]) == 0
    registry = RunRegistry(seed=0)
    registry.add_file(str(sim_file))
    with TestClient(create_app(registry)) as client:
        response = client.get("/runs/sim/coverage")
    assert (tmp_path / "coverage.json").read_bytes() == response.content


def test_parameters_become_filename_suffixes(sim_file, tmp_path):
    assert main(["analyze", "sampling", str(sim_file), "--out", str(tmp_path),
                 "--hyperparameter", "classifier:max_depth"]) == 0
    assert (tmp_path / "sampling-hyperparameter-classifier_max_depth.json").exists()


def test_merge_graph_writes_dot(sim_file, tmp_path):
    assert main(["analyze", "merge-graph", str(sim_file), "--out", str(tmp_path)]) == 0
    dot = (tmp_path / "merge-graph.dot").read_text()
    assert dot.startswith("digraph")
    assert main(["analyze", "merge-graph", str(sim_file), "--out", str(tmp_path),
                 "--at", "2"]) == 0
    assert (tmp_path / "merge-graph-at-2.0.dot").exists()


def test_merge_graph_rejects_foreign_flags(sim_file, tmp_path, capsys):
    code = main(["analyze", "merge-graph", str(sim_file), "--out", str(tmp_path),
                 "--candidate", "c001"])
    assert code == 2
    assert capsys.readouterr().err.startswith("error:")


def test_export_writes_the_artifact(sim_file, tmp_path, sim_history):
    code = main(["export", "config", str(sim_file), "--out", str(tmp_path),
                 "--candidate", "c001"])
    assert code == 0
    content = (tmp_path / "config-c001.json").read_bytes()
    assert content == canonical_bytes(dict(sim_history.candidate("c001").config))


def test_missing_run_file_is_exit_2(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("RUNLENS_RUN", raising=False)
    code = main(["analyze", "overview", "--out", str(tmp_path)])
    assert code == 2
    assert "no run file" in capsys.readouterr().err


def test_unknown_candidate_is_exit_2(sim_file, tmp_path, capsys):
    code = main(["analyze", "report", str(sim_file), "--out", str(tmp_path),
                 "--candidate", "ghost"])
    assert code == 2
    assert capsys.readouterr().err.startswith("error:")


def test_unreadable_run_file_is_exit_2(tmp_path, capsys):
    code = main(["analyze", "overview", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path)])
    assert code == 2
    assert capsys.readouterr().err.startswith("error:")


def test_unknown_operation_fails_argument_parsing(sim_file, tmp_path):
    with pytest.raises(SystemExit):
        main(["analyze", "horoscope", str(sim_file), "--out", str(tmp_path)])


def test_environment_variables_fill_in_defaults(sim_file, tmp_path, monkeypatch):
    monkeypatch.setenv("RUNLENS_RUN", str(sim_file))
    monkeypatch.setenv("RUNLENS_OUT", str(tmp_path))
    assert main(["analyze", "leaderboard"]) == 0
    assert (tmp_path / "leaderboard.json").exists()


def test_explicit_flags_beat_the_environment(sim_file, tmp_path, monkeypatch):
    decoy = tmp_path / "decoy"
    real = tmp_path / "real"
    monkeypatch.setenv("RUNLENS_RUN", str(sim_file))
    monkeypatch.setenv("RUNLENS_OUT", str(decoy))
    assert main(["analyze", "overview", "--out", str(real)]) == 0
    assert (real / "overview.json").exists()
    assert not decoy.exists()


def test_run_round_trips_through_the_file(sim_file, sim_history):
    reloaded = load_run_history(str(sim_file))
    assert reloaded.run_id == sim_history.run_id
    assert len(reloaded.candidates) == len(sim_history.candidates)
    assert reloaded.dataset.n_rows == sim_history.dataset.n_rows
