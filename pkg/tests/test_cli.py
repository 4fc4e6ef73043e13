import json

import pytest

from fisheye_reid.cli import main


def run_cli(*args):
    return main([str(a) for a in args])


class TestSimulateRunEvaluate:
    def test_full_flow(self, tmp_path, capsys):
        data = tmp_path / "data"
        out = tmp_path / "out"
        assert run_cli("simulate", "--scenario", "separated", "--people", 3,
                       "--cameras", 2, "--frames", 4, "--seed", 5, "--out", data) == 0
        assert (data / "detections.jsonl").exists()
        assert (data / "cameras.json").exists()

        assert run_cli("run", "--data", data, "--out", out,
                       "--features", "DL,LOC", "--loc-metric", "CBD") == 0
        captured = capsys.readouterr().out
        assert "DL+LOC/CBD" in captured
        assert (out / "report.txt").exists()
        assert (out / "report.json").exists()
        assert (out / "matches.jsonl").exists()

        report = json.loads((out / "report.json").read_text())
        assert report["pooled"]["cumulative"]["qms"] == 1.0

        out2 = tmp_path / "out2"
        assert run_cli("evaluate", "--matches", out / "matches.jsonl", "--out", out2) == 0
        recomputed = json.loads((out2 / "report.json").read_text())
        assert recomputed["pooled"] == report["pooled"]

    def test_ambiguity_scenario_simulation(self, tmp_path):
        data = tmp_path / "amb"
        assert run_cli("simulate", "--scenario", "appearance", "--frames", 3,
                       "--seed", 1, "--bbox-noise", 10, "--embedding-noise", 0.05,
                       "--hue-samples", 200, "--out", data) == 0
        assert (data / "detections.jsonl").exists()

    def test_per_feature_temperature_flag(self, tmp_path, capsys):
        data = tmp_path / "data"
        run_cli("simulate", "--people", 2, "--cameras", 2, "--frames", 2, "--out", data)
        out = tmp_path / "out"
        code = run_cli("run", "--data", data, "--out", out,
                       "--temperature", "DL=0.1,CH=0.1,LOC=100")
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["config"]["temperature"] == {"DL": 0.1, "CH": 0.1, "LOC": 100.0}

    def test_fold_file_flag(self, tmp_path):
        data = tmp_path / "data"
        run_cli("simulate", "--people", 4, "--cameras", 2, "--frames", 2, "--out", data)
        fold_file = tmp_path / "folds.json"
        fold_file.write_text(json.dumps({"p1": 0, "p2": 0, "p3": 1, "p4": 1}))
        out = tmp_path / "out"
        assert run_cli("run", "--data", data, "--out", out, "--fold-file", fold_file) == 0
        report = json.loads((out / "report.json").read_text())
        assert set(report["folds"]) == {"0", "1"}


class TestMatchCommand:
    def test_prints_matrices_and_matching(self, tmp_path, capsys):
        data = tmp_path / "data"
        run_cli("simulate", "--people", 2, "--cameras", 2, "--frames", 2, "--out", data)
        assert run_cli("match", "--data", data, "--frame", 1,
                       "--query-cam", "cam1", "--gallery-cam", "cam2") == 0
        out = capsys.readouterr().out
        assert "DL scores" in out
        assert "LOC scores" in out
        assert "fused (query rows)" in out
        assert "chosen orientation" in out

    def test_unknown_frame_is_ingestion_error(self, tmp_path, capsys):
        data = tmp_path / "data"
        run_cli("simulate", "--people", 2, "--cameras", 2, "--frames", 2, "--out", data)
        assert run_cli("match", "--data", data, "--frame", 99,
                       "--query-cam", "cam1", "--gallery-cam", "cam2") == 3


class TestExitCodes:
    def test_missing_dataset_is_ingestion_error(self, tmp_path):
        assert run_cli("run", "--data", tmp_path, "--out", tmp_path / "out") == 3

    def test_missing_calibration_is_configuration_error(self, tmp_path):
        data = tmp_path / "data"
        run_cli("simulate", "--people", 2, "--cameras", 2, "--frames", 2, "--out", data)
        (data / "cameras.json").unlink()
        assert run_cli("run", "--data", data, "--out", tmp_path / "out",
                       "--features", "LOC") == 2

    def test_bad_feature_list_is_configuration_error(self, tmp_path):
        data = tmp_path / "data"
        run_cli("simulate", "--people", 2, "--cameras", 2, "--frames", 2, "--out", data)
        assert run_cli("run", "--data", data, "--out", tmp_path / "out",
                       "--features", "DL,XX") == 2


class TestDeterminism:
    def test_simulate_and_run_twice_byte_identical(self, tmp_path):
        files = ("report.txt", "report.json", "matches.jsonl")
        outputs = []
        for tag in ("a", "b"):
            data = tmp_path / f"data_{tag}"
            out = tmp_path / f"out_{tag}"
            run_cli("simulate", "--people", 3, "--cameras", 2, "--frames", 3,
                    "--seed", 42, "--bbox-noise", 5, "--embedding-noise", 0.05,
                    "--hue-samples", 100, "--out", data)
            run_cli("run", "--data", data, "--out", out)
            outputs.append({f: (out / f).read_bytes() for f in files})
        assert outputs[0] == outputs[1]
