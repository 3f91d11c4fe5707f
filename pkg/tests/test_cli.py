import csv
import json

import numpy as np
import pytest

from flolearn import cli
from flolearn.cli import ConfigError, ScenarioConfig, export_ground_truth, load_ground_truth, main
from flolearn.learn.report import OracleCapWarning
from flolearn.matlin import haar_special_orthogonal, haar_unitary, rng_stream


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


@pytest.mark.parametrize(
    "argv",
    [
        ["passive", "--eps", "0"],
        ["passive", "--eps", "1.5"],
        ["passive", "--delta", "1"],
        ["slater", "--n", "3", "--eta", "4"],
        ["passive", "--trials", "0"],
        ["bootstrap-sweep", "--eps0", "0.2"],
        ["passive", "--eps", "abc"],
    ],
)
def test_bad_configs_exit_nonzero(argv, tmp_path, capsys):
    assert main(argv + ["--out-dir", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err


def test_unknown_config_key():
    with pytest.raises(ConfigError):
        ScenarioConfig.from_mapping({"scenario": "passive", "colour": "blue"})


def test_config_file_and_flag_precedence(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"scenario": "passive", "n": 2, "eps": [0.3], "trials": 2}))
    out = tmp_path / "out"
    assert main(["passive", "--config", str(conf), "--trials", "1", "--out-dir", str(out)]) == 0
    rows = read_rows(out / "results.csv")
    assert len(rows) == 1
    assert rows[0]["n"] == "2" and rows[0]["eps"] == "0.3"
    assert rows[0]["wall_ms"] == ""
    assert tuple(rows[0]) == cli.CSV_COLUMNS


def test_config_for_another_scenario(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"scenario": "active"}))
    assert main(["passive", "--config", str(conf), "--out-dir", str(tmp_path)]) == 2


class TestGroundTruth:
    def test_round_trip_is_exact(self, tmp_path):
        for M in (haar_unitary(3, rng_stream(0)), haar_special_orthogonal(6, rng_stream(1))):
            export_ground_truth(tmp_path / "m.json", M)
            assert np.array_equal(load_ground_truth(tmp_path / "m.json"), M)

    def test_identity(self, tmp_path):
        export_ground_truth(tmp_path / "id.json", np.eye(4, dtype=complex))
        assert np.array_equal(load_ground_truth(tmp_path / "id.json", 4), np.eye(4))

    def test_nearly_unitary_input_is_rounded(self, tmp_path):
        export_ground_truth(tmp_path / "m.json", 1.01 * haar_unitary(3, rng_stream(2)))
        with pytest.warns(UserWarning, match="rounding"):
            M = load_ground_truth(tmp_path / "m.json")
        assert np.allclose(M.conj().T @ M, np.eye(3))

    def test_wrong_size(self, tmp_path):
        export_ground_truth(tmp_path / "m.json", np.eye(5))
        with pytest.raises(ConfigError):
            load_ground_truth(tmp_path / "m.json", 3)

    def test_learned_from_file(self, tmp_path):
        U = haar_unitary(3, rng_stream(3))
        export_ground_truth(tmp_path / "u.json", U)
        out = tmp_path / "out"
        assert main(["passive", "--n", "3", "--truth", str(tmp_path / "u.json"), "--out-dir", str(out)]) == 0
        doc = json.loads((out / "report.json").read_text())
        est = doc["reports"][0]["estimate"]
        U_hat = np.array(est["real"]).reshape(3, 3) + 1j * np.array(est["imag"]).reshape(3, 3)
        assert np.linalg.norm(U_hat - U, 2) <= 0.25


def test_reruns_are_byte_identical(tmp_path):
    paths = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert main(["active", "--n", "2", "--eps", "0.3", "--trials", "2", "--seed", "5", "--out-dir", str(out)]) == 0
        paths.append(out / "results.csv")
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_oracle_cap_downgrades_to_operator_norm(tmp_path):
    out = tmp_path / "out"
    with pytest.warns(OracleCapWarning):
        assert main(["passive", "--n", "3", "--oracle-cap", "2", "--out-dir", str(out)]) == 0
    row = read_rows(out / "results.csv")[0]
    assert row["diamond_err"] == "" and row["op_err"] != ""


def test_sweep_writes_scaling_and_traces(tmp_path):
    out = tmp_path / "sweep"
    argv = ["bootstrap-sweep", "--scenario", "synthetic", "--n", "2", "--eps", "0.1,0.05", "--out-dir", str(out)]
    assert main(argv) == 0
    scaling = read_rows(out / "scaling.csv")
    assert [r["T"] for r in scaling] == ["4", "5"]
    assert 1.8 <= float(scaling[1]["ratio"]) <= 2.2
    assert (out / "traces" / "eps1_trial0.csv").exists()


def test_out_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_DIR_ENV, str(tmp_path))
    assert ScenarioConfig("gauss").output_dir() == tmp_path / "gauss"


@pytest.mark.slow
def test_verify_passes(tmp_path):
    assert main(["verify", "--out-dir", str(tmp_path)]) == 0
    assert all(r["passed"] == "true" for r in read_rows(tmp_path / "results.csv"))
