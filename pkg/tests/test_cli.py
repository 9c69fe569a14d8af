import json

import pytest

from deepkey import cli
from deepkey.config import Config


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Dataset + config + trained bundle shared by the CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    data = root / "data"
    assert cli.main(["gen", "--subjects", "3", "--sessions", "2",
                     "--seconds", "6", "--seed", "5", "--out", str(data)]) == 0
    cfg_path = root / "deepkey.cfg"
    Config(hidden=16, n_iter_eeg=60, n_iter_gait=60, gate_block=100,
           gate_max_train=500, batch_size=128, seed=7).dump(cfg_path)
    bundle = root / "model.dkey"
    assert cli.main(["train", "--data", str(data), "--config", str(cfg_path),
                     "--out", str(bundle), "--exclude-subjects", "2"]) == 0
    return root, data, cfg_path, bundle


class TestGen:
    def test_file_counts(self, workspace):
        _, data, _, _ = workspace
        assert len(list(data.glob("*.csv"))) == 3 * 2 * 2
        assert len(list(data.glob("*.meta"))) == 3 * 2 * 2
        manifest = json.loads((data / "manifest.json").read_text())
        assert manifest["seed"] == 5
        assert len(manifest["files"]) == 12

    def test_refuses_nonempty_dir(self, workspace, capsys):
        _, data, _, _ = workspace
        assert cli.main(["gen", "--subjects", "1", "--sessions", "1",
                         "--seconds", "1", "--out", str(data)]) == 2
        assert "not empty" in capsys.readouterr().err

    def test_force_overwrites(self, tmp_path):
        out = tmp_path / "d"
        for _ in range(2):
            code = cli.main(["gen", "--subjects", "1", "--sessions", "1",
                             "--seconds", "1", "--out", str(out), "--force"])
            assert code == 0

    def test_deterministic_output(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            cli.main(["gen", "--subjects", "2", "--sessions", "1",
                      "--seconds", "2", "--seed", "3", "--out", str(out)])
        for f in sorted(a.iterdir()):
            assert f.read_bytes() == (b / f.name).read_bytes()


class TestAuth:
    def test_genuine_pair(self, workspace, capsys):
        root, data, _, bundle = workspace
        log = root / "auth.log"
        code = cli.main(["auth", "--bundle", str(bundle),
                         "--eeg", str(data / "s00_sess0_eeg.csv"),
                         "--gait", str(data / "s00_sess0_gait.csv"),
                         "--log", str(log)])
        record = json.loads(capsys.readouterr().out.strip())
        assert code in (0, 1)
        assert (code == 0) == (record["verdict"] == "approve")
        assert set(record) >= {"verdict", "reason", "e_id", "g_id", "stage_timings"}
        logged = json.loads(log.read_text().strip())
        assert logged["verdict"] == record["verdict"]

    def test_swapped_modalities_exit_2(self, workspace, capsys):
        _, data, _, bundle = workspace
        code = cli.main(["auth", "--bundle", str(bundle),
                         "--eeg", str(data / "s00_sess0_gait.csv"),
                         "--gait", str(data / "s00_sess0_eeg.csv")])
        assert code == 2
        assert "error:" in capsys.readouterr().err


class TestEval:
    def test_reports_written(self, workspace, capsys):
        root, data, _, bundle = workspace
        out = root / "eval1"
        code = cli.main(["eval", "--bundle", str(bundle), "--data", str(data),
                         "--impostor-subjects", "2", "--out", str(out)])
        assert code == 0
        for name in ("summary.csv", "report_eeg.csv", "report_gait.csv",
                     "roc_eeg.csv", "roc_gait.csv"):
            assert (out / name).exists()
        summary = (out / "summary.csv").read_text()
        assert summary.startswith("metric,value")
        assert "far," in summary and "frr," in summary
        assert "FAR=" in capsys.readouterr().out

    def test_rerun_byte_identical(self, workspace):
        root, data, _, bundle = workspace
        outs = [root / "eval_a", root / "eval_b"]
        for out in outs:
            assert cli.main(["eval", "--bundle", str(bundle), "--data", str(data),
                             "--impostor-subjects", "2", "--out", str(out)]) == 0
        for f in sorted(outs[0].iterdir()):
            assert f.read_bytes() == (outs[1] / f.name).read_bytes()

    def test_datasize_sweep(self, workspace, capsys):
        root, data, cfg_path, bundle = workspace
        out = root / "sweep"
        code = cli.main(["eval", "--bundle", str(bundle), "--data", str(data),
                         "--datasize-sweep", "20,100", "--out", str(out)])
        assert code == 0
        lines = (out / "datasize_sweep.csv").read_text().splitlines()
        assert lines[0] == "fraction,eeg_accuracy"
        assert len(lines) == 3


class TestConfigEnv:
    def test_env_config_used(self, workspace, tmp_path, monkeypatch):
        _, data, _, _ = workspace
        bad = tmp_path / "bad.cfg"
        bad.write_text("nu = 2.0\n")
        monkeypatch.setenv("DEEPKEY_CONFIG", str(bad))
        assert cli.main(["train", "--data", str(data),
                         "--out", str(tmp_path / "m.dkey")]) == 2
