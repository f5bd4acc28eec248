"""End-to-end command-line tests.

These drive main() in-process (no subprocess) so coverage and tracebacks
stay useful. The pipeline fixture builds a deliberately tiny dataset and
model; only exit codes, file contents, and report fields are checked here,
accuracy quality is covered elsewhere.
"""
import json

import numpy as np
import pytest

from rfadv.cli import main, read_perturbation, write_perturbation
from rfadv.harness import ATTACK_KINDS, read_sweep_csv


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """synth + train once for the whole module; returns the artifact dir."""
    root = tmp_path_factory.mktemp("cli")
    ds = root / "ds.bin"
    model = root / "model.bin"
    rc = main(["synth", "--classes", "bpsk,qpsk,qam16,gfsk",
               "--snr-grid", "inf", "--per-class", "40", "--seed", "9",
               "--out", str(ds)])
    assert rc == 0
    rc = main(["train", "--data", str(ds), "--arch", "c8x5,d32",
               "--epochs", "10", "--lr", "0.2", "--seed", "1",
               "--out", str(model)])
    assert rc == 0
    return root


class TestPipeline:
    def test_artifacts_exist(self, pipeline):
        assert (pipeline / "ds.bin").exists()
        assert (pipeline / "model.bin").exists()
        metrics = json.loads((pipeline / "model.bin.metrics.json").read_text())
        assert metrics["flags"]["epochs"] == 10
        assert "train_accuracy" in metrics

    def test_eval_prints_accuracy(self, pipeline, capsys):
        rc = main(["eval", "--model", str(pipeline / "model.bin"),
                   "--data", str(pipeline / "ds.bin"), "--split", "test",
                   "--snr", "inf"])
        assert rc == 0
        out = capsys.readouterr().out
        assert out.startswith("accuracy=")
        acc = float(out.split()[0].split("=")[1])
        assert 0.0 <= acc <= 1.0

    def test_attack_noch_writes_report(self, pipeline, tmp_path):
        out = tmp_path / "delta.bin"
        rc = main(["attack", "--model", str(pipeline / "model.bin"),
                   "--data", str(pipeline / "ds.bin"), "--kind", "noch",
                   "--pnr", "0", "--seed", "4", "--index", "2",
                   "--out", str(out)])
        assert rc == 0
        delta, header = read_perturbation(out)
        assert delta.shape == (128,)
        assert np.iscomplexobj(delta)
        report = json.loads((tmp_path / "delta.bin.json").read_text())
        assert report["kind"] == "noch"
        assert report["target"] is not None
        assert len(report["eps_table"]) == 4
        assert report["flags"]["pnr_db"] == 0.0
        assert report["flags"]["index"] == 2
        # budget respected
        assert np.sum(np.abs(delta) ** 2) <= report["p_max"] * (1 + 1e-9)

    def test_attack_uap_limited(self, pipeline, tmp_path):
        out = tmp_path / "uap.bin"
        rc = main(["attack", "--model", str(pipeline / "model.bin"),
                   "--data", str(pipeline / "ds.bin"), "--kind", "uap-limited",
                   "--pnr", "5", "--seed", "4",
                   "--attack-params", '{"uap_count": 8, "uap_channels": 4}',
                   "--out", str(out)])
        assert rc == 0
        report = json.loads((tmp_path / "uap.bin.json").read_text())
        assert report["kind"] == "uap-limited"
        assert report["sign"] in (-1.0, 1.0)

    def test_attack_blackbox_needs_substitute(self, pipeline, tmp_path, capsys):
        rc = main(["attack", "--model", str(pipeline / "model.bin"),
                   "--data", str(pipeline / "ds.bin"), "--kind", "uap-blackbox",
                   "--pnr", "5", "--out", str(tmp_path / "x.bin")])
        assert rc == 1
        assert "substitute" in capsys.readouterr().err

    def test_sweep_and_plot(self, pipeline, tmp_path, capsys):
        cfg_path = tmp_path / "sweep.json"
        cfg_path.write_text(json.dumps({
            "model": str(pipeline / "model.bin"),
            "dataset": str(pipeline / "ds.bin"),
            "attacks": ["none", "noch"],
            "pnr_grid_db": [0.0],
            "snr_db": 10.0,
            "eval_snr_db": "inf",
            "trials": 6,
            "seed": 2}))
        csv_path = tmp_path / "rows.csv"
        rc = main(["sweep", "--config", str(cfg_path), "--out", str(csv_path)])
        assert rc == 0
        rows = read_sweep_csv(csv_path)
        assert {r.attack for r in rows} == {"none", "noch"}
        svg_path = tmp_path / "rows.svg"
        rc = main(["plot", "--csv", str(csv_path), "--out", str(svg_path)])
        assert rc == 0
        assert svg_path.read_text().startswith("<svg")


class TestErrors:
    def test_missing_model_file(self, tmp_path, capsys):
        rc = main(["eval", "--model", str(tmp_path / "nope.bin"),
                   "--data", str(tmp_path / "nope2.bin")])
        assert rc == 1
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert err.count("\n") == 1  # single line

    def test_unknown_kind_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["attack", "--model", "m", "--data", "d",
                  "--kind", "gradient-blast", "--pnr", "0", "--out", "o"])
        assert exc.value.code == 2

    def test_bad_attack_params_json(self, pipeline, tmp_path, capsys):
        rc = main(["attack", "--model", str(pipeline / "model.bin"),
                   "--data", str(pipeline / "ds.bin"), "--kind", "noch",
                   "--pnr", "0", "--attack-params", "{broken",
                   "--out", str(tmp_path / "x.bin")])
        assert rc == 1
        assert "error:" in capsys.readouterr().err

    def test_unknown_class_name(self, tmp_path, capsys):
        rc = main(["synth", "--classes", "bpsk,warble", "--per-class", "5",
                   "--out", str(tmp_path / "x.bin")])
        assert rc == 1
        assert "warble" in capsys.readouterr().err

    def test_bad_arch_token(self, pipeline, tmp_path, capsys):
        rc = main(["train", "--data", str(pipeline / "ds.bin"),
                   "--arch", "q99", "--epochs", "1",
                   "--out", str(tmp_path / "x.bin")])
        assert rc == 1
        assert "q99" in capsys.readouterr().err


class TestHelp:
    def test_help_lists_every_kind(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        for kind in ATTACK_KINDS:
            assert kind in out

    def test_attack_help_lists_kinds(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["attack", "--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        assert "uap-blackbox" in out


class TestDataDir:
    def test_relative_paths_use_env_dir(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("RFADV_DATA_DIR", str(tmp_path))
        rc = main(["synth", "--classes", "bpsk,qpsk", "--snr-grid", "inf",
                   "--per-class", "6", "--out", "rel.bin"])
        assert rc == 0
        assert (tmp_path / "rel.bin").exists()

    def test_absolute_paths_ignore_env_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("RFADV_DATA_DIR", str(tmp_path / "elsewhere"))
        target = tmp_path / "abs.bin"
        rc = main(["synth", "--classes", "bpsk,qpsk", "--snr-grid", "inf",
                   "--per-class", "6", "--out", str(target)])
        assert rc == 0
        assert target.exists()


class TestPerturbationFile:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        delta = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        path = tmp_path / "d.bin"
        write_perturbation(path, delta, {"kind": "noch", "p_max": 2.0})
        back, header = read_perturbation(path)
        assert np.array_equal(back, delta)
        assert header["kind"] == "noch"
        assert header["p"] == 64
