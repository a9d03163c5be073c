"""End-to-end command-line behavior with reduced parameter grids."""

import json

import pytest

import pamicnet.cli as cli
import pamicnet.evaluation as evaluation
from pamicnet.dataset import load_dataset
from pamicnet.filters import MicParams, amplitude_phase_sweep
from pamicnet.training import load_checkpoint

from conftest import small_specs


@pytest.fixture()
def tiny_specs_cli(monkeypatch):
    """Point the pipeline at reduced grids so CLI runs stay fast."""
    monkeypatch.setattr(cli, "mic_grid_specs", small_specs)
    monkeypatch.setattr(evaluation, "mic_grid_specs", small_specs)
    return small_specs()


@pytest.fixture()
def generated(tmp_path, tiny_specs_cli):
    dataset = tmp_path / "data.csv"
    assert cli.main(["generate", "--dataset", str(dataset), "--seed", "3"]) == 0
    return dataset


@pytest.fixture()
def trained(tmp_path, generated):
    checkpoint = tmp_path / "model.json"
    code = cli.main(
        ["train", "--dataset", str(generated), "--checkpoint", str(checkpoint),
         "--epochs", "30", "--lr", "3e-3", "--batch-size", "64", "--seed", "3"]
    )
    assert code == 0
    return checkpoint


class TestUsage:
    def test_no_subcommand(self, capsys):
        assert cli.main([]) == 1
        assert "usage" in capsys.readouterr().err

    def test_unknown_subcommand(self, capsys):
        assert cli.main(["frobnicate"]) == 1
        assert "usage" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        assert cli.main(["generate", "--bogus"]) == 1


class TestGenerate:
    def test_writes_csv_and_sidecar(self, generated):
        data = load_dataset(generated)
        assert data.n_records == 729
        assert data.n_features == 300
        assert data.norm is not None
        meta = json.loads(generated.with_suffix(".json").read_text())
        assert meta["seed"] == 3
        assert len(meta["specs"]) == 3

    def test_restricted_range(self, tmp_path, tiny_specs_cli):
        dataset = tmp_path / "r.csv"
        assert cli.main(["generate", "--dataset", str(dataset), "--range", "restricted"]) == 0
        assert load_dataset(dataset).n_features == 140

    def test_byte_identical_reruns(self, tmp_path, tiny_specs_cli):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert cli.main(["generate", "--dataset", str(a), "--seed", "5"]) == 0
        assert cli.main(["generate", "--dataset", str(b), "--seed", "5"]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert a.with_suffix(".json").read_bytes() == b.with_suffix(".json").read_bytes()


class TestTrain:
    def test_writes_checkpoint_and_history(self, tmp_path, trained, capsys):
        model, saved = load_checkpoint(trained)
        assert model.dims == [300, 25, 12, 3]
        assert saved.final["test_acc"] >= 0.99
        history = trained.with_name("model_history.csv")
        lines = history.read_text().splitlines()
        assert lines[0].startswith("epoch,train_loss")
        assert len(lines) == 31

    def test_byte_identical_checkpoints(self, tmp_path, generated):
        outs = []
        for name in ("m1.json", "m2.json"):
            path = tmp_path / name
            code = cli.main(
                ["train", "--dataset", str(generated), "--checkpoint", str(path),
                 "--epochs", "3", "--seed", "9"]
            )
            assert code == 0
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]

    def test_missing_dataset_is_data_error(self, tmp_path, capsys):
        code = cli.main(["train", "--dataset", str(tmp_path / "nope.csv")])
        assert code == 2


class TestEval:
    def test_report_files_and_battery(self, tmp_path, generated, trained, capsys):
        out = tmp_path / "reports"
        code = cli.main(
            ["eval", "--dataset", str(generated), "--checkpoint", str(trained),
             "--out", str(out), "--seed", "4"]
        )
        assert code == 0
        stdout = capsys.readouterr().out
        assert "accuracy (train, dev, test)" in stdout
        assert "15/15" in stdout
        payload = json.loads((out / "eval_report.json").read_text())
        assert payload["independent_tests"]["n_correct"] == 15
        assert (out / "eval_report.txt").exists()


class TestClassify:
    def sweep_file(self, path, model, params):
        amp, phase = amplitude_phase_sweep(params, model.grid)
        lines = ["frequency_hz,amplitude,phase_rad"]
        for f, a, ph in zip(model.grid.points, amp, phase):
            lines.append(f"{f:.17g},{a:.17g},{ph:.17g}")
        path.write_text("\n".join(lines) + "\n")

    def test_classifies_synthesized_sweep(self, tmp_path, trained, capsys):
        model, _ = load_checkpoint(trained)
        sweep = tmp_path / "sweep.csv"
        # an ECM60-type microphone, parameters inside the class ranges
        self.sweep_file(sweep, model, MicParams(15.3, 8333.0, 8400.0, 0.21, 0.07))
        code = cli.main(["classify", str(sweep), "--checkpoint", str(trained)])
        assert code == 0
        out = capsys.readouterr().out
        assert "label: 1 (ECM60)" in out
        assert "probabilities:" in out

    def test_grid_mismatch_is_data_error(self, tmp_path, trained, capsys):
        model, _ = load_checkpoint(trained)
        sweep = tmp_path / "sweep.csv"
        self.sweep_file(sweep, model, MicParams(25.0, 9000.0, 14000.0, 0.5, 0.5))
        text = sweep.read_text().splitlines()
        parts = text[1].split(",")
        parts[0] = str(float(parts[0]) * 1.01)  # 1% off the checkpoint grid
        text[1] = ",".join(parts)
        sweep.write_text("\n".join(text) + "\n")
        assert cli.main(["classify", str(sweep), "--checkpoint", str(trained)]) == 2

    def test_wrong_columns_is_data_error(self, tmp_path, trained):
        sweep = tmp_path / "sweep.csv"
        sweep.write_text("a,b\n1,2\n")
        assert cli.main(["classify", str(sweep), "--checkpoint", str(trained)]) == 2


class TestBench:
    def test_prints_latency(self, trained, capsys):
        assert cli.main(["bench", "--checkpoint", str(trained)]) == 0
        out = capsys.readouterr().out
        assert "median" in out and "ms" in out


class TestCurves:
    def test_writes_curve_csv(self, tmp_path, tiny_specs_cli, capsys):
        out = tmp_path / "plots"
        assert cli.main(["curves", "--out", str(out)]) == 0
        path = out / "curves_full.csv"
        lines = path.read_text().splitlines()
        assert lines[0] == "class,curve_id,frequency_hz,amplitude,phase_rad"
        assert len(lines) == 1 + 3 * 10 * 150


class TestConfigPrecedence:
    def test_flag_beats_config_beats_env(self, tmp_path, monkeypatch, tiny_specs_cli):
        monkeypatch.setenv("PAMICNET_SEED", "111")
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"seed": 222}))

        dataset = tmp_path / "env.csv"
        assert cli.main(["generate", "--dataset", str(dataset)]) == 0
        assert json.loads(dataset.with_suffix(".json").read_text())["seed"] == 111

        dataset = tmp_path / "cfgfile.csv"
        assert cli.main(["generate", "--dataset", str(dataset), "--config", str(config)]) == 0
        assert json.loads(dataset.with_suffix(".json").read_text())["seed"] == 222

        dataset = tmp_path / "flag.csv"
        code = cli.main(
            ["generate", "--dataset", str(dataset), "--config", str(config), "--seed", "333"]
        )
        assert code == 0
        assert json.loads(dataset.with_suffix(".json").read_text())["seed"] == 333

    def test_unknown_config_key_is_schema_error(self, tmp_path, capsys):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"sede": 1}))
        assert cli.main(["generate", "--config", str(config)]) == 2
        assert "unknown config keys" in capsys.readouterr().err
