import json

import pytest
from click.testing import CliRunner

from stratnet.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def synth_inputs(runner, out_dir, **extra):
    args = ["synth", "--out", str(out_dir), "--n-nodes", "120",
            "--n-edges", "360", "--pareto-alpha", "3.0",
            "--n-classes", "3", "--seed", "13"]
    for k, v in extra.items():
        args += [f"--{k.replace('_', '-')}", str(v)]
    result = runner.invoke(main, args)
    assert result.exit_code == 0, result.output
    return out_dir


class TestSynthCommand:
    def test_writes_input_csvs(self, runner, tmp_path):
        d = synth_inputs(runner, tmp_path / "soc")
        for name in ("events.csv", "transactions.csv", "locations.csv"):
            assert (d / name).exists()

    def test_invalid_config_exits_one(self, runner, tmp_path):
        result = runner.invoke(main, ["synth", "--out", str(tmp_path),
                                      "--n-nodes", "4", "--n-edges", "100"])
        assert result.exit_code == 1
        assert "input error" in result.output


class TestValidateCommand:
    def test_clean_inputs(self, runner, tmp_path):
        d = synth_inputs(runner, tmp_path / "soc")
        result = runner.invoke(main, ["validate",
                                      "--events", str(d / "events.csv"),
                                      "--transactions",
                                      str(d / "transactions.csv")])
        assert result.exit_code == 0
        assert "no diagnostics" in result.output

    def test_bad_header_exits_one_and_names_file(self, runner, tmp_path):
        bad = tmp_path / "events.csv"
        bad.write_text("src,dst,when,kind,duration,cell_lat,cell_lon\n")
        result = runner.invoke(main, ["validate", "--events", str(bad)])
        assert result.exit_code == 1
        assert "events.csv" in result.output and "header" in result.output


class TestRunCommand:
    def test_end_to_end_round_trip(self, runner, tmp_path):
        d = synth_inputs(runner, tmp_path / "soc")
        out = tmp_path / "out"
        result = runner.invoke(main, [
            "run", "--events", str(d / "events.csv"),
            "--transactions", str(d / "transactions.csv"),
            "--locations", str(d / "locations.csv"),
            "--out", str(out), "--seed", "3", "--realizations", "3",
            "--n-classes", "3", "--segments", "10"])
        assert result.exit_code == 0, result.output
        assert "stage commute: done" in result.output
        report = json.loads((out / "report.json").read_text())
        assert report["metadata"]["seed"] == 3

    def test_missing_input_exits_one_naming_path(self, runner, tmp_path):
        result = runner.invoke(main, [
            "run", "--events", str(tmp_path / "absent.csv"),
            "--transactions", str(tmp_path / "absent2.csv"),
            "--out", str(tmp_path / "out")])
        assert result.exit_code == 1
        assert "absent" in result.output

    def test_single_stage_requires_upstream(self, runner, tmp_path):
        # classify before graph: its inputs are missing -> stage failure
        result = runner.invoke(main, ["classify", "--out",
                                      str(tmp_path / "out")])
        assert result.exit_code in (1, 2)
        assert result.exit_code != 0
