"""Command line behaviour and exit codes, driven in-process."""

import json

import pytest

from kidlearn.cli import main


def write_config(tmp_path, **overrides):
    cfg = {"conditions": ["predef"], "steps": 4,
           "population": {"size": 2}, "seed": 1}
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def test_validate_ok(tmp_path, capsys):
    path = write_config(tmp_path)
    assert main(["validate", "--config", str(path)]) == 0
    assert "valid" in capsys.readouterr().out


def test_validate_reports_problems(tmp_path, capsys):
    path = write_config(tmp_path, steps=0)
    assert main(["validate", "--config", str(path)]) == 1
    assert "steps" in capsys.readouterr().err


def test_validate_missing_file(tmp_path, capsys):
    assert main(["validate", "--config", str(tmp_path / "nope.json")]) == 1
    assert "error:" in capsys.readouterr().err


def test_validate_space_document(tmp_path, capsys):
    doc = {"primary_group": "g",
           "groups": [{"id": "g", "parameters": [
               {"id": "p", "values": [{"id": "1"}]}]}]}
    path = tmp_path / "space.json"
    path.write_text(json.dumps(doc))
    assert main(["validate", "--config", str(path)]) == 0


def test_run_writes_bundle(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "run"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    shown = capsys.readouterr().out
    assert "run complete" in shown
    assert "seed: 1" in shown
    assert (out / "manifest.json").is_file()


def test_run_seed_override(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "run"
    assert main(["run", "--config", str(cfg), "--out", str(out),
                 "--seed", "9"]) == 0
    assert "seed: 9" in capsys.readouterr().out
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["seed"] == 9


def test_run_rejects_invalid_config(tmp_path, capsys):
    cfg = write_config(tmp_path, conditions=["alien"])
    assert main(["run", "--config", str(cfg),
                 "--out", str(tmp_path / "x")]) == 1
    assert "alien" in capsys.readouterr().err


def test_run_rejects_a_manifest_as_config(tmp_path, capsys):
    # Feeding a run's manifest back to --config must not silently run
    # the default experiment.
    cfg = write_config(tmp_path)
    out = tmp_path / "run"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    capsys.readouterr()
    assert main(["run", "--config", str(out / "manifest.json"),
                 "--out", str(tmp_path / "again")]) == 1
    assert "unknown config keys" in capsys.readouterr().err


def test_run_dump_weights(tmp_path):
    cfg = write_config(tmp_path, conditions=["zpdes"], steps=3)
    out = tmp_path / "run"
    assert main(["run", "--config", str(cfg), "--out", str(out),
                 "--dump-weights"]) == 0
    dumps = list((out / "traces" / "zpdes").glob("weights_*.jsonl"))
    assert len(dumps) == 2


def test_report_from_run(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "run"
    main(["run", "--config", str(cfg), "--out", str(out)])
    capsys.readouterr()
    report = tmp_path / "report"
    assert main(["report", "--traces", str(out / "traces"),
                 "--out", str(report)]) == 0
    assert "scores.csv" in capsys.readouterr().out
    assert (report / "chronograph.csv").is_file()


def test_report_missing_traces(tmp_path, capsys):
    assert main(["report", "--traces", str(tmp_path / "nothing"),
                 "--out", str(tmp_path / "o")]) == 1
    assert "error:" in capsys.readouterr().err


def test_sweep(tmp_path, capsys):
    cfg = write_config(tmp_path, conditions=["zpdes"], steps=3)
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(cfg), "--param", "bandit.gamma",
                 "--values", "0.0,0.3", "--out", str(out)]) == 0
    shown = capsys.readouterr().out
    assert "bandit.gamma = 0.0" in shown
    assert (out / "sweep_summary.csv").is_file()


def test_sweep_bad_value(tmp_path, capsys):
    cfg = write_config(tmp_path, conditions=["zpdes"], steps=3)
    assert main(["sweep", "--config", str(cfg), "--param", "bandit.gamma",
                 "--values", "2.5", "--out", str(tmp_path / "s")]) == 1
    assert "gamma" in capsys.readouterr().err


def test_unreachable_server_is_a_runtime_error(tmp_path, capsys):
    cfg = write_config(tmp_path)
    code = main(["--server", "http://127.0.0.1:1",
                 "validate", "--config", str(cfg)])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_unknown_command_exits_via_argparse():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
