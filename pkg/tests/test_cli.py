import json

import pytest

from mobpredict.cli import main

CONFIG = """
methods = MC, LZ, BWT, NN
nn.arch = cnn
nn.device_sample = 2
nn.hidden = 8
nn.embed = 4
seq_lens = 3
windows = 900
synth.flutes = 4
synth.cellos = 4
synth.days = 8
"""


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    cfg = d / "run.cfg"
    cfg.write_text(CONFIG)

    def run(*args):
        return main([str(a) for a in args])

    assert run("synth", "--config", cfg, "--seed", 3, "--out", d / "syn") == 0
    assert run("ingest", d / "syn" / "trace.txt", "--out", d / "ing") == 0
    assert run("summarize", "--records", d / "ing" / "records.txt", "--oui", d / "syn" / "oui_map.csv",
               "--out", d / "sum") == 0
    assert run("evaluate", "--config", cfg, "--records", d / "ing" / "records.txt",
               "--devices", d / "sum" / "devices.csv", "--out", d / "ev") == 0
    assert run("correlate", "--records", d / "ing" / "records.txt", "--accuracies", d / "ev" / "accuracies.csv",
               "--coords", d / "syn" / "coords.csv", "--out", d / "cor") == 0
    assert run("report", "--config", cfg, "--eval", d / "ev", "--correlations", d / "cor" / "correlations.csv",
               "--out", d / "rep") == 0
    return d, cfg, run


def test_report_has_all_artifacts(pipeline):
    d, _, _ = pipeline
    names = {p.name for p in (d / "rep").iterdir()}
    assert {"matrix.csv", "entropy.csv", "correlations.csv", "run_meta.json"} <= names
    assert any(n.startswith("ecdf_") for n in names)
    meta = json.loads((d / "rep" / "run_meta.json").read_text())
    assert meta["notes"] == []


def test_discretize_and_entropy(pipeline):
    d, _, run = pipeline
    assert run("discretize", "--records", d / "ing" / "records.txt", "--devices", d / "sum" / "devices.csv",
               "--spatial", "building", "--window", 3600, "--tmax", 1800, "--out", d / "ser") == 0
    series = sorted((d / "ser").glob("*.series"))
    kept = (d / "sum" / "population.txt").read_text().split()
    assert len(series) == len(kept) > 0
    assert series[0].read_text().splitlines()[0].split(",")[2:4] == ["building", "3600"]
    assert run("entropy", "--series", d / "ser", "--out", d / "ent") == 0
    rows = (d / "ent" / "entropy.csv").read_text().splitlines()
    assert len(rows) == len(series) + 1


def test_refuses_existing_output(pipeline, capsys):
    d, cfg, run = pipeline
    assert run("report", "--config", cfg, "--eval", d / "ev", "--out", d / "rep") == 2
    assert "--force" in capsys.readouterr().err
    assert run("report", "--config", cfg, "--eval", d / "ev", "--out", d / "rep", "--force") == 0


def test_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["evaluate", "--out", str(tmp_path)])
    assert exc.value.code == 1


def test_bad_config_exit_code(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense.key = 3\n")
    assert main(["synth", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1


def test_missing_input_exit_code(tmp_path):
    assert main(["ingest", str(tmp_path / "missing.txt"), "--out", str(tmp_path / "o")]) == 2


def test_same_seed_same_matrix(pipeline):
    d, cfg, run = pipeline
    assert run("evaluate", "--config", cfg, "--records", d / "ing" / "records.txt",
               "--devices", d / "sum" / "devices.csv", "--out", d / "ev2") == 0
    assert (d / "ev" / "matrix.csv").read_bytes() == (d / "ev2" / "matrix.csv").read_bytes()


def test_transitions_only_flag(pipeline):
    d, cfg, run = pipeline
    assert run("evaluate", "--config", cfg, "--transitions-only", "--records", d / "ing" / "records.txt",
               "--devices", d / "sum" / "devices.csv", "--out", d / "ev_tr") == 0
    meta = json.loads((d / "ev_tr" / "eval_meta.json").read_text())
    assert meta["config"]["transitions_only"] is True
    assert (d / "ev" / "matrix.csv").read_bytes() != (d / "ev_tr" / "matrix.csv").read_bytes()
