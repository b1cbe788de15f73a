import csv
import json
import subprocess
import sys

import pytest

from conftest import CONFIGS
from terasense import cli
from terasense.physics import read_spectrum_csv


def run(tmp_path, command, config, *extra, name="out.csv"):
    cfg = tmp_path / f"{command}.json"
    cfg.write_text(json.dumps(config) if isinstance(config, dict) else config)
    out = tmp_path / name
    code = cli.main([command, "--config", str(cfg), "--out", str(out), "--jobs", "1", *extra])
    return code, out


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


SMALL_SWEEP = {
    "source": {"kind": "materials", "names": ["alumina", "chalk", "salt"]},
    "per_class": 10, "snr_db": [0, 20, "inf"], "folds": 5, "repetitions": 1,
    "extractors": [{"name": "pca", "components": 4}, {"name": "none"}],
    "classifiers": [{"name": "lda"}, {"name": "knn", "params": {"k": 3}}],
}

GAS = json.loads((CONFIGS / "gas.json").read_text())

DETERMINISM_CASES = {
    "synth-gas": {**GAS, "points": 300, "snr_db": 30},
    "ingest-materials": {"input": "builtin", "names": ["salt", "talc"]},
    "preprocess": {"input": "builtin", "method": "snv"},
    "features": {"input": "builtin", "per_class": 5, "snr_db": 20, "extractor": "pca", "components": 3},
    "bench-sweep": SMALL_SWEEP,
    "fds-sense": {"band": [1e11, 1e12], "per_class": 10, "folds": 5, "repetitions": 1,
                  "snr_db": [20, "inf"], "plans": [{"strategy": "uniform", "count": 5}]},
    "spike-detect": {**json.loads((CONFIGS / "spike.json").read_text()), "points": 500},
}


@pytest.mark.parametrize("command", sorted(DETERMINISM_CASES))
def test_subcommand_deterministic(tmp_path, command):
    config = DETERMINISM_CASES[command]
    c1, a = run(tmp_path, command, config, name="a.csv")
    c2, b = run(tmp_path, command, config, name="b.csv")
    assert c1 == c2 == 0
    assert a.read_bytes() == b.read_bytes() and a.stat().st_size > 0


def test_synth_gas_shipped_config(tmp_path):
    code, out = run(tmp_path, "synth-gas", (CONFIGS / "gas.json").read_text())
    assert code == 0
    with open(out) as fh:
        spec = read_spectrum_csv(fh)
    assert len(spec.frequencies) == 2000 and min(spec.values) >= 0


def test_seed_flag_changes_noise(tmp_path):
    config = {**GAS, "points": 50, "snr_db": 10}
    _, a = run(tmp_path, "synth-gas", config, "--seed", "1", name="a.csv")
    _, b = run(tmp_path, "synth-gas", config, "--seed", "2", name="b.csv")
    assert a.read_bytes() != b.read_bytes()


def test_bench_sweep_row_count(tmp_path):
    code, out = run(tmp_path, "bench-sweep", SMALL_SWEEP)
    assert code == 0
    body = rows(out)[1:]
    assert len(body) == 3 * 2 * 2
    assert {r[0] for r in body} == {"0", "20", "inf"}


def test_features_then_classify(tmp_path):
    _, feats = run(tmp_path, "features", DETERMINISM_CASES["features"], name="f.csv")
    code, out = run(tmp_path, "classify", {"train": str(feats), "classifier": "lda"})
    assert code == 0
    table = rows(out)
    assert table[0][:3] == ["index", "label", "predicted"] and len(table) == 101


def test_spike_detect_output(tmp_path):
    code, out = run(tmp_path, "spike-detect", DETERMINISM_CASES["spike-detect"])
    assert code == 0
    flags = dict(rows(out)[1:])
    assert flags["H2O"] == "1"


def test_missing_config_flag_exits_2(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "terasense.cli", "synth-gas", "--out", str(tmp_path / "x.csv")],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and "--config" in proc.stderr


@pytest.mark.parametrize("command, config, message", [
    ("synth-gas", "{not json", "valid JSON"),
    ("synth-gas", {"points": 10}, "band"),
    ("synth-gas", {**GAS, "quantity": "phase"}, "quantity"),
    ("bench-sweep", {"bogus": 1}, "unknown config field"),
    ("ingest-materials", {"names": ["unobtainium"]}, "unknown materials"),
    ("classify", {"train": "/nonexistent/table.csv", "classifier": "lda"}, "table.csv"),
])
def test_error_paths_exit_1(tmp_path, capsys, command, config, message):
    code, out = run(tmp_path, command, config)
    assert code == 1
    assert message in capsys.readouterr().err
    assert not out.exists()


def test_missing_config_file_exit_1(tmp_path, capsys):
    code = cli.main(["synth-gas", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o.csv")])
    assert code == 1 and "not found" in capsys.readouterr().err


def test_failed_cells_exit_1_but_write(tmp_path):
    config = {**SMALL_SWEEP, "per_class": 2, "folds": 2, "snr_db": [10],
              "extractors": [{"name": "none"}], "classifiers": [{"name": "lda"}, {"name": "gnb"}]}
    code, out = run(tmp_path, "bench-sweep", config)
    assert code == 1 and len(rows(out)) == 3


def test_console_script_version():
    proc = subprocess.run([sys.executable, "-m", "terasense.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("terasense ")
