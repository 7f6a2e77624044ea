import csv
import json
import subprocess
import sys

import pytest

from noveltynas.cli import DEFAULTS, load_config, main, resolve_config
from noveltynas.exceptions import ConfigError

SMALL = ["--generations", "4", "--population-size", "8", "--workers", "1"]


def run(*argv):
    return main([str(a) for a in argv])


def test_search_writes_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    assert run("search", "--seed", 1, "--out", out, *SMALL) == 0
    assert {p.name for p in out.iterdir()} == {"manifest.json", "result.json", "telemetry.csv"}
    result = json.loads((out / "result.json").read_text())
    assert result["mode"] == "multi" and result["seed"] == 1
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["resolved"]["generations"] == 4
    assert capsys.readouterr().out.startswith("best |")
    assert not [p for p in tmp_path.iterdir() if p.name.startswith(".run.")]


def test_search_is_byte_reproducible(tmp_path):
    for name in ("a", "b"):
        assert run("search", "--seed", 3, "--out", tmp_path / name, *SMALL, "--noise-sigma", 0.03) == 0
    for fname in ("result.json", "telemetry.csv"):
        assert (tmp_path / "a" / fname).read_bytes() == (tmp_path / "b" / fname).read_bytes()


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('mode = "accuracy-only"\ngenerations = 3\npopulation_size = 6\nseed = 9\nworkers = 1\n')
    out = tmp_path / "run"
    assert run("search", "--config", cfg, "--seed", 2, "--out", out) == 0
    result = json.loads((out / "result.json").read_text())
    assert result["mode"] == "accuracy-only"
    assert result["seed"] == 2
    assert len(result["history"]) == 3


def test_resolve_config_rules():
    cfg = resolve_config({}, {})
    assert cfg["noise_seed"] == cfg["seed"] == 0 and cfg["workers"] >= 1
    assert resolve_config({"seed": 4}, {"seed": None})["seed"] == 4
    for bad in ({"generations": "ten"}, {"mode": "x"}, {"space": "s9"}, {"noise_sigma": -1},
                {"population_size": 5}, {"oracle": "nothing"}, {"k": 0}):
        with pytest.raises(ConfigError):
            resolve_config(bad, {})


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("popsize = 3\n")
    with pytest.raises(ConfigError) as info:
        load_config(cfg)
    assert info.value.field == "popsize"
    assert run("search", "--config", cfg, "--out", tmp_path / "r") == 1
    assert set(DEFAULTS) >= {"mode", "seed", "oracle"}


def test_exit_codes(tmp_path, capsys):
    assert run("search", "--mode", "multi", "--oracle", f"tabular:{tmp_path / 'nope.csv'}",
               "--out", tmp_path / "r", *SMALL) == 2
    assert run("search", "--space", "s1", "--out", tmp_path / "r", *SMALL) == 1
    assert run("enumerate", "--space", "s1") == 1
    assert not (tmp_path / "r").exists()
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("analyze", bad, "--out", tmp_path / "an") == 2
    err = capsys.readouterr().err
    assert "error:" in err


def test_tabular_search_with_missing_key_exits_data(tmp_path):
    bench = tmp_path / "b.csv"
    bench.write_text("key,val_acc,test_acc\n|none~0|+|none~0|none~1|+|none~0|none~1|none~2|,50,50\n")
    with pytest.warns(UserWarning):
        code = run("search", "--oracle", f"tabular:{bench}", "--out", tmp_path / "r", *SMALL)
    assert code == 2


def test_enumerate(tmp_path, capsys):
    out = tmp_path / "keys.txt"
    assert run("enumerate", "--output", out) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == len(set(lines)) == 15625
    assert "count 15625" in capsys.readouterr().err
    assert run("enumerate", "--oracle", "synthetic:0", "--output", out) == 0
    err = capsys.readouterr().err
    from noveltynas import make_synthetic
    assert f"argmax {make_synthetic('S2', 0).optimum_key} 0.95" in err


def test_gen_benchmark_and_tabular_search(tmp_path):
    bench = tmp_path / "bench.csv"
    assert run("gen-benchmark", "--seed", 2, "--out", bench) == 0
    assert len(bench.read_text().splitlines()) == 15626
    meta = json.loads(bench.with_suffix(".meta.json").read_text())
    assert meta["seed"] == 2 and "optimum_key" in meta
    assert run("search", "--oracle", f"tabular:{bench}", "--out", tmp_path / "r", *SMALL) == 0
    assert run("gen-benchmark", "--space", "s1", "--out", bench) == 1
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run("gen-benchmark", "--out", blocker / "x.csv") == 3


def test_analyze(tmp_path, capsys):
    paths = []
    for seed in (0, 1):
        out = tmp_path / f"r{seed}"
        assert run("search", "--seed", seed, "--out", out, *SMALL) == 0
        paths.append(out / "result.json")
    capsys.readouterr()
    an = tmp_path / "an"
    assert run("analyze", *paths, "--out", an) == 0
    div = list(csv.reader((an / "diversity.csv").open()))
    assert div[0] == ["gen", "run0_result", "run1_result"]
    assert len(div) == 1 + 4
    text = capsys.readouterr().out
    assert "best true_score" in text and "±" in text
    assert run("analyze", *paths, "--out", an, "--oracle", "synthetic:0") == 0
    rows = list(csv.reader((an / "exploration.csv").open()))
    assert len(rows) == 1 + 15625
    flags = sum(int(r[2]) for r in rows[1:])
    assert flags == len(json.loads(paths[0].read_text())["explored"])


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "noveltynas", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip()
