import json
import subprocess
import sys

import numpy as np
import pytest

from hypshadow.cli import RunConfig, clean, main, parse_table, run
from hypshadow.mapmodel import builtin_map
from hypshadow.plotting import read_columns
from hypshadow.shadow import jump_pseudo_orbit


@pytest.fixture
def ini(tmp_path):
    def write(text, name="run.ini"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return write


@pytest.fixture
def pseudo_file(tmp_path):
    f = builtin_map("det2-perturbed")
    p = jump_pseudo_orbit(f, [0.1, 0.2], 800, [300], 1e-6, seed=1)
    path = tmp_path / "pseudo.txt"
    path.write_text(p.to_text())
    return str(path)


def test_analyze_json(capsys):
    assert main(["analyze"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["spectrum"]["hyperbolic"]
    assert rec["spectrum"]["exponents"][0] == pytest.approx(1.22795, abs=1e-4)
    assert rec["config"]["map"]["matrix"] == "3 1; 1 1"
    assert rec["config"]["analyze"]["eta"] == "0.1"


def test_analyze_identity_not_hyperbolic(ini, capsys):
    code = main(["analyze", "--config", ini("[map]\nmatrix = 1 0; 0 1\n")])
    rec = json.loads(capsys.readouterr().out)
    assert code == 0
    assert rec["spectrum"]["hyperbolic"] is False
    assert rec["charts"] is None


def test_table_format(capsys):
    main(["analyze", "--format", "table"])
    rows = parse_table(capsys.readouterr().out)
    assert rows["spectrum.hyperbolic"] == "True"
    assert rows["config.map.matrix"] == "3 1; 1 1"


@pytest.mark.parametrize(
    "text",
    [
        "[map]\nmatrix = 1 0; 0\n",
        "[nosuch]\nx = 1\n",
        "[analyze]\nbogus = 1\n",
        "[analyze]\neta = fast\n",
    ],
)
def test_config_errors_exit_2(ini, text, capsys):
    assert main(["analyze", "--config", ini(text)]) == 2
    rec = json.loads(capsys.readouterr().out)
    assert rec["error"] == "ConfigError"


def test_missing_config_and_pseudo(capsys):
    assert main(["analyze", "--config", "/nonexistent.ini"]) == 2
    assert main(["shadow"]) == 2


def test_bad_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["analyze", "--format", "xml"])
    assert exc.value.code == 2


def test_numerical_failure_exit_3(ini, tmp_path, capsys):
    f = builtin_map("det2-perturbed")
    big = jump_pseudo_orbit(f, [0.1, 0.2], 600, [300], 0.05, seed=3)
    path = tmp_path / "big.txt"
    path.write_text(big.to_text())
    cfg = ini("[map]\nbuiltin = det2-perturbed\n")
    assert main(["shadow", "--config", cfg, "--pseudo", str(path)]) == 3
    rec = json.loads(capsys.readouterr().out)
    assert rec["error"] == "EpsilonTooLarge"


def test_shadow_record(ini, pseudo_file, tmp_path):
    cfg = ini("[map]\nbuiltin = det2-perturbed\n")
    out = tmp_path / "s.json"
    code, _ = run(["shadow", "--config", cfg, "--pseudo", pseudo_file, "--out", str(out), "--plot-dir", str(tmp_path / "p")])
    assert code == 0
    rec = json.loads(out.read_text())
    cert = rec["certificate"]
    assert cert["certified"]
    assert cert["max_distance"] <= cert["certified_bound"]
    assert rec["jump_indices"] == [299]
    header, data = read_columns(tmp_path / "p" / "shadow_distance.dat")
    assert header == ["index", "distance"] and data.shape == (800, 2)
    assert (tmp_path / "p" / "shadow_distance.png").stat().st_size > 0


def test_deterministic_reruns(ini, pseudo_file):
    cfg = ini("[map]\nbuiltin = det2-perturbed\n[run]\nseed = 5\n")
    a = run(["shadow", "--config", cfg, "--pseudo", pseudo_file])[1]
    b = run(["shadow", "--config", cfg, "--pseudo", pseudo_file])[1]
    assert a == b
    c = run(["analyze", "--config", cfg, "--format", "table"])[1]
    d = run(["analyze", "--config", cfg, "--format", "table"])[1]
    assert c == d


def test_census_small(ini, capsys):
    cfg = ini("[map]\nbuiltin = cat\n[census]\nn_max = 4\ngrid_density = 40\n")
    assert main(["census", "--config", cfg, "--format", "table"]) == 0
    out = capsys.readouterr().out
    assert "degree_check.degree" in out
    rows = [l.split() for l in out.splitlines() if l.strip() and l.split()[0].isdigit()]
    assert [int(r[1]) for r in rows] == [1, 5, 16, 45]


def test_seed_override():
    cfg = RunConfig.load(None, seed=9)
    assert cfg.seed == 9


def test_clean_non_finite():
    assert clean({"a": float("inf"), "b": np.float64(1.5), "c": np.arange(2)}) == {"a": None, "b": 1.5, "c": [0, 1]}


def test_module_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "hypshadow", "analyze", "--format", "json"], capture_output=True, text=True, check=True
    )
    assert json.loads(out.stdout)["command"] == "analyze"
