import csv
import io
import json
import shutil
import subprocess
from pathlib import Path

import pytest

from qtomo import __version__
from qtomo.cli import bound_main, hardcase_main, mi_main, mic_main, qtomo_main, tomo_main
from qtomo.experiments import ConfigError, ExperimentConfig, parse_override, write_csv_rows
from qtomo.state import random_state

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write(path, text):
    path.write_text(text)
    return path


def scaling_config(tmp_path, **grid):
    g = {"n_qubits": [1], "copies": [90, 900], "reps": 40, **grid}
    lines = [f"{k} = {json.dumps(v)}" for k, v in g.items()]
    return write(tmp_path / "s.toml", 'kind = "scaling"\nseed = 3\n[grid]\n' + "\n".join(lines))


def test_version(capsys):
    assert qtomo_main(["version"]) == 0
    assert capsys.readouterr().out.strip() == __version__


def test_scaling_run_reproducible(tmp_path, capsys):
    cfg = scaling_config(tmp_path)
    assert qtomo_main(["run", "--config", str(cfg), "--output-dir", str(tmp_path / "a")]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] is True
    assert qtomo_main(["run", "--config", str(cfg), "--output-dir", str(tmp_path / "b"),
                       "--threads", "3"]) == 0
    a = (tmp_path / "a" / "scaling.csv").read_bytes()
    assert a == (tmp_path / "b" / "scaling.csv").read_bytes()
    rows = list(csv.DictReader(io.StringIO(a.decode())))
    assert len(rows) == 2 and all(r["seed"] for r in rows)
    assert b"\r\n" in a
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["version"] == __version__ and manifest["seeds"] == [[3, 0], [3, 1]]


def test_seventeen_digit_csv():
    buf = io.StringIO()
    write_csv_rows(buf, [{"x": 0.1, "ok": True, "seed": (1, 2)}])
    assert buf.getvalue() == "x,ok,seed\r\n0.10000000000000001,true,1:2\r\n"


def test_hardcase_run_reproducible(tmp_path):
    cfg = write(tmp_path / "h.toml", "seed = 5\n[grid]\nn_qubits = [2, 3]\ntrials = 30\n")
    for name in ("a", "b"):
        assert qtomo_main(["hardcase", "--config", str(cfg), "--output-dir",
                           str(tmp_path / name)]) == 0
    for f in ("hardcase_trials.csv", "hardcase_summary.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    rows = list(csv.DictReader(open(tmp_path / "a" / "hardcase_summary.csv")))
    assert all("good_frequency" in r for r in rows)
    trials = list(csv.DictReader(open(tmp_path / "a" / "hardcase_trials.csv")))
    assert trials[0]["seed"] == "5:0:0" and len(trials) == 60


def test_certify_campaign(tmp_path):
    cfg = write(tmp_path / "c.toml", "seed = 1\n[grid]\nn_qubits = [3]\nmin_weight = [3]\n"
                                     "trials = 10000\n")
    assert qtomo_main(["certify", "--config", str(cfg), "--output-dir", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "certify.json").read_text())
    assert report["verdict"] and report["reports"][0]["rhs"] == 1


def test_bound_calc_ten_qubits(capsys):
    code = bound_main(["calc", "--n-qubits", "10", "--eps", "0.1"])
    out = json.loads(capsys.readouterr().out)
    assert out["chain"]["ten_power_split_exact"] is True
    assert out["checks"]["ten_power_split_exact"]
    # d exp(-l^{1/4}) is not below sqrt(N)/10^N at N = 10, so the chain verdict fails
    assert out["checks"]["concentration_below_first_term"] is False
    assert code == 1


def test_bound_calc_passing(capsys):
    assert bound_main(["calc", "--n-qubits", "20", "--eps", "0.1"]) == 0


def test_mic_eval(tmp_path, capsys):
    povm = write(tmp_path / "p.json", '{"basis": "ZZ"}')
    assert mic_main(["eval", "--povm", str(povm), "--min-weight", "2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["spectral_quantity"] == pytest.approx(1) and out["weight_bound"] == 1
    assert mic_main(["eval", "--povm", str(povm), "--min-weight", "5"]) == 2


def test_mic_certify(capsys):
    assert mic_main(["certify", "--trials", "100", "--n-qubits", "2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert [r["terms"]["min_weight"] for r in out["reports"]] == [1, 2]


def test_mi_exact(tmp_path, capsys):
    cfg = write(tmp_path / "m.json", '{"n_qubits": 1, "copies": [0, 3], "strategies": ["z", "flip"]}')
    assert mi_main(["exact", "--config", str(cfg), "--out", str(tmp_path / "o.json")]) == 0
    out = json.loads((tmp_path / "o.json").read_text())
    assert len(out["results"]) == 4 and out["verdict"]
    bad = write(tmp_path / "b.json", '{"strategy": "nope"}')
    assert mi_main(["exact", "--config", str(bad)]) == 2


def test_tomo_run(tmp_path, capsys):
    state = write(tmp_path / "s.json", random_state(1, 3).to_json())
    assert tomo_main(["run", "--state", str(state), "--copies", "300", "--seed", "4",
                      "--project"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["seed"] == 4 and len(out["observables"]) == 3
    assert tomo_main(["run", "--state", str(state), "--copies", "2", "--seed", "4"]) == 2


def test_tomo_rejects_invalid_state(tmp_path):
    bad = write(tmp_path / "s.json", json.dumps({"n_qubits": 1, "re": [[1.5, 0], [0, -0.5]],
                                                 "im": [[0, 0], [0, 0]]}))
    assert tomo_main(["run", "--state", str(bad), "--copies", "9", "--seed", "1"]) == 2


def test_hardcase_gen_and_sweep(tmp_path, capsys):
    assert hardcase_main(["gen", "--n-qubits", "2", "--seed", "3"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert len(out["z"]) == out["ell"] == 9 and out["clip"] == 1
    assert hardcase_main(["sweep", "--n-qubits", "3", "--seed", "3", "--trials", "5",
                          "--out", str(tmp_path / "s.csv")]) == 0
    assert hardcase_main(["sweep", "--n-qubits", "3", "--seed", "3", "--trials", "5"]) == 0
    assert capsys.readouterr().out.encode() == (tmp_path / "s.csv").read_bytes()


@pytest.mark.parametrize("text", [
    "seed = 1\n[grid]\n",                                       # empty grid
    "[grid]\nn_qubits = [2]\n",                                 # no seed
    "seed = 1\n[grid]\nn_qubits = [1]\ncopies = [2]\n",         # n < 3^N
    "seed = 1\nbogus = 2\n[grid]\nn_qubits = [1]\ncopies = [9]\n",
    "seed = 1\n[grid\n",                                        # not TOML
])
def test_malformed_config_exits_2(tmp_path, text, capsys):
    cfg = write(tmp_path / "bad.toml", 'kind = "scaling"\n' + text)
    assert qtomo_main(["run", "--config", str(cfg)]) == 2
    assert "error" in capsys.readouterr().err


def test_usage_errors_exit_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        qtomo_main(["frobnicate"])
    assert exc.value.code == 2
    assert qtomo_main(["run", "--config", str(tmp_path / "missing.toml")]) == 2
    cfg = write(tmp_path / "h.toml", 'kind = "bound"\nseed = 1\n[grid]\nn_qubits = [3]\n')
    assert qtomo_main(["hardcase", "--config", str(cfg)]) == 2


def test_verdict_failure_exits_1(tmp_path):
    cfg = write(tmp_path / "b.toml", "seed = 0\n[grid]\nn_qubits = [10]\n")
    assert qtomo_main(["bound", "--config", str(cfg), "--output-dir", str(tmp_path)]) == 1


def test_overrides_and_env(tmp_path, monkeypatch):
    cfg = scaling_config(tmp_path)
    c = ExperimentConfig.load(cfg, dict([parse_override("grid.reps=7"), ("seed", 9)]))
    assert c.grid["reps"] == 7 and c.seed == 9
    assert parse_override("grid.state=random") == ("grid.state", "random")
    monkeypatch.setenv("QTOMO_THREADS", "3")
    assert c.workers() == 3
    monkeypatch.setenv("QTOMO_THREADS", "x")
    with pytest.raises(ConfigError):
        c.workers()
    other = ExperimentConfig.load(cfg, {"grid.reps": 8})
    assert other.config_hash != c.config_hash


def test_config_json_accepted(tmp_path):
    cfg = write(tmp_path / "c.json", json.dumps({"kind": "bound", "seed": 1,
                                                 "grid": {"n_qubits": [12]}}))
    assert ExperimentConfig.load(cfg).grid == {"n_qubits": [12]}


@pytest.mark.parametrize("name", ["scaling", "hardcase", "certify", "mi", "bound"])
def test_shipped_configs_parse(name):
    assert ExperimentConfig.load(CONFIGS / f"{name}.toml").kind == name


def test_console_script_exit_code():
    exe = shutil.which("bound")
    if exe is None:
        pytest.skip("package not installed")
    out = subprocess.run([exe, "calc", "--n-qubits", "12", "--eps", "0.1"],
                         capture_output=True, text=True)
    assert out.returncode == 1  # N = 12 misses the entropy lower bracket
    assert json.loads(out.stdout)["checks"]["stirling_lower_holds"] is False
