import json
import os

import pytest

from morselab.cli import (EXIT_CONFIG, EXIT_OK, EXIT_SPEC, EXIT_USAGE, run_command)
from morselab.config import ConfigError, ExperimentConfig, load_config

CONFIGS = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


def cfg_path(name):
    return os.path.abspath(os.path.join(CONFIGS, name))


@pytest.mark.parametrize("name", ["wright.json", "stable.json", "difference.json", "cyclic2.json"])
def test_config_roundtrip(name):
    cfg = load_config(cfg_path(name))
    again = ExperimentConfig.from_json(cfg.to_json())
    assert again == cfg
    assert again.to_json() == cfg.to_json()


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"system": {}, "plots": {}})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"system": {}, "scan": {"sedes": 3}})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json("{not json")


def test_wright_config_builds(main_system, main_kernel):
    cfg = load_config(cfg_path("wright.json"))
    assert cfg.build_system() == main_system
    assert cfg.build_kernel() == main_kernel


def run(capsys, *argv):
    code = run_command(list(argv))
    return code, capsys.readouterr()


def test_tau(capsys):
    code, out = run(capsys, "tau", "--config", cfg_path("wright.json"))
    rec = json.loads(out.out)
    assert code == EXIT_OK and rec["within_bounds"]
    assert rec["lower"] <= rec["tau"] <= rec["upper"]


def test_spectrum(capsys):
    code, out = run(capsys, "spectrum", "--config", cfg_path("wright.json"))
    rec = json.loads(out.out)
    assert code == EXIT_OK and rec["m_star"] == 2 and rec["n_star"] == 2


def test_lyapunov(capsys):
    code, out = run(capsys, "lyapunov", "--config", cfg_path("wright.json"))
    rec = json.loads(out.out)
    assert code == EXIT_OK
    assert rec["V"] % 2 == 1 and rec["parity_branch"] == "V-" and rec["verdict"]["in_R"]


def test_simulate_writes_under_outdir(capsys, tmp_path):
    code, out = run(capsys, "simulate", "--config", cfg_path("wright.json"), "--horizon", "20",
                    "--out", str(tmp_path))
    assert code == EXIT_OK
    assert (tmp_path / "trajectory.csv").exists() and (tmp_path / "trajectory.json").exists()


def test_morse_scan_is_deterministic(capsys, tmp_path):
    reports = []
    for sub in ("a", "b"):
        code, _ = run(capsys, "morse-scan", "--config", cfg_path("wright.json"), "--seeds", "3",
                      "--horizon", "40", "--out", str(tmp_path / sub))
        assert code == EXIT_OK
        rep = json.loads((tmp_path / sub / "morse_report.json").read_text())
        rep.pop("generated_at")
        reports.append(json.dumps(rep, sort_keys=True))
    assert reports[0] == reports[1]


def test_difference_scan(capsys, tmp_path):
    code, out = run(capsys, "difference-scan", "--config", cfg_path("difference.json"),
                    "--steps", "100", "--out", str(tmp_path))
    assert code == EXIT_OK
    assert json.loads(out.out)["violations"] == {}


def test_error_codes(capsys, tmp_path):
    assert run(capsys, "nonsense")[0] == EXIT_USAGE
    assert run(capsys, "tau", "--config", str(tmp_path / "missing.json"))[0] == EXIT_CONFIG
    bad = json.loads(open(cfg_path("wright.json")).read())
    bad["system"]["nonlinearities"][0]["gain"] = 2.0
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(bad))
    assert run(capsys, "tau", "--config", str(p))[0] == EXIT_SPEC
    assert run(capsys, "difference-scan", "--config", cfg_path("wright.json"))[0] == EXIT_CONFIG


def test_verify_quick(capsys):
    code, out = run(capsys, "verify", "--quick")
    assert code == EXIT_OK
    assert out.out.count("[PASS]") == 12
