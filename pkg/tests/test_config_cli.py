import json
import os

import numpy as np
import pytest

import degenls as dl
from degenls.cli import main
from degenls.exceptions import InvalidParameterError


def test_config_roundtrip_lossless(tmp_path):
    cfg = dl.RunConfig(d=2, a=0.3, p=2.7182818284590451, omega=1.5, n=1024,
                       r_max=33.25, grid_gamma=1.75, tol=3e-9, max_iter=1234,
                       t_final=2.5, dt=0.0025, lambda_scale=1.1,
                       sweep_a_values=(0.0, 0.125), sweep_p_values=(2.0, 2.5),
                       seed=99, shoot=True, eigenfunctions=True)
    path = tmp_path / "run.ini"
    dl.save_config(cfg, path)
    assert dl.load_config(path) == cfg


def test_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[model]\nd = 1\nbogus = 3\n")
    with pytest.raises(InvalidParameterError):
        dl.load_config(path)
    path.write_text("[nosuch]\nx = 1\n")
    with pytest.raises(InvalidParameterError):
        dl.load_config(path)


def _write(tmp_path, body):
    path = tmp_path / "cfg.ini"
    path.write_text(body)
    return str(path)


ANCHOR = """
[model]
d = 1
a = 0.0
p = 3.0

[grid]
n = 4096
r_max = 20.0
gamma = 1.0

[solver]
pohozaev_threshold = 1e-5
"""


def test_cli_missing_config_is_usage_error(tmp_path, capsys):
    assert main(["groundstate", "--config", str(tmp_path / "none.ini")]) == 64


def test_cli_bad_flags_are_usage_errors():
    assert main(["frobnicate"]) == 64
    assert main(["groundstate"]) == 64          # --config required


def test_cli_invalid_window_exits_2(tmp_path, capsys):
    cfg = _write(tmp_path, "[model]\nd = 3\na = 0.5\np = 5.0\n")
    code = main(["groundstate", "--config", cfg, "--out", str(tmp_path)])
    assert code == 2
    payload = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert payload["error"] == "existence-window"


def test_cli_groundstate_outputs(tmp_path, capsys):
    cfg = _write(tmp_path, ANCHOR)
    out = tmp_path / "gs"
    assert main(["groundstate", "--config", cfg, "--out", str(out)]) == 0
    rows = (out / "profile.csv").read_text().splitlines()
    assert rows[0] == "rho,phi"
    assert len(rows) == 4097
    minimizer = json.loads((out / "minimizer_report.json").read_text())
    assert minimizer["kappa"] == pytest.approx(16.0 / 3.0, rel=1e-3)
    identities = json.loads((out / "identity_report.json").read_text())
    assert identities["mass"] == pytest.approx(4.0, rel=1e-4)


def test_cli_spectrum_outputs(tmp_path):
    cfg = _write(tmp_path, ANCHOR + "\n[spectral]\neigenfunctions = true\n")
    out = tmp_path / "sp"
    assert main(["spectrum", "--config", cfg, "--out", str(out)]) == 0
    report = json.loads((out / "spectral_report.json").read_text())
    assert report["verdict"] == "Stable" and report["n_plus"] == 1
    assert (out / "eigenfunctions.csv").exists()


def test_cli_evolve_outputs(tmp_path):
    cfg = _write(tmp_path, ANCHOR.replace("n = 4096", "n = 1024") + """
[dynamics]
t_final = 0.02
dt = 0.001
""")
    out = tmp_path / "ev"
    assert main(["evolve", "--config", cfg, "--out", str(out)]) == 0
    trace = (out / "trace.csv").read_text().splitlines()
    assert trace[0] == "t,V,P,mass,energy,gradnorm,Lp1_norm"
    assert len(trace) == 22
    summary = json.loads((out / "evolution_summary.json").read_text())
    assert summary["blowup_flag"] is False
    assert summary["mass_drift"] < 1e-9
    assert (out / "final_state.csv").exists()


SWEEP = """
[sweep]
d = 1
a_values = 0.0
p_values = 3.0, 7.0
n = 8192
tail_decades = 7.0
"""


def test_cli_sweep_deterministic(tmp_path):
    cfg = _write(tmp_path, SWEEP)
    out1, out2 = tmp_path / "s1", tmp_path / "s2"
    assert main(["sweep", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["sweep", "--config", cfg, "--out", str(out2)]) == 0
    b1 = (out1 / "sweep.csv").read_bytes()
    assert b1 == (out2 / "sweep.csv").read_bytes()
    rows = b1.decode().splitlines()
    assert rows[0].startswith("a,p,p_c,slope,n_plus,gap_minus")
    assert len(rows) == 3
    stable = rows[1].split(",")
    unstable = rows[2].split(",")
    assert stable[6] == stable[7] == "Stable"
    assert unstable[6] == unstable[7] == "Unstable"


def test_cli_sweep_empty_grid(tmp_path):
    cfg = _write(tmp_path, "[sweep]\nd = 1\na_values =\np_values = 3.0\n")
    out = tmp_path / "empty"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    rows = (out / "sweep.csv").read_text().splitlines()
    assert len(rows) == 1          # header only


def test_cli_sweep_invalid_point_recorded_in_row(tmp_path):
    cfg = _write(tmp_path, "[sweep]\nd = 3\na_values = 0.5\np_values = 5.0\nn = 1024\n")
    out = tmp_path / "bad"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    rows = (out / "sweep.csv").read_text().splitlines()
    assert len(rows) == 2
    assert rows[1].endswith("existence-window")


def test_cli_threads_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("DEGENLS_THREADS", "2")
    cfg = _write(tmp_path, SWEEP.replace("3.0, 7.0", "3.0"))
    out = tmp_path / "thr"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    assert (out / "sweep.csv").exists()
