import csv
import os

import pytest

from finitesum.cli import main

CONFIG = """
problem = synth_logistic
n = 50
d = 3
data_seed = 2
lambda = 1/n
normalize = true
cadence = 3
ref_tol = 1e-8
outdir = {out}
solver = sarah eta=0.7/L m=0.5n seed=1 passes=3
solver = sarah_plus eta=0.7/L m=1n gamma=0.125 seed=1 passes=3
"""


def _write_config(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text(CONFIG.format(out=tmp_path / "out"))
    return str(path)


def test_run_verb(tmp_path, capsys):
    rc = main(["run", _write_config(tmp_path)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "manifest" in out
    assert os.path.exists(tmp_path / "out" / "run00_sarah.csv")


def test_sweep_m_verb(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(
        CONFIG.format(out=tmp_path / "out")
        + "solver = svrg eta=0.5/L m=1n seed=1 passes=3\n"
    )
    rc = main(["sweep-m", str(cfg), "--m", "2", "0.1n"])
    assert rc == 0
    assert os.path.exists(tmp_path / "out" / "sweep_m_summary.csv")


def test_sweep_gamma_verb(tmp_path):
    rc = main(["sweep-gamma", _write_config(tmp_path), "--gamma", "1", "0.125"])
    assert rc == 0


def test_rates_verb(tmp_path, capsys):
    out = tmp_path / "rates.csv"
    rc = main(["rates", "--mu", "1e-6", "--L", "1.0", "--points", "5", "--out", str(out)])
    assert rc == 0
    body = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert len(list(csv.reader(body))) == 6


def test_verify_verb(tmp_path, capsys):
    rc = main(["verify", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "PASS" in out and "FAIL" not in out


def test_reference_verb(tmp_path, capsys):
    rc = main(["reference", _write_config(tmp_path)])
    assert rc == 0
    assert os.path.exists(tmp_path / "out" / "reference.npz")


def test_unknown_verb_exits():
    with pytest.raises(SystemExit):
        main(["frobnicate"])
