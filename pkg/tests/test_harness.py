import csv
import math
import os

import numpy as np
import pytest

from conftest import random_logistic, random_quadratic
from finitesum import harness
from finitesum.harness import (
    ExperimentConfig,
    SolverSpec,
    UnresolvedReference,
    compute_reference,
    dump_config,
    emit_rate_sweep,
    load_config,
    moving_average,
    parse_config,
    run_experiment,
    sweep_gamma,
    sweep_m,
)
from finitesum.numkit import norm_sq


# --- reference ----------------------------------------------------------------


def test_reference_quadratic_closed_form():
    q = random_quadratic(3, n=4, d=3)
    ref = compute_reference(q, 1e-12, cache={})
    assert ref.provenance["solver"] == "closed_form"
    assert ref.grad_norm_sq_at_star <= 1e-24
    assert q.loss(ref.w_star) == ref.p_star


def test_reference_logistic_meets_tolerance():
    p = random_logistic(4, n=12, d=3, lam=0.05)
    ref = compute_reference(p, 1e-10, cache={})
    assert ref.grad_norm_sq_at_star <= 1e-20
    assert ref.provenance["solver"] == "fista"


def test_reference_cache_returns_same_object():
    cache = {}
    p = random_logistic(5, n=10, d=3, lam=0.05)
    a = compute_reference(p, 1e-8, cache=cache)
    b = compute_reference(p, 1e-8, cache=cache)
    assert a is b


def test_reference_cap_raises():
    p = random_logistic(6, n=10, d=3, lam=0.05)
    with pytest.raises(UnresolvedReference):
        compute_reference(p, 1e-13, max_iters=5, cache={})


def test_reference_requires_regularization():
    p = random_logistic(7, n=10, d=3, lam=0.0)
    with pytest.raises(ValueError):
        compute_reference(p, 1e-8, cache={})


def test_residual_never_meaningfully_negative():
    p = random_logistic(8, n=15, d=3, lam=0.1)
    ref = compute_reference(p, 1e-12, cache={})
    from finitesum.optimizers import SolverConfig, run

    r = run(p, SolverConfig("gd", eta=1.0 / p.smoothness().L, budget_passes=200.0), np.zeros(3))
    residual = p.loss(r.final_w) - ref.p_star
    assert residual >= -1e-12 * (1.0 + abs(ref.p_star))


# --- moving average -------------------------------------------------------------


def test_moving_average_examples():
    assert moving_average([1, 2, 3, 4, 5], 1) == [1, 2, 3, 4, 5]
    assert moving_average([7.5] * 6, 4) == [7.5] * 6
    assert moving_average([1, 2, 3, 4, 5], 3) == [1.5, 2.0, 3.0, 4.0, 4.5]
    with pytest.raises(ValueError):
        moving_average([1.0], 0)


def test_moving_average_length_preserved():
    rng = np.random.default_rng(0)
    for span in (1, 2, 3, 7, 100):
        xs = rng.standard_normal(17).tolist()
        assert len(moving_average(xs, span)) == 17


# --- config parsing --------------------------------------------------------------


CONFIG_TEXT = """
# toy experiment
problem = synth_logistic
objective = logistic
n = 60
d = 4
data_seed = 3
lambda = 1/n
normalize = true
cadence = 4
ref_tol = 1e-9
outdir = {out}
solver = sarah eta=0.7/L m=0.5n seed=1 passes=4
solver = sgd_plus eta0=0.2/L seed=1 passes=4
"""


def test_parse_and_dump_config_roundtrip(tmp_path):
    cfg = parse_config(CONFIG_TEXT.format(out=tmp_path))
    assert cfg.n == 60 and cfg.normalize and cfg.lam == "1/n"
    assert len(cfg.solvers) == 2
    assert cfg.solvers[0].m == "0.5n"
    again = parse_config(dump_config(cfg))
    assert dump_config(again) == dump_config(cfg)


def test_parse_config_rejects_unknown_keys():
    with pytest.raises(ValueError, match="unknown key"):
        parse_config("bogus = 1\n")
    with pytest.raises(ValueError, match="solver"):
        parse_config("solver = sarah eta\n")


def test_solver_spec_resolution():
    spec = SolverSpec("sarah", eta="0.5/L", m="2n", seed=3, passes=7.0)
    cfg = spec.resolve(L=0.25, n=100)
    assert cfg.eta == pytest.approx(2.0)
    assert cfg.m == 200
    assert cfg.budget_passes == 7.0
    assert SolverSpec("gd", eta=0.125).resolve(L=2.0, n=10).eta == 0.125
    with pytest.raises(ValueError):
        SolverSpec("gd").resolve(L=1.0, n=10)


# --- experiment runs -------------------------------------------------------------


def _toy_config(tmp_path, **overrides):
    cfg = ExperimentConfig(
        problem="synth_logistic", n=60, d=4, data_seed=3, lam="1/n", normalize=True,
        cadence=4, ref_tol=1e-9, outdir=str(tmp_path),
    )
    for k, v in overrides.items():
        setattr(cfg, k, v)
    return cfg


def test_run_experiment_writes_csvs_and_manifest(tmp_path):
    cfg = _toy_config(tmp_path)
    cfg.solvers = [
        SolverSpec("sarah", eta="0.7/L", m="0.5n", seed=1, passes=4.0),
        SolverSpec("sgd_plus", eta0="0.2/L", seed=1, passes=4.0),
    ]
    summaries, manifest = run_experiment(cfg)
    assert all(s.status == "completed" for s in summaries)
    with open(summaries[0].csv_path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == list(harness.CSV_COLUMNS)
    passes = [float(r[2]) for r in rows[1:]]
    assert passes == sorted(passes)
    events = {r[6] for r in rows[1:]}
    assert events <= {"outer_start", "inner_step", "snapshot"}
    residuals = [float(r[3]) for r in rows[1:]]
    assert min(residuals) >= -cfg.ref_tol * 2.0  # never meaningfully negative
    assert os.path.exists(manifest)


def test_manifest_reruns_bit_identical(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    cfg = _toy_config(out1)
    cfg.solvers = [SolverSpec("sarah", eta="0.7/L", m="0.5n", seed=2, passes=3.0)]
    summaries1, manifest = run_experiment(cfg)
    cfg2 = load_config(manifest)
    cfg2.outdir = str(out2)
    summaries2, _ = run_experiment(cfg2)
    a = open(summaries1[0].csv_path).read()
    b = open(summaries2[0].csv_path).read()
    assert a == b


def test_outdir_env_override(tmp_path, monkeypatch):
    target = tmp_path / "env_dir"
    monkeypatch.setenv("FINITESUM_OUTDIR", str(target))
    cfg = _toy_config(tmp_path / "ignored")
    cfg.solvers = [SolverSpec("gd", eta="1/L", passes=2.0)]
    summaries, manifest = run_experiment(cfg)
    assert str(target) in summaries[0].csv_path
    assert str(target) in manifest


def test_diverged_run_recorded_without_aborting_siblings(tmp_path):
    cfg = _toy_config(tmp_path, normalize=False)
    cfg.solvers = [
        SolverSpec("gd", eta=1e9, passes=40.0),
        SolverSpec("gd", eta="1/L", passes=2.0),
    ]
    with np.errstate(over="ignore", invalid="ignore"):
        summaries, _ = run_experiment(cfg)
    assert summaries[0].status == "diverged"
    assert summaries[1].status == "completed"


def test_test_error_column_present_with_split(tmp_path):
    cfg = _toy_config(tmp_path, train_fraction=0.7)
    cfg.solvers = [SolverSpec("gd", eta="1/L", passes=2.0)]
    summaries, _ = run_experiment(cfg)
    with open(summaries[0].csv_path) as fh:
        rows = list(csv.reader(fh))
    col = rows[0].index("test_error")
    assert all(r[col] != "" for r in rows[1:])


def test_tuned_fraction_parameters_run_clean(tmp_path):
    # m = 0.7n with eta = 0.7/L completes without divergence
    cfg = _toy_config(tmp_path)
    cfg.solvers = [SolverSpec("sarah", eta="0.7/L", m="0.7n", seed=4, passes=8.0)]
    summaries, _ = run_experiment(cfg)
    assert summaries[0].status == "completed"
    assert summaries[0].final_loss_residual < 1e-3


# --- sweeps ------------------------------------------------------------------


def test_sweep_m_dedupes_and_reduces_to_gd(tmp_path):
    cfg = _toy_config(tmp_path)
    cfg.solvers = [
        SolverSpec("sarah", eta="0.5/L", seed=1, passes=3.0),
        SolverSpec("svrg", eta="0.5/L", seed=1, passes=3.0),
        SolverSpec("gd", eta="0.5/L", passes=3.0),
    ]
    with pytest.warns(UserWarning, match="duplicate"):
        summaries, summary_path = sweep_m(cfg, [1, 5, 5])
    assert os.path.exists(summary_path)
    with open(summary_path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["algorithm", "m", "status", "final_loss_residual"]
    assert len(rows) == 1 + 4  # 2 algorithms x 2 distinct sizes

    # m=1 run coincides with plain gradient descent at every recorded pass
    built = harness.build_problem(cfg)
    ref = compute_reference(built.problem, cfg.ref_tol)
    info = built.problem.smoothness()
    gd = harness.run_solvers(
        built.problem, ref, [cfg.solvers[2].resolve(info.L, built.problem.n)],
        ["gd"], str(tmp_path / "gd"), cadence=cfg.cadence,
    )[0]
    sarah_m1 = [s for s in summaries if s.algorithm == "sarah"][0]
    with open(sarah_m1.csv_path) as fh:
        srows = [r for r in csv.reader(fh)][1:]
    with open(gd.csv_path) as fh:
        grows = [r for r in csv.reader(fh)][1:]
    s_map = {r[2]: r[3] for r in srows if r[6] == "outer_start"}
    g_map = {r[2]: r[3] for r in grows if r[6] == "outer_start"}
    assert s_map == g_map


def test_sweep_m_requires_templates(tmp_path):
    cfg = _toy_config(tmp_path)
    cfg.solvers = [SolverSpec("sarah", eta="0.5/L", seed=1, passes=2.0)]
    with pytest.raises(ValueError, match="svrg"):
        sweep_m(cfg, [2, 4])
    with pytest.raises(ValueError):
        sweep_m(cfg, [])


def test_sweep_gamma_one_csv_per_ratio(tmp_path):
    cfg = _toy_config(tmp_path)
    cfg.solvers = [SolverSpec("sarah_plus", eta="0.7/L", m="1n", seed=1, passes=3.0)]
    summaries = sweep_gamma(cfg, [1.0, 0.5, 0.125])
    assert len(summaries) == 3
    assert all(os.path.exists(s.csv_path) for s in summaries)


# --- rate sweep CSV --------------------------------------------------------------


def test_emit_rate_sweep_csv(tmp_path):
    path = tmp_path / "rates.csv"
    emit_rate_sweep(1e-2, 1.0, [100, 1000, 10000], path)
    lines = open(path).read().splitlines()
    assert lines[0].startswith("#")
    body = [l for l in lines if not l.startswith("#")]
    rows = list(csv.reader(body))
    assert rows[0] == ["m", "eta_sarah", "rate_sarah", "sarah_convergent",
                       "eta_svrg", "rate_svrg", "svrg_convergent"]
    assert len(rows) == 4
    for r in rows[1:]:
        if r[3] == "1" and r[6] == "1":
            assert float(r[1]) > float(r[4])
            assert float(r[2]) < float(r[5])


def test_emit_rate_sweep_single_row(tmp_path):
    path = tmp_path / "one.csv"
    emit_rate_sweep(1e-2, 1.0, [5000], path)
    body = [l for l in open(path).read().splitlines() if not l.startswith("#")]
    assert len(body) == 2


# --- verify battery ---------------------------------------------------------------


def test_verify_suite_passes(tmp_path):
    rows, ok = harness.verify_suite(str(tmp_path))
    assert ok, [r for r in rows if not r[1]]
    assert os.path.exists(tmp_path / "verify_report.csv")
