"""Command-line interface.

Verbs: ``run`` (execute a config file), ``sweep-m``, ``sweep-gamma``,
``rates`` (optimal step/rate table), ``verify`` (self-check battery),
``reference`` (compute and persist the optimum).  Exit code 0 only when
every run completed and every verification assertion passed.
"""

import argparse
import sys

import numpy as np

from . import harness


def _load(path):
    return harness.load_config(path)


def _cmd_run(args) -> int:
    summaries, manifest = harness.run_experiment(_load(args.config))
    ok = True
    for s in summaries:
        res = "" if s.final_loss_residual is None else f" final_residual={s.final_loss_residual:.3e}"
        print(f"{s.status}: {s.label}{res} -> {s.csv_path}")
        ok = ok and s.status == "completed"
    print(f"manifest: {manifest}")
    return 0 if ok else 1


def _cmd_sweep_m(args) -> int:
    cfg = _load(args.config)
    m_values = [harness._resolve_size(v, cfg.n) for v in args.m]
    summaries, summary_path = harness.sweep_m(cfg, m_values)
    ok = all(s.status == "completed" for s in summaries)
    for s in summaries:
        print(f"{s.status}: {s.label} -> {s.csv_path}")
    print(f"summary: {summary_path}")
    return 0 if ok else 1


def _cmd_sweep_gamma(args) -> int:
    summaries = harness.sweep_gamma(_load(args.config), [float(g) for g in args.gamma])
    ok = all(s.status == "completed" for s in summaries)
    for s in summaries:
        print(f"{s.status}: {s.label} -> {s.csv_path}")
    return 0 if ok else 1


def _cmd_rates(args) -> int:
    grid = np.geomspace(args.m_start, args.m_stop, args.points)
    path = harness.emit_rate_sweep(args.mu, args.L, [float(m) for m in grid], args.out)
    print(f"rate table: {path}")
    return 0


def _cmd_verify(args) -> int:
    rows, ok = harness.verify_suite(args.out)
    for name, passed, detail in rows:
        mark = "PASS" if passed else "FAIL"
        print(f"{mark} {name}" + (f" ({detail})" if detail else ""))
    return 0 if ok else 1


def _cmd_reference(args) -> int:
    cfg = _load(args.config)
    built = harness.build_problem(cfg)
    ref = harness.compute_reference(built.problem, cfg.ref_tol)
    import os

    outdir = os.environ.get("FINITESUM_OUTDIR", cfg.outdir)
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, "reference.npz")
    np.savez(path, w_star=ref.w_star, p_star=ref.p_star,
             grad_norm_sq_at_star=ref.grad_norm_sq_at_star)
    print(f"p_star = {ref.p_star!r} (grad_norm_sq = {ref.grad_norm_sq_at_star:.3e})")
    print(f"reference: {path}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="finitesum",
                                     description="finite-sum optimization experiment harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run all solvers from a config file")
    p.add_argument("config")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("sweep-m", help="inner-loop size sweep for sarah and svrg")
    p.add_argument("config")
    p.add_argument("--m", nargs="+", required=True,
                   help="inner-loop sizes (ints or multiples like 0.5n)")
    p.set_defaults(fn=_cmd_sweep_m)

    p = sub.add_parser("sweep-gamma", help="stopping-ratio sweep for sarah_plus")
    p.add_argument("config")
    p.add_argument("--gamma", nargs="+", required=True)
    p.set_defaults(fn=_cmd_sweep_gamma)

    p = sub.add_parser("rates", help="optimal step/rate table over an m grid")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--m-start", type=float, default=1e3)
    p.add_argument("--m-stop", type=float, default=1e7)
    p.add_argument("--points", type=int, default=25)
    p.add_argument("--out", default="rate_sweep.csv")
    p.set_defaults(fn=_cmd_rates)

    p = sub.add_parser("verify", help="run the oracle/theory self-checks")
    p.add_argument("--out", default=None, help="directory for verify_report.csv")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("reference", help="compute and persist the reference optimum")
    p.add_argument("config")
    p.set_defaults(fn=_cmd_reference)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
