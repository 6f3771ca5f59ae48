"""Experiment driver: builds problems, computes reference optima, runs
solvers, and emits CSV traces plus a re-runnable manifest.

Config files (and the manifests written next to results) are flat
``key = value`` text; see the README for the full key table.  Solver lines
repeat, one per run::

    solver = sarah eta=0.5/L m=2n seed=1 passes=30 snapshot=last

``<x>/L`` step sizes and ``<x>n`` inner-loop sizes are resolved against the
built problem, so a manifest re-run reproduces the original CSVs
bit-for-bit.  The ``FINITESUM_OUTDIR`` environment variable overrides the
configured output directory.
"""

import csv
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .data import SplitSpec, load_libsvm, normalize_rows, split, synth_logistic, synth_quadratic_2d
from .numkit import norm_sq, seq_sum
from .objectives import LeastSquaresL2, LogisticL2, QuadraticSum
from .optimizers import (
    DivergedError,
    LAST_ITERATE,
    SARAH,
    SARAH_PLUS,
    SVRG,
    SolverConfig,
    UNIFORM_RANDOM,
    run,
)
from .theory import best_rate_curves


class UnresolvedReference(RuntimeError):
    """The reference solve hit its iteration cap before reaching tolerance."""


@dataclass(frozen=True)
class ReferenceSolution:
    w_star: np.ndarray
    p_star: float
    grad_norm_sq_at_star: float
    provenance: dict


_REFERENCE_CACHE: dict = {}


def compute_reference(p, tol: float, max_iters: int = 500_000, cache: dict | None = None):
    """High-accuracy optimum for residual plots, cached by problem content.

    Quadratic sums use their closed-form optimum; the regularized models run
    the accelerated full-gradient method at step 1/L until
    ``||grad P(w)|| <= tol``.  Repeated calls with the same problem bytes
    and tolerance return the cached object.
    """
    if not tol > 0.0:
        raise ValueError("tol must be > 0")
    if cache is None:
        cache = _REFERENCE_CACHE
    key = (p.content_hash(), float(tol))
    if key in cache:
        return cache[key]
    if isinstance(p, QuadraticSum):
        w = p.minimizer()
        ref = ReferenceSolution(
            w, p.loss(w), norm_sq(p.full_grad(w)), {"solver": "closed_form", "iterations": 0, "tol": tol}
        )
        cache[key] = ref
        return ref
    if p.lam <= 0.0:
        raise ValueError("reference solve needs lam > 0 for guaranteed convergence")
    info = p.smoothness()
    eta = 1.0 / info.L
    x = np.zeros(p.d)
    y = x
    tk = 1.0
    tol_sq = tol * tol
    for it in range(1, max_iters + 1):
        g = p.full_grad(y)
        x_new = y - eta * g
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * tk * tk))
        y = x_new + ((tk - 1.0) / t_new) * (x_new - x)
        x = x_new
        tk = t_new
        if it % 10 == 0 or it == max_iters:
            gx_sq = norm_sq(p.full_grad(x))
            if gx_sq <= tol_sq:
                ref = ReferenceSolution(
                    x, p.loss(x), gx_sq, {"solver": "fista", "iterations": it, "tol": tol}
                )
                cache[key] = ref
                return ref
    raise UnresolvedReference(f"no point with ||grad P|| <= {tol} within {max_iters} iterations")


@dataclass
class SolverSpec:
    """One solver line as written in a config file (values still symbolic)."""

    algorithm: str
    eta: str | float | None = None
    eta0: str | float | None = None
    m: str | int | None = None
    gamma: float = 0.125
    seed: int = 0
    passes: float = 1.0
    snapshot: str = "last"

    def resolve(self, L: float, n: int) -> SolverConfig:
        eta = _resolve_rate(self.eta, L) if self.eta is not None else None
        eta0 = _resolve_rate(self.eta0, L) if self.eta0 is not None else None
        if eta is None:
            if eta0 is None:
                raise ValueError(f"solver {self.algorithm}: eta (or eta0) is required")
            eta = eta0
        m = _resolve_size(self.m, n) if self.m is not None else 1
        rule = {"last": LAST_ITERATE, "uniform": UNIFORM_RANDOM}.get(self.snapshot)
        if rule is None:
            raise ValueError(f"unknown snapshot rule {self.snapshot!r}")
        return SolverConfig(
            algorithm=self.algorithm,
            eta=eta,
            m=m,
            gamma=self.gamma,
            snapshot_rule=rule,
            seed=self.seed,
            budget_passes=self.passes,
            eta0=eta0,
        )

    def label(self) -> str:
        parts = [self.algorithm]
        for key in ("eta", "eta0", "m", "gamma", "seed", "passes", "snapshot"):
            v = getattr(self, key)
            if v is not None:
                parts.append(f"{key}={v}")
        return " ".join(parts)


def _resolve_rate(v, L: float) -> float:
    if isinstance(v, (int, float)):
        return float(v)
    s = str(v).strip()
    if s.endswith("/L"):
        return float(s[:-2]) / L
    return float(s)


def _resolve_size(v, n: int) -> int:
    if isinstance(v, int):
        return v
    s = str(v).strip()
    if s.endswith("n"):
        return max(1, int(round(float(s[:-1]) * n)))
    return int(s)


@dataclass
class ExperimentConfig:
    problem: str = "synth_logistic"       # synth_logistic | synth_quadratic | libsvm:<path>
    objective: str = "logistic"           # logistic | least_squares (libsvm sources)
    n: int = 1000
    d: int = 20
    data_seed: int = 7
    separability: float = 0.9
    spread: float = 1.0
    lam: str | float = "1/n"
    normalize: bool = False
    train_fraction: float = 1.0           # 1.0 = use everything for training
    split_seed: int = 1
    cadence: int = 10                     # records per effective pass
    ref_tol: float = 1e-12
    vt_smooth_span: int = 0               # 0 = no smoothed column
    outdir: str = "results"
    solvers: list = field(default_factory=list)


@dataclass
class BuiltProblem:
    problem: object
    test_features: object
    test_labels: object
    info: dict


def build_problem(cfg: ExperimentConfig) -> BuiltProblem:
    info = {}
    if cfg.problem == "synth_quadratic":
        problem, _w_star = synth_quadratic_2d(cfg.n, cfg.data_seed, cfg.spread)
        info["dataset_hash"] = problem.content_hash()
        return BuiltProblem(problem, None, None, info)

    if cfg.problem == "synth_logistic":
        ds = synth_logistic(cfg.n, cfg.d, cfg.data_seed, cfg.separability)
    elif cfg.problem.startswith("libsvm:"):
        ds = load_libsvm(cfg.problem.split(":", 1)[1])
    else:
        raise ValueError(f"unknown problem source {cfg.problem!r}")

    if cfg.normalize:
        # record curvature before and after scaling: the constant depends on
        # whether rows were unit-normalized
        info["L_raw"] = _linear_L(ds, cfg.objective, 0.0)
        ds, zero_rows = normalize_rows(ds)
        info["zero_rows"] = zero_rows

    if cfg.train_fraction < 1.0:
        train, test = split(ds, SplitSpec(cfg.train_fraction, cfg.split_seed))
    else:
        train, test = ds, None

    lam = _resolve_lambda(cfg.lam, train.n)
    info["lambda"] = lam
    if cfg.objective == "logistic":
        problem = LogisticL2(train.features, train.labels, lam)
    elif cfg.objective == "least_squares":
        problem = LeastSquaresL2(train.features, train.labels, lam)
    else:
        raise ValueError(f"unknown objective {cfg.objective!r}")
    info["dataset_hash"] = ds.content_hash()
    info["n_train"] = train.n
    info["n_test"] = test.n if test is not None else 0
    tf = test.features if test is not None else None
    ty = test.labels if test is not None else None
    return BuiltProblem(problem, tf, ty, info)


def _linear_L(ds, objective, lam):
    p = LogisticL2(ds.features, ds.labels, lam) if objective == "logistic" else LeastSquaresL2(
        ds.features, ds.labels, lam
    )
    return p.smoothness().L


def _resolve_lambda(lam, n: int) -> float:
    if isinstance(lam, (int, float)):
        return float(lam)
    s = str(lam).strip()
    if s == "1/n":
        return 1.0 / n
    return float(s)


CSV_COLUMNS = ("algorithm", "seed", "effective_passes", "loss_residual",
               "test_error", "vt_norm_sq", "event")


@dataclass
class RunSummary:
    label: str
    algorithm: str
    seed: int
    csv_path: str
    status: str                       # "completed" | "diverged"
    final_loss_residual: float | None


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def _write_trace_csv(path, algorithm, seed, trace, p_star, smooth_span=0):
    cols = list(CSV_COLUMNS)
    smoothed = None
    if smooth_span and smooth_span > 1:
        vt = [r.vt_norm_sq for r in trace]
        known = [v for v in vt if v is not None]
        sm_iter = iter(moving_average(known, smooth_span)) if known else iter(())
        smoothed = [None if v is None else next(sm_iter) for v in vt]
        cols.append("vt_norm_sq_smoothed")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for k, rec in enumerate(trace):
            row = [
                algorithm,
                seed,
                _fmt(rec.effective_passes),
                _fmt(rec.loss - p_star),
                _fmt(rec.test_error),
                _fmt(rec.vt_norm_sq),
                rec.event,
            ]
            if smoothed is not None:
                row.append(_fmt(smoothed[k]))
            w.writerow(row)


def run_solvers(problem, reference, solver_cfgs, labels, outdir, *, cadence=10,
                test_set=None, smooth_span=0):
    """Run each configured solver, writing one CSV per run.

    A diverging run is recorded with whatever trace it produced and does not
    abort its siblings.  Returns summaries in config order.
    """
    os.makedirs(outdir, exist_ok=True)
    stride = max(1, int(round(problem.n / max(1, cadence))))
    summaries = []
    for idx, (cfg, label) in enumerate(zip(solver_cfgs, labels)):
        path = os.path.join(outdir, f"run{idx:02d}_{cfg.algorithm}.csv")
        try:
            result = run(problem, cfg, np.zeros(problem.d), record_stride=stride,
                         test_set=test_set)
            trace = result.trace
            status = "completed"
            final = problem.loss(result.final_w) - reference.p_star
        except DivergedError as err:
            trace = err.trace
            status = "diverged"
            final = None
        _write_trace_csv(path, cfg.algorithm, cfg.seed, trace, reference.p_star, smooth_span)
        summaries.append(RunSummary(label, cfg.algorithm, cfg.seed, path, status, final))
    return summaries


def run_experiment(cfg: ExperimentConfig):
    """Config-driven entry point: build, solve, and write CSVs + manifest."""
    outdir = os.environ.get("FINITESUM_OUTDIR", cfg.outdir)
    os.makedirs(outdir, exist_ok=True)
    built = build_problem(cfg)
    reference = _reference_for(built, cfg.ref_tol)
    info = built.problem.smoothness()
    solver_cfgs = [s.resolve(info.L, built.problem.n) for s in cfg.solvers]
    labels = [s.label() for s in cfg.solvers]
    test_set = None
    if built.test_features is not None and cfg.objective == "logistic":
        test_set = (built.test_features, built.test_labels)
    summaries = run_solvers(
        built.problem, reference, solver_cfgs, labels, outdir,
        cadence=cfg.cadence, test_set=test_set, smooth_span=cfg.vt_smooth_span,
    )
    manifest = os.path.join(outdir, "manifest.txt")
    _write_manifest(manifest, cfg, built, reference, solver_cfgs, summaries)
    return summaries, manifest


def _reference_for(built: BuiltProblem, tol: float) -> ReferenceSolution:
    return compute_reference(built.problem, tol)


def sweep_m(cfg: ExperimentConfig, m_values):
    """One run per inner-loop size per algorithm in {sarah, svrg}, shared seed.

    Duplicated sizes are dropped with a warning.  Writes the per-run CSVs
    plus ``sweep_m_summary.csv`` with the final residual per (algorithm, m).
    """
    import warnings

    if not m_values:
        raise ValueError("m_values must be non-empty")
    seen = []
    for m in m_values:
        if m in seen:
            warnings.warn(f"duplicate inner-loop size {m} dropped", stacklevel=2)
        else:
            seen.append(m)
    outdir = os.environ.get("FINITESUM_OUTDIR", cfg.outdir)
    os.makedirs(outdir, exist_ok=True)
    built = build_problem(cfg)
    reference = _reference_for(built, cfg.ref_tol)
    info = built.problem.smoothness()
    templates = {}
    for s in cfg.solvers:
        if s.algorithm in (SARAH, SVRG) and s.algorithm not in templates:
            templates[s.algorithm] = s
    for algo in (SARAH, SVRG):
        if algo not in templates:
            raise ValueError(f"sweep_m needs a template solver line for {algo!r}")
    cfgs, labels = [], []
    for algo in (SARAH, SVRG):
        for m in seen:
            resolved = replace(templates[algo], m=m).resolve(info.L, built.problem.n)
            cfgs.append(resolved)
            labels.append(f"{algo} m={m}")
    summaries = run_solvers(built.problem, reference, cfgs, labels, outdir,
                            cadence=cfg.cadence, smooth_span=cfg.vt_smooth_span)
    summary_path = os.path.join(outdir, "sweep_m_summary.csv")
    with open(summary_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("algorithm", "m", "status", "final_loss_residual"))
        for s, c in zip(summaries, cfgs):
            w.writerow((s.algorithm, c.m, s.status, _fmt(s.final_loss_residual)))
    return summaries, summary_path


def sweep_gamma(cfg: ExperimentConfig, gammas):
    """One adaptive-stop run per stopping ratio; one CSV per gamma."""
    if not gammas:
        raise ValueError("gammas must be non-empty")
    outdir = os.environ.get("FINITESUM_OUTDIR", cfg.outdir)
    os.makedirs(outdir, exist_ok=True)
    built = build_problem(cfg)
    reference = _reference_for(built, cfg.ref_tol)
    info = built.problem.smoothness()
    template = next((s for s in cfg.solvers if s.algorithm == SARAH_PLUS), None)
    if template is None:
        raise ValueError("sweep_gamma needs a template solver line for 'sarah_plus'")
    cfgs = [replace(template, gamma=float(g)).resolve(info.L, built.problem.n) for g in gammas]
    labels = [f"sarah_plus gamma={g}" for g in gammas]
    return run_solvers(built.problem, reference, cfgs, labels, outdir,
                       cadence=cfg.cadence, smooth_span=cfg.vt_smooth_span)


def emit_rate_sweep(mu: float, L: float, m_grid, path) -> str:
    """Write the per-m optimal step/rate table for both methods as CSV."""
    rows = best_rate_curves(mu, L, m_grid)
    with open(path, "w", newline="") as fh:
        fh.write("# optimal step sizes and outer-loop contraction rates per inner-loop size\n")
        fh.write(f"# mu={mu!r} L={L!r}; *_convergent flags rate < 1\n")
        w = csv.writer(fh)
        w.writerow(("m", "eta_sarah", "rate_sarah", "sarah_convergent",
                    "eta_svrg", "rate_svrg", "svrg_convergent"))
        for r in rows:
            w.writerow((
                _fmt(r.m), _fmt(r.eta_sarah), _fmt(r.rate_sarah), int(r.sarah_convergent),
                _fmt(r.eta_svrg), _fmt(r.rate_svrg), int(r.svrg_convergent),
            ))
    return str(path)


def moving_average(series, span: int):
    """Centered moving average, window shrinking at the boundaries;
    length-preserving."""
    if span < 1:
        raise ValueError("span must be >= 1")
    xs = [float(x) for x in series]
    n = len(xs)
    left = (span - 1) // 2
    right = span // 2
    out = []
    for i in range(n):
        lo = max(0, i - left)
        hi = min(n, i + right + 1)
        out.append(seq_sum(xs[lo:hi]) / (hi - lo))
    return out


# --- config file / manifest -------------------------------------------------

_CONFIG_KEYS = {
    "problem": str,
    "objective": str,
    "n": int,
    "d": int,
    "data_seed": int,
    "separability": float,
    "spread": float,
    "lambda": None,   # str "1/n" or float
    "normalize": None,
    "train_fraction": float,
    "split_seed": int,
    "cadence": int,
    "ref_tol": float,
    "vt_smooth_span": int,
    "outdir": str,
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse the flat key = value format; repeated ``solver`` lines add runs."""
    cfg = ExperimentConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key == "solver":
            cfg.solvers.append(_parse_solver_line(value, lineno))
            continue
        if key not in _CONFIG_KEYS:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        if key == "lambda":
            cfg.lam = value if value == "1/n" else float(value)
        elif key == "normalize":
            cfg.normalize = value.lower() in ("1", "true", "yes")
        else:
            caster = _CONFIG_KEYS[key]
            setattr(cfg, key, caster(value))
    return cfg


def _parse_solver_line(value: str, lineno: int) -> SolverSpec:
    toks = value.split()
    if not toks:
        raise ValueError(f"config line {lineno}: empty solver line")
    spec = SolverSpec(algorithm=toks[0])
    for tok in toks[1:]:
        if "=" not in tok:
            raise ValueError(f"config line {lineno}: malformed solver token {tok!r}")
        k, v = tok.split("=", 1)
        if k in ("eta", "eta0"):
            setattr(spec, k, v)
        elif k == "m":
            spec.m = v
        elif k == "gamma":
            spec.gamma = float(v)
        elif k == "seed":
            spec.seed = int(v)
        elif k == "passes":
            spec.passes = float(v)
        elif k == "snapshot":
            spec.snapshot = v
        else:
            raise ValueError(f"config line {lineno}: unknown solver key {k!r}")
    return spec


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def dump_config(cfg: ExperimentConfig) -> str:
    lines = [
        f"problem = {cfg.problem}",
        f"objective = {cfg.objective}",
        f"n = {cfg.n}",
        f"d = {cfg.d}",
        f"data_seed = {cfg.data_seed}",
        f"separability = {cfg.separability!r}",
        f"spread = {cfg.spread!r}",
        f"lambda = {cfg.lam}",
        f"normalize = {str(cfg.normalize).lower()}",
        f"train_fraction = {cfg.train_fraction!r}",
        f"split_seed = {cfg.split_seed}",
        f"cadence = {cfg.cadence}",
        f"ref_tol = {cfg.ref_tol!r}",
        f"vt_smooth_span = {cfg.vt_smooth_span}",
        f"outdir = {cfg.outdir}",
    ]
    for s in cfg.solvers:
        lines.append(f"solver = {s.label()}")
    return "\n".join(lines) + "\n"


def _write_manifest(path, cfg, built, reference, solver_cfgs, summaries):
    with open(path, "w") as fh:
        fh.write("# re-runnable experiment manifest; derived values are comments\n")
        fh.write(dump_config(cfg))
        fh.write(f"# derived: version = {__version__}\n")
        info = built.problem.smoothness()
        fh.write(f"# derived: L = {info.L!r}\n")
        fh.write(f"# derived: mu = {info.mu!r}\n")
        for k, v in built.info.items():
            fh.write(f"# derived: {k} = {v}\n")
        fh.write(f"# derived: p_star = {reference.p_star!r}\n")
        fh.write(f"# derived: grad_norm_sq_at_star = {reference.grad_norm_sq_at_star!r}\n")
        fh.write(f"# derived: reference = {reference.provenance}\n")
        for c, s in zip(solver_cfgs, summaries):
            fh.write(
                f"# derived: run {s.csv_path}: algorithm={c.algorithm} eta={c.eta!r} "
                f"m={c.m} gamma={c.gamma!r} seed={c.seed} passes={c.budget_passes!r} "
                f"snapshot={c.snapshot_rule} status={s.status}\n"
            )


# --- verification battery ----------------------------------------------------

def _verify_instances():
    """Small seeded problems for the self-check battery."""
    from .rng import Rng

    out = []
    for seed in (11, 12, 13):
        rng = Rng(seed)
        mats = np.empty((3, 2, 2))
        centers = np.empty((3, 2))
        for i in range(3):
            M = np.array(rng.normals(4)).reshape(2, 2)
            mats[i] = M.T @ M + 0.1 * np.eye(2)
            centers[i] = rng.normals(2)
        w0 = np.array(rng.normals(2))
        out.append(("quadratic", QuadraticSum(mats, centers), w0))
    for seed in (21, 22, 23):
        ds = synth_logistic(3, 2, seed)
        p = LogisticL2(ds.features, ds.labels, 0.1)
        w0 = 0.5 * np.array(Rng(seed, 1).normals(2))
        out.append(("logistic", p, w0))
    return out


def verify_suite(outdir=None):
    """Run the oracle/theory self-checks; returns (rows, all_passed).

    Each row is (check_name, passed, detail).  When ``outdir`` is given the
    table is also written to ``verify_report.csv``.
    """
    from .oracle import (
        CONVEX,
        EACH_STRONG,
        P_STRONG,
        check_gap_identity,
        check_inner_loop_bounds,
        enumerate_sarah,
    )
    from .theory import (
        RateParams,
        iterations_needed,
        optimal_inner_size,
        optimal_inverse_step,
        sarah_rate,
        svrg_rate,
    )
    from .optimizers import GD, SolverConfig, gd_run, sarah_run

    rows = []

    def add(name, ok, detail=""):
        rows.append((name, bool(ok), detail))

    instances = _verify_instances()
    worst_gap = 0.0
    worst_unbias = 0.0
    any_bias = 0.0
    for kind, p, w0 in instances:
        L = p.smoothness().L
        ex = enumerate_sarah(p, 0.5 / L, 4, w0)
        worst_gap = max(worst_gap, check_gap_identity(ex).max_rel_deviation)
        for t in range(ex.m):
            num = math.sqrt(norm_sq(ex.e_v[t] - ex.e_grad_p[t]))
            den = 1.0 + math.sqrt(norm_sq(ex.e_grad_p[t]))
            worst_unbias = max(worst_unbias, num / den)
        any_bias = max(any_bias, ex.max_conditional_bias)
    add("gap_identity", worst_gap <= 1e-10, f"max_rel_dev={worst_gap:.3e}")
    add("total_expectation_unbiased", worst_unbias <= 1e-12, f"max={worst_unbias:.3e}")
    add("conditional_bias_exists", any_bias > 1e-6, f"max={any_bias:.3e}")

    bounds_ok = True
    for kind, p, w0 in instances:
        info = p.smoothness()
        ref = compute_reference(p, 1e-12)
        mu_each = p.component_strong_convexity()
        cases = [
            (P_STRONG, info.mu, 1.0 / info.L),
            (EACH_STRONG, mu_each, 2.0 / (mu_each + info.L)),
            (CONVEX, info.mu, 0.9 / info.L),
        ]
        for regime, mu, eta in cases:
            ex = enumerate_sarah(p, eta, 4, w0)
            rp = RateParams(mu, info.L, eta, 4)
            rep = check_inner_loop_bounds(ex, rp, regime, ref.p_star)
            bounds_ok = bounds_ok and rep.passed
    add("inner_loop_bounds", bounds_ok)

    grid_ok = True
    for kappa in (10.0, 1000.0):
        mu = 1.0 / kappa
        for eta in np.linspace(1e-3, 0.2499, 20):
            for m in np.geomspace(10, 1e5, 20):
                rp = RateParams(mu, 1.0, float(eta), float(m))
                if not sarah_rate(rp) < svrg_rate(rp):
                    grid_ok = False
    add("rate_dominance_grid", grid_ok)

    const_ok = (
        abs(optimal_inverse_step(7.0 / 9.0) - 2.0) <= 1e-12
        and abs(optimal_inner_size(7.0 / 9.0, 100.0) - 449.0) <= 1e-9 * 449.0
        and iterations_needed(1.0, (7.0 / 9.0) ** 3) == 3
        and all(
            sarah_rate(RateParams(1.0 / k, 1.0, 0.5, math.ceil(4.5 * k))) < 7.0 / 9.0
            for k in (10.0, 100.0, 1000.0, 1e6)
        )
    )
    add("tuned_constants", const_ok)

    rows_sweep = best_rate_curves(1e-6, 1.0, [int(v) for v in np.geomspace(1e3, 1e7, 7)])
    sweep_ok = all(
        r.eta_sarah > r.eta_svrg and r.rate_sarah < r.rate_svrg for r in rows_sweep
    ) and any(r.sarah_convergent for r in rows_sweep)
    add("rate_sweep_orderings", sweep_ok,
        f"sarah_feasible={sum(r.sarah_convergent for r in rows_sweep)}")

    gd_ok = True
    for kind, p, w0 in instances[:3]:
        L = p.smoothness().L
        a = sarah_run(p, SolverConfig("sarah", eta=0.5 / L, m=1, budget_passes=5.0), w0)
        b = gd_run(p, SolverConfig(GD, eta=0.5 / L, budget_passes=5.0), w0)
        gd_ok = gd_ok and bool(np.array_equal(a.final_w, b.final_w))
    add("gd_reduction_bitwise", gd_ok)

    all_ok = all(ok for _, ok, _ in rows)
    if outdir is not None:
        os.makedirs(outdir, exist_ok=True)
        with open(os.path.join(outdir, "verify_report.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("check", "passed", "detail"))
            for name, ok, detail in rows:
                w.writerow((name, int(ok), detail))
    return rows, all_ok
