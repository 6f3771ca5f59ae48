"""Finite-sum solvers behind one driver contract with trace emission.

Algorithms
----------
``sarah``       outer loop computes the full gradient v_0 and takes one step;
                each inner step samples i_t and updates the direction
                recursively, ``v_t = grad f_{i_t}(w_t) - grad f_{i_t}(w_{t-1})
                + v_{t-1}``, then ``w_{t+1} = w_t - eta v_t``.
``sarah_plus``  same recursion, but the inner loop stops as soon as
                ``||v_{t-1}||^2 <= gamma ||v_0||^2`` (or at the cap m), and
                the snapshot is always the last iterate.
``svrg``        inner direction anchored at the snapshot:
                ``v_t = grad f_{i_t}(w_t) - grad f_{i_t}(w_0) + v_0``.
``sgd_plus``    single-sample steps with rate eta0 / (k+1), k = completed
                effective passes.
``sag``         per-sample stored derivative scalars (zero-initialized,
                averaged over n from the start); linear models only.
``gd``          full-gradient descent.
``fista``       constant-step accelerated gradient on the smooth objective.

Bookkeeping: one component-gradient evaluation is the cost unit; an
effective pass is n units.  A full gradient costs n, a SARAH/SVRG inner step
costs 2, SGD+/SAG steps cost 1.  Measurement (loss/test-error evaluation for
trace records) is free: it is excluded from the budget and from the
``effective_passes`` column.

Determinism: a fixed (problem, config) pair yields bit-identical iterates
and traces on every run; all randomness flows through the seeded counter
generator, and all reductions are order-fixed.  Per outer iteration the draw
order is: snapshot index first (uniform rule only), then inner indices.
"""

import math
from dataclasses import dataclass

import numpy as np

from .numkit import axpy_sparse, norm_sq
from .objectives import test_error as _test_error
from .rng import Rng

SARAH = "sarah"
SARAH_PLUS = "sarah_plus"
SVRG = "svrg"
SGD_PLUS = "sgd_plus"
SAG = "sag"
GD = "gd"
FISTA = "fista"
ALGORITHMS = (SARAH, SARAH_PLUS, SVRG, SGD_PLUS, SAG, GD, FISTA)

LAST_ITERATE = "last_iterate"
UNIFORM_RANDOM = "uniform_random"

OUTER_START = "outer_start"
INNER_STEP = "inner_step"
SNAPSHOT = "snapshot"


class DivergedError(RuntimeError):
    """A non-finite iterate appeared; carries the trace up to the last finite state."""

    def __init__(self, message, trace, total_component_evals, outer_iterations):
        super().__init__(message)
        self.trace = trace
        self.total_component_evals = total_component_evals
        self.outer_iterations = outer_iterations


class UnsupportedObjective(TypeError):
    """The algorithm cannot run on this objective (e.g. SAG on quadratics)."""


@dataclass(frozen=True)
class SolverConfig:
    algorithm: str
    eta: float
    m: int = 1
    gamma: float = 0.125
    snapshot_rule: str = LAST_ITERATE
    seed: int = 0
    budget_passes: float = 1.0
    eta0: float | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if not self.eta > 0.0:
            raise ValueError("eta must be > 0")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")
        if self.snapshot_rule not in (LAST_ITERATE, UNIFORM_RANDOM):
            raise ValueError(f"unknown snapshot rule {self.snapshot_rule!r}")
        if not self.budget_passes > 0.0:
            raise ValueError("budget_passes must be > 0")
        if self.eta0 is not None and not self.eta0 > 0.0:
            raise ValueError("eta0 must be > 0 when given")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


@dataclass(frozen=True)
class TraceRecord:
    effective_passes: float
    loss: float
    event: str
    grad_norm_sq: float | None = None
    vt_norm_sq: float | None = None
    test_error: float | None = None


@dataclass
class RunResult:
    final_w: np.ndarray
    trace: list
    total_component_evals: int
    outer_iterations: int


class _Monitor:
    """Trace collector.  Loss (and optional test error) is evaluated at every
    record; this measurement cost is excluded from the eval budget."""

    def __init__(self, problem, record_stride=None, test_set=None):
        self.problem = problem
        self.stride = record_stride
        self.test_set = test_set
        self.records = []
        self.outers = 0
        self._next_mark = record_stride if record_stride else None

    def _test_err(self, w):
        if self.test_set is None:
            return None
        feats, labels = self.test_set
        return _test_error(feats, labels, w)

    def _emit(self, w, evals, event, grad_norm_sq=None, vt_norm_sq=None):
        loss = self.problem.loss(w)
        if not math.isfinite(loss):
            raise DivergedError("non-finite loss", list(self.records), evals, self.outers)
        self.records.append(
            TraceRecord(
                effective_passes=evals / self.problem.n,
                loss=loss,
                event=event,
                grad_norm_sq=grad_norm_sq,
                vt_norm_sq=vt_norm_sq,
                test_error=self._test_err(w),
            )
        )

    def outer_start(self, w, evals, grad_sq):
        self._emit(w, evals, OUTER_START, grad_norm_sq=grad_sq)

    def inner(self, w, evals, vt_sq):
        if self.stride is None:
            return
        if evals >= self._next_mark:
            self._emit(w, evals, INNER_STEP, vt_norm_sq=vt_sq)
            self._next_mark = (evals // self.stride + 1) * self.stride

    def snapshot(self, w, evals):
        self._emit(w, evals, SNAPSHOT)


def _budget_evals(passes: float, n: int) -> int:
    # tiny nudge so budgets like 80.6 * 5 land on the intended integer
    return int(math.floor(passes * float(n) + 1e-9))


def _check_finite(w, monitor, evals, outers):
    if not np.isfinite(w).all():
        raise DivergedError("non-finite iterate", list(monitor.records), evals, outers)


def _copy_start(w0) -> np.ndarray:
    w = np.array(w0, dtype=np.float64)
    if w.ndim != 1:
        raise ValueError("starting point must be a 1-D vector")
    return w


def sarah_run(p, cfg: SolverConfig, w0, *, record_stride=None, test_set=None) -> RunResult:
    """Recursive-gradient solver; see the module docstring for the update."""
    return _variance_reduced_run(p, cfg, w0, SARAH, record_stride, test_set)


def svrg_run(p, cfg: SolverConfig, w0, *, record_stride=None, test_set=None) -> RunResult:
    """Snapshot-anchored variance-reduced solver."""
    return _variance_reduced_run(p, cfg, w0, SVRG, record_stride, test_set)


def _variance_reduced_run(p, cfg, w0, variant, record_stride, test_set):
    if cfg.algorithm != variant:
        raise ValueError(f"config algorithm {cfg.algorithm!r} does not match {variant!r}")
    n = p.n
    rng = Rng(cfg.seed)
    mon = _Monitor(p, record_stride, test_set)
    budget = _budget_evals(cfg.budget_passes, n)
    w_tilde = _copy_start(w0)
    evals = 0
    outers = 0
    while evals < budget:
        outers += 1
        mon.outers = outers
        snap_t = rng.below(cfg.m + 1) if cfg.snapshot_rule == UNIFORM_RANDOM else None
        w_prev = w_tilde
        v = p.full_grad(w_prev)
        evals += n
        _check_finite(v, mon, evals, outers)
        mon.outer_start(w_prev, evals, norm_sq(v))
        snap = w_prev if snap_t == 0 else None
        anchor_w, anchor_v = w_prev, v  # SVRG references the outer point
        w = w_prev - cfg.eta * v
        _check_finite(w, mon, evals, outers)
        if snap_t == 1:
            snap = w
        t = 1
        while t <= cfg.m - 1 and evals < budget:
            i = rng.below(n)
            if variant == SARAH:
                v = p.component_grad(i, w) - p.component_grad(i, w_prev) + v
            else:
                v = p.component_grad(i, w) - p.component_grad(i, anchor_w) + anchor_v
            w_prev = w
            w = w - cfg.eta * v
            evals += 2
            t += 1
            _check_finite(w, mon, evals, outers)
            if snap_t == t:
                snap = w
            mon.inner(w, evals, norm_sq(v))
        if cfg.snapshot_rule == UNIFORM_RANDOM:
            # if the budget cut the loop before the drawn index, fall back to
            # the last iterate
            w_tilde = snap if snap is not None else w
        else:
            w_tilde = w
        mon.snapshot(w_tilde, evals)
    return RunResult(w_tilde, mon.records, evals, outers)


def sarah_plus_run(p, cfg: SolverConfig, w0, *, record_stride=None, test_set=None) -> RunResult:
    """Recursive-gradient solver with the adaptive inner-loop stop.

    The inner loop runs while ``||v_{t-1}||^2 > gamma ||v_0||^2`` and
    ``t < m``; the snapshot is always the last iterate.  ``gamma = 1`` never
    enters the inner loop, which reduces the method to plain gradient
    descent.
    """
    if cfg.algorithm != SARAH_PLUS:
        raise ValueError(f"config algorithm {cfg.algorithm!r} does not match {SARAH_PLUS!r}")
    n = p.n
    rng = Rng(cfg.seed)
    mon = _Monitor(p, record_stride, test_set)
    budget = _budget_evals(cfg.budget_passes, n)
    w_tilde = _copy_start(w0)
    evals = 0
    outers = 0
    while evals < budget:
        outers += 1
        mon.outers = outers
        w_prev = w_tilde
        v = p.full_grad(w_prev)
        evals += n
        _check_finite(v, mon, evals, outers)
        v0_sq = norm_sq(v)
        mon.outer_start(w_prev, evals, v0_sq)
        w = w_prev - cfg.eta * v
        _check_finite(w, mon, evals, outers)
        v_sq = v0_sq
        t = 1
        while v_sq > cfg.gamma * v0_sq and t < cfg.m and evals < budget:
            i = rng.below(n)
            v = p.component_grad(i, w) - p.component_grad(i, w_prev) + v
            w_prev = w
            w = w - cfg.eta * v
            v_sq = norm_sq(v)
            evals += 2
            t += 1
            _check_finite(w, mon, evals, outers)
            mon.inner(w, evals, v_sq)
        w_tilde = w
        mon.snapshot(w_tilde, evals)
    return RunResult(w_tilde, mon.records, evals, outers)


def gd_run(p, cfg: SolverConfig, w0, *, record_stride=None, test_set=None) -> RunResult:
    if cfg.algorithm != GD:
        raise ValueError(f"config algorithm {cfg.algorithm!r} does not match {GD!r}")
    n = p.n
    mon = _Monitor(p, record_stride, test_set)
    budget = _budget_evals(cfg.budget_passes, n)
    w = _copy_start(w0)
    evals = 0
    steps = 0
    while evals < budget:
        steps += 1
        mon.outers = steps
        g = p.full_grad(w)
        evals += n
        _check_finite(g, mon, evals, steps)
        gsq = norm_sq(g)
        mon.outer_start(w, evals, gsq)
        w = w - cfg.eta * g
        _check_finite(w, mon, evals, steps)
    return RunResult(w, mon.records, evals, steps)


def fista_run(p, cfg: SolverConfig, w0, *, record_stride=None, test_set=None,
              use_momentum: bool = True) -> RunResult:
    """Accelerated full-gradient method with the standard momentum sequence
    ``t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2``; with momentum disabled the
    iterates coincide with plain gradient descent."""
    if cfg.algorithm != FISTA:
        raise ValueError(f"config algorithm {cfg.algorithm!r} does not match {FISTA!r}")
    n = p.n
    mon = _Monitor(p, record_stride, test_set)
    budget = _budget_evals(cfg.budget_passes, n)
    x = _copy_start(w0)
    y = x
    tk = 1.0
    evals = 0
    steps = 0
    while evals < budget:
        steps += 1
        mon.outers = steps
        g = p.full_grad(y)
        evals += n
        _check_finite(g, mon, evals, steps)
        gsq = norm_sq(g)  # gradient at the momentum point
        mon.outer_start(x, evals, gsq)
        x_new = y - cfg.eta * g
        _check_finite(x_new, mon, evals, steps)
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * tk * tk)) if use_momentum else 1.0
        coef = (tk - 1.0) / t_new
        y = x_new if coef == 0.0 else x_new + coef * (x_new - x)
        x = x_new
        tk = t_new
    return RunResult(x, mon.records, evals, steps)


def sgd_plus_run(p, cfg: SolverConfig, w0, *, record_stride=None, test_set=None) -> RunResult:
    """Plain stochastic gradient with rate eta0 / (k+1), decayed once per
    completed effective pass."""
    if cfg.algorithm != SGD_PLUS:
        raise ValueError(f"config algorithm {cfg.algorithm!r} does not match {SGD_PLUS!r}")
    n = p.n
    rng = Rng(cfg.seed)
    mon = _Monitor(p, record_stride, test_set)
    budget = _budget_evals(cfg.budget_passes, n)
    eta0 = cfg.eta0 if cfg.eta0 is not None else cfg.eta
    w = _copy_start(w0)
    evals = 0
    while evals < budget:
        step = eta0 / (evals // n + 1)
        i = rng.below(n)
        g = p.component_grad(i, w)
        w = w - step * g
        evals += 1
        _check_finite(w, mon, evals, 0)
        mon.inner(w, evals, norm_sq(g))
    return RunResult(w, mon.records, evals, 0)


def sag_run(p, cfg: SolverConfig, w0, *, record_stride=None, test_set=None) -> RunResult:
    """Stored-gradient method for regularized linear models.

    Keeps one scalar per sample (the derivative coefficient of the data
    term, zero-initialized) and steps along
    ``(1/n) sum_i stored_i * x_i + lam * w``; one eval per step.
    """
    if cfg.algorithm != SAG:
        raise ValueError(f"config algorithm {cfg.algorithm!r} does not match {SAG!r}")
    coef_fn = getattr(p, "component_coef", None)
    if coef_fn is None or getattr(p, "lam", None) is None:
        raise UnsupportedObjective("sag needs a lambda-regularized linear model")
    n = p.n
    rng = Rng(cfg.seed)
    mon = _Monitor(p, record_stride, test_set)
    budget = _budget_evals(cfg.budget_passes, n)
    w = _copy_start(w0)
    stored = np.zeros(n)
    avg = np.zeros(p.d)
    evals = 0
    while evals < budget:
        i = rng.below(n)
        c_new = coef_fn(i, w)
        axpy_sparse((c_new - stored[i]) / n, p.features.row(i), avg)
        stored[i] = c_new
        direction = avg + p.lam * w
        w = w - cfg.eta * direction
        evals += 1
        _check_finite(w, mon, evals, 0)
        mon.inner(w, evals, norm_sq(direction))
    return RunResult(w, mon.records, evals, 0)


_RUNNERS = {
    SARAH: sarah_run,
    SARAH_PLUS: sarah_plus_run,
    SVRG: svrg_run,
    SGD_PLUS: sgd_plus_run,
    SAG: sag_run,
    GD: gd_run,
    FISTA: fista_run,
}


def run(p, cfg: SolverConfig, w0, *, record_stride=None, test_set=None) -> RunResult:
    """Dispatch to the per-algorithm runner; same config and seed give
    bit-identical results."""
    try:
        runner = _RUNNERS[cfg.algorithm]
    except KeyError:
        raise ValueError(f"unknown algorithm {cfg.algorithm!r}") from None
    return runner(p, cfg, w0, record_stride=record_stride, test_set=test_set)
