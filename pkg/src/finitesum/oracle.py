"""Exact expectations over all inner-loop index sequences on tiny problems.

For an inner loop of length m on an n-component problem there are
``n^(m-1)`` equally likely index sequences.  Enumerating all of them and
rolling the exact recursion per sequence gives the true expectations of
every inner-loop quantity with no sampling error, which is what lets the
identities and bounds of the analysis be checked as (in)equalities between
numbers rather than as statistical tests.

Conventions: the direction v_t exists for t in {0, ..., m-1} (v_0 is the
exact full gradient) while iterates w_t exist for t in {0, ..., m}; the
snapshot-averaged gradient statistic is the uniform average of
``E||grad P(w_t)||^2`` over t in {0, ..., m}.  Accumulation runs over
sequences in lexicographic order with the uniform weight applied once at
finalization.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .numkit import norm_sq, seq_sum
from .theory import DomainError, RateParams

ENUMERATION_GUARD = 10**6

P_STRONG = "p_strong"
EACH_STRONG = "each_strong"
CONVEX = "convex"
REGIMES = (P_STRONG, EACH_STRONG, CONVEX)


class EnumerationGuardError(ValueError):
    """The sequence count n^(m-1) exceeds the tractability guard."""


@dataclass
class ExactExpectations:
    """Exact inner-loop expectations; see the module docstring for indices."""

    n: int
    m: int
    eta: float
    sequences: int
    e_v: np.ndarray             # (m, d)  E[v_t]
    e_grad_p: np.ndarray        # (m, d)  E[grad P(w_t)]
    e_v_sq: np.ndarray          # (m,)    E||v_t||^2
    e_gap_sq: np.ndarray        # (m,)    E||grad P(w_t) - v_t||^2
    e_step_sq: np.ndarray       # (m,)    E||v_t - v_{t-1}||^2, nan at t=0
    e_gradstep_sq: np.ndarray   # (m,)    E||grad P(w_t) - grad P(w_{t-1})||^2, nan at t=0
    e_loss: np.ndarray          # (m,)    E[P(w_t)]
    e_grad_p_sq: np.ndarray     # (m+1,)  E||grad P(w_t)||^2
    snapshot_grad_sq: float     # mean of e_grad_p_sq over t = 0..m
    max_conditional_bias: float  # max over visited states of
    #                              ||E[v_t | history] - grad P(w_t)||


def enumerate_sarah(p, eta: float, m: int, w0) -> ExactExpectations:
    """Exact expectations for the recursive-direction inner loop."""
    return _enumerate(p, eta, m, w0, recursive=True)


def enumerate_svrg(p, eta: float, m: int, w0) -> ExactExpectations:
    """Exact expectations for the snapshot-anchored inner loop."""
    return _enumerate(p, eta, m, w0, recursive=False)


def _enumerate(p, eta, m, w0, recursive):
    n = p.n
    if m < 1:
        raise ValueError("m must be >= 1")
    count = n ** (m - 1)
    if count > ENUMERATION_GUARD:
        raise EnumerationGuardError(f"n^(m-1) = {count} exceeds {ENUMERATION_GUARD}")
    w0 = np.array(w0, dtype=np.float64)
    d = w0.shape[0]

    v0 = p.full_grad(w0)
    if not np.isfinite(v0).all():
        raise FloatingPointError("non-finite gradient at the starting point")
    loss0 = p.loss(w0)
    v0_sq = norm_sq(v0)

    sum_v = np.zeros((m, d))
    sum_gp = np.zeros((m, d))
    sum_v_sq = np.zeros(m)
    sum_gap_sq = np.zeros(m)
    sum_step_sq = np.zeros(m)
    sum_gradstep_sq = np.zeros(m)
    sum_loss = np.zeros(m)
    sum_gp_sq = np.zeros(m + 1)
    max_bias = 0.0

    w1 = w0 - eta * v0  # shared by every sequence
    for seq in itertools.product(range(n), repeat=m - 1):
        # t = 0 state (identical across sequences; accumulated per sequence so
        # every field carries the same uniform weight)
        sum_v[0] += v0
        sum_gp[0] += v0
        sum_v_sq[0] += v0_sq
        sum_loss[0] += loss0
        sum_gp_sq[0] += v0_sq
        w_prev, v_prev, gp_prev = w0, v0, v0
        w = w1
        for t in range(1, m):
            i = seq[t - 1]
            gp = p.full_grad(w)
            anchor_w, anchor_v = (w_prev, v_prev) if recursive else (w0, v0)
            # conditional mean of v_t given the history, by explicit
            # per-branch averaging over the next index
            cond = np.zeros(d)
            for j in range(n):
                cond += p.component_grad(j, w) - p.component_grad(j, anchor_w)
            cond *= 1.0 / n
            cond += anchor_v
            bias = math.sqrt(norm_sq(cond - gp))
            if bias > max_bias:
                max_bias = bias
            v = p.component_grad(i, w) - p.component_grad(i, anchor_w) + anchor_v
            if not np.isfinite(v).all():
                raise FloatingPointError("non-finite direction during enumeration")
            sum_v[t] += v
            sum_gp[t] += gp
            sum_v_sq[t] += norm_sq(v)
            sum_gap_sq[t] += norm_sq(gp - v)
            sum_step_sq[t] += norm_sq(v - v_prev)
            sum_gradstep_sq[t] += norm_sq(gp - gp_prev)
            sum_loss[t] += p.loss(w)
            sum_gp_sq[t] += norm_sq(gp)
            w_prev, v_prev, gp_prev = w, v, gp
            w = w - eta * v
            if not np.isfinite(w).all():
                raise FloatingPointError("non-finite iterate during enumeration")
        sum_gp_sq[m] += norm_sq(p.full_grad(w))

    scale = 1.0 / count  # weight applied once, after accumulation
    e_step = sum_step_sq * scale
    e_gradstep = sum_gradstep_sq * scale
    e_step[0] = math.nan
    e_gradstep[0] = math.nan
    e_gp_sq = sum_gp_sq * scale
    return ExactExpectations(
        n=n,
        m=m,
        eta=eta,
        sequences=count,
        e_v=sum_v * scale,
        e_grad_p=sum_gp * scale,
        e_v_sq=sum_v_sq * scale,
        e_gap_sq=sum_gap_sq * scale,
        e_step_sq=e_step,
        e_gradstep_sq=e_gradstep,
        e_loss=sum_loss * scale,
        e_grad_p_sq=e_gp_sq,
        snapshot_grad_sq=seq_sum(e_gp_sq) / (m + 1),
        max_conditional_bias=max_bias,
    )


@dataclass
class GapIdentityReport:
    """Per-index deviations of the gap decomposition identity."""

    deviations: np.ndarray  # relative deviation per t (index 0 unused -> 0)
    max_rel_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_deviation <= self.tolerance


def check_gap_identity(ex: ExactExpectations, tolerance: float = 1e-10) -> GapIdentityReport:
    """Check that for every t >= 1 the exact gap satisfies

        E||grad P(w_t) - v_t||^2
            = sum_{j<=t} E||v_j - v_{j-1}||^2 - sum_{j<=t} E||grad P(w_j) - grad P(w_{j-1})||^2.

    This is an equality of the dynamics (no convexity or step-size
    requirement).  Deviations are measured relative to the larger of the
    two partial sums, which keeps cancellation-dominated cases meaningful.
    """
    devs = np.zeros(ex.m)
    step_sum = 0.0
    gradstep_sum = 0.0
    for t in range(1, ex.m):
        step_sum += ex.e_step_sq[t]
        gradstep_sum += ex.e_gradstep_sq[t]
        lhs = ex.e_gap_sq[t]
        rhs = step_sum - gradstep_sum
        scale = max(abs(lhs), step_sum, gradstep_sum, 1e-300)
        devs[t] = abs(lhs - rhs) / scale
    max_dev = float(devs.max()) if ex.m > 1 else 0.0
    return GapIdentityReport(devs, max_dev, tolerance)


@dataclass
class CheckResult:
    name: str
    max_violation: float
    passed: bool
    applicable: bool = True


@dataclass
class BoundReport:
    regime: str
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.applicable)


# positive violation = bound breached; tiny slack absorbs float noise in the
# exact expectations (the true statements are inequalities of real numbers)
_REL_SLACK = 1e-9


def _check(name, lhs_rhs_pairs, scale):
    worst = -math.inf
    for lhs, rhs in lhs_rhs_pairs:
        worst = max(worst, (lhs - rhs) / scale)
    return CheckResult(name, worst, worst <= _REL_SLACK)


def check_inner_loop_bounds(
    ex: ExactExpectations, rp: RateParams, regime: str, p_star: float
) -> BoundReport:
    """Verify the inner-loop decay bounds against exact expectations.

    regime selects the contraction assertion:

    * ``p_strong``  -- the average P is rp.mu-strongly convex and every
      component is convex; needs eta < 2/L; asserts
      ``E||v_t||^2 <= [1 - (2/(eta L) - 1) mu^2 eta^2]^t ||grad P(w_0)||^2``.
    * ``each_strong`` -- every component is rp.mu-strongly convex; needs
      eta <= 2/(mu+L); asserts
      ``E||v_t||^2 <= (1 - 2 mu L eta/(mu+L))^t ||grad P(w_0)||^2``.
    * ``convex``    -- components convex; needs eta < 2/L; asserts the gap
      bound ``E||grad P(w_t) - v_t||^2 <= eta L/(2 - eta L) ||v_0||^2``.

    Two further assertions run for every regime: the summed descent
    inequality over t = 0..m-1 (no convexity needed; the horizon is the last
    index where v is defined), and, when eta <= 1/L, the single-loop bound
    on the uniformly averaged snapshot gradient.  ``p_star`` is the optimal
    value of P (exact for quadratic sums, or a high-accuracy reference).
    """
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    eta, L, mu, m = rp.eta, rp.L, rp.mu, ex.m
    g0_sq = float(ex.e_grad_p_sq[0])
    scale = max(1.0, g0_sq)
    checks = []

    if regime == P_STRONG:
        if not eta < 2.0 / L:
            raise DomainError("p_strong needs eta < 2/L")
        factor = 1.0 - (2.0 / (eta * L) - 1.0) * mu * mu * eta * eta
        pairs = [(ex.e_v_sq[t], factor**t * g0_sq) for t in range(1, m)]
        checks.append(_check("direction_decay_p_strong", pairs, scale))
    elif regime == EACH_STRONG:
        if not eta <= 2.0 / (mu + L) * (1.0 + 1e-12):
            raise DomainError("each_strong needs eta <= 2/(mu+L)")
        factor = 1.0 - 2.0 * mu * L * eta / (mu + L)
        pairs = [(ex.e_v_sq[t], factor**t * g0_sq) for t in range(1, m)]
        checks.append(_check("direction_decay_each_strong", pairs, scale))
    else:
        if not eta < 2.0 / L:
            raise DomainError("convex regime needs eta < 2/L")
        gap_cap = eta * L / (2.0 - eta * L) * float(ex.e_v_sq[0])
        pairs = [(ex.e_gap_sq[t], gap_cap) for t in range(1, m)]
        checks.append(_check("gap_bound_convex", pairs, scale))

    # summed descent inequality, horizon m-1 (v_t exists for t <= m-1):
    # sum E||grad P||^2 <= (2/eta)(P(w_0) - P*) + sum E||gap||^2
    #                      - (1 - L eta) sum E||v||^2
    lhs = seq_sum(ex.e_grad_p_sq[:m])
    rhs = (
        2.0 / eta * (float(ex.e_loss[0]) - p_star)
        + seq_sum(ex.e_gap_sq)
        - (1.0 - L * eta) * seq_sum(ex.e_v_sq)
    )
    checks.append(_check("summed_descent", [(lhs, rhs)], scale))

    # single-loop snapshot bound (uniform over t = 0..m); valid for eta <= 1/L
    applicable = eta <= 1.0 / L * (1.0 + 1e-12)
    if applicable:
        rhs = 2.0 / (eta * (m + 1.0)) * (float(ex.e_loss[0]) - p_star) + eta * L / (
            2.0 - eta * L
        ) * g0_sq
        res = _check("snapshot_bound", [(ex.snapshot_grad_sq, rhs)], scale)
    else:
        res = CheckResult("snapshot_bound", math.nan, True, applicable=False)
    checks.append(res)
    return BoundReport(regime, checks)
