"""Closed-form convergence-rate and parameter-choice calculators.

For the strongly convex setting the per-outer-loop contraction of the
expected squared gradient norm is

* recursive-gradient method: ``1 / (mu eta (m+1)) + eta L / (2 - eta L)``
  for step sizes ``eta < 2/L`` (:func:`sarah_rate`);
* snapshot-anchored method:  ``1 / (mu eta (1 - 2 L eta) m) + 2 eta L /
  (1 - 2 eta L)`` for ``eta < 1/(2L)`` (:func:`svrg_rate`).

A rate below 1 means the outer iteration contracts; rates >= 1 are returned
as values (not errors) so sweeps can flag the feasible region.  All
functions are pure: identical inputs give bit-identical outputs.
"""

import math
from dataclasses import dataclass


class DomainError(ValueError):
    """A parameter is outside the formula's domain of validity."""


@dataclass(frozen=True)
class RateParams:
    """(mu, L, eta, m) bundle consumed by the rate calculators."""

    mu: float
    L: float
    eta: float
    m: float

    def __post_init__(self):
        if not 0.0 < self.mu <= self.L:
            raise ValueError("need 0 < mu <= L")
        if not self.eta > 0.0:
            raise ValueError("eta must be > 0")
        if not self.m >= 1:
            raise ValueError("m must be >= 1")

    @property
    def kappa(self) -> float:
        return self.L / self.mu


def sarah_rate(rp: RateParams) -> float:
    """Outer-loop contraction factor of the recursive-gradient method."""
    if not rp.eta < 2.0 / rp.L:
        raise DomainError("sarah_rate needs eta < 2/L")
    return 1.0 / (rp.mu * rp.eta * (rp.m + 1.0)) + rp.eta * rp.L / (2.0 - rp.eta * rp.L)


def svrg_rate(rp: RateParams) -> float:
    """Outer-loop contraction factor of the snapshot-anchored method."""
    if not rp.eta < 1.0 / (2.0 * rp.L):
        raise DomainError("svrg_rate needs eta < 1/(2L)")
    return (
        1.0 / (rp.mu * rp.eta * (1.0 - 2.0 * rp.L * rp.eta) * rp.m)
        + 2.0 * rp.eta * rp.L / (1.0 - 2.0 * rp.eta * rp.L)
    )


def optimal_inverse_step(sigma: float) -> float:
    """Inverse step scale theta* minimizing the inner-loop length at a fixed
    contraction factor; the step size is then ``eta = 1 / (theta* L)``.

    ``theta* = (sigma + 1 + sqrt(sigma + 1)) / (2 sigma)``, which exceeds
    ``1 + sqrt(2)/2`` for every contraction factor below 1.
    """
    if not 0.0 < sigma < 1.0:
        raise DomainError("contraction factor must lie in (0, 1)")
    return (sigma + 1.0 + math.sqrt(sigma + 1.0)) / (2.0 * sigma)


def optimal_inner_size(sigma: float, kappa: float) -> float:
    """Inner-loop length m* = (1/2)(2 theta* - 1)^2 kappa - 1 achieving the
    contraction factor ``sigma`` with the fewest inner steps."""
    theta = optimal_inverse_step(sigma)
    return 0.5 * (2.0 * theta - 1.0) ** 2 * kappa - 1.0


def inner_size_for(theta: float, sigma: float, kappa: float) -> float:
    """Inner-loop length needed at inverse step scale theta for contraction
    sigma: ``m = theta (2 theta - 1) / (sigma (2 theta - 1) - 1) * kappa - 1``."""
    denom = sigma * (2.0 * theta - 1.0) - 1.0
    if denom <= 0.0:
        raise DomainError("theta too small: the contraction is unattainable")
    return theta * (2.0 * theta - 1.0) / denom * kappa - 1.0


@dataclass(frozen=True)
class SingleLoopRate:
    rate: float
    eta: float


def single_loop_rate(L: float, m: int) -> SingleLoopRate:
    """Sublinear rate ``sqrt(2L/(m+1))`` of one long inner loop on general
    convex problems, with the matching step ``eta = sqrt(2/(L(m+1)))``.

    Requires ``m >= 2L - 1`` so the step stays within 1/L.
    """
    if m < 2.0 * L - 1.0:
        raise DomainError("need m >= 2L - 1")
    return SingleLoopRate(math.sqrt(2.0 * L / (m + 1.0)), math.sqrt(2.0 / (L * (m + 1.0))))


def multi_loop_convex_bound(delta: float, eta: float, L: float, s: int, g0_sq: float) -> float:
    """Bound on the expected squared gradient after s outer loops on convex
    problems: ``Delta (1 - alpha^s) + alpha^s g0_sq`` with
    ``Delta = delta (1 + eta L / (2 (1 - eta L)))`` and
    ``alpha = eta L / (2 - eta L)``."""
    if not 0.0 < eta < 1.0 / L:
        raise DomainError("need 0 < eta < 1/L")
    if delta < 0.0 or s < 0:
        raise DomainError("need delta >= 0 and s >= 0")
    alpha = eta * L / (2.0 - eta * L)
    big_delta = delta * (1.0 + eta * L / (2.0 * (1.0 - eta * L)))
    a_s = alpha ** s
    return big_delta * (1.0 - a_s) + a_s * g0_sq


def iterations_needed(g0_sq: float, eps: float) -> int:
    """Outer iterations ``ceil(log(g0_sq / eps) / log(9/7))`` needed to reach
    an expected squared gradient norm of eps with the tuned parameters
    (eta = 1/(2L), m = ceil(4.5 kappa)).

    Returns 0 when ``eps >= g0_sq`` (already accurate).  Ratios that are
    integers up to float noise are snapped before the ceiling so exact
    cancellations do not round up spuriously.
    """
    if not g0_sq > 0.0:
        raise DomainError("g0_sq must be > 0")
    if not eps > 0.0:
        raise DomainError("eps must be > 0")
    if eps >= g0_sq:
        return 0
    v = math.log(g0_sq / eps) / math.log(9.0 / 7.0)
    nearest = round(v)
    if abs(v - nearest) <= 1e-9 * max(1.0, abs(v)):
        return int(nearest)
    return int(math.ceil(v))


def _golden_min(f, lo: float, hi: float, tol: float) -> float:
    """Golden-section minimizer of a unimodal f on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    invphi2 = (3.0 - math.sqrt(5.0)) / 2.0
    a, b = lo, hi
    h = b - a
    c = a + invphi2 * h
    d = a + invphi * h
    fc, fd = f(c), f(d)
    while h > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + invphi2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + invphi * h
            fd = f(d)
    return 0.5 * (a + b)


@dataclass(frozen=True)
class RateCurveRow:
    m: float
    eta_sarah: float
    rate_sarah: float
    sarah_convergent: bool
    eta_svrg: float
    rate_svrg: float
    svrg_convergent: bool


# golden-section settings: tolerance 1e-12 on eta, brackets kept strictly
# inside the open domain by relative 1e-9 margins (avoids the rate poles)
_BRACKET_MARGIN = 1e-9
_ETA_TOL = 1e-12


def best_rate_curves(mu: float, L: float, m_grid) -> list[RateCurveRow]:
    """Per inner-loop size, the step size minimizing each method's rate.

    The recursive-gradient minimizer over ``eta in (0, 1/L)`` has the closed
    form ``theta* = (1 + sqrt(2 (m+1)/kappa)) / 2`` whenever that exceeds 1;
    otherwise (and always for the anchored method, over ``(0, 1/(4L))``) a
    golden-section search is used.  Rates >= 1 are returned with the
    convergent flag cleared rather than raising.
    """
    m_grid = list(m_grid)
    if not m_grid:
        raise ValueError("m_grid must be non-empty")
    if not 0.0 < mu < L:
        raise ValueError("need 0 < mu < L")
    kappa = L / mu
    rows = []
    for m in m_grid:
        if m < 1:
            raise ValueError("inner-loop sizes must be >= 1")
        # recursive-gradient method
        root = math.sqrt(2.0 * (m + 1.0) / kappa)
        if root > 1.0:
            theta = 0.5 * (1.0 + root)
            eta_s = 1.0 / (theta * L)
        else:
            eta_s = _golden_min(
                lambda e: sarah_rate(RateParams(mu, L, e, m)),
                _BRACKET_MARGIN / L,
                (1.0 - _BRACKET_MARGIN) / L,
                _ETA_TOL / L,
            )
        rate_s = sarah_rate(RateParams(mu, L, eta_s, m))
        # anchored method
        ub = 1.0 / (4.0 * L)
        eta_v = _golden_min(
            lambda e: svrg_rate(RateParams(mu, L, e, m)),
            _BRACKET_MARGIN * ub,
            (1.0 - _BRACKET_MARGIN) * ub,
            _ETA_TOL * ub,
        )
        rate_v = svrg_rate(RateParams(mu, L, eta_v, m))
        rows.append(
            RateCurveRow(
                m=float(m),
                eta_sarah=eta_s,
                rate_sarah=rate_s,
                sarah_convergent=rate_s < 1.0,
                eta_svrg=eta_v,
                rate_svrg=rate_v,
                svrg_convergent=rate_v < 1.0,
            )
        )
    return rows
