"""Shared builders for randomized test problems.

Everything here is seeded through the package's own generator so failures
reproduce exactly.
"""

import numpy as np
import pytest

from finitesum.numkit import CsrMatrix
from finitesum.objectives import LeastSquaresL2, LogisticL2, QuadraticSum
from finitesum.rng import Rng


def random_quadratic(seed, n=3, d=2, floor=0.1, rank_deficient=False):
    """Random PSD quadratic sum; with rank_deficient, one component loses
    its floor (still PSD, average stays PD)."""
    rng = Rng(seed)
    mats = np.empty((n, d, d))
    centers = np.empty((n, d))
    for i in range(n):
        M = np.array(rng.normals(d * d)).reshape(d, d)
        f = 0.0 if (rank_deficient and i == 0) else floor
        mats[i] = M.T @ M + f * np.eye(d)
        if rank_deficient and i == 0:
            # make the first component exactly singular: rank-1 outer product
            u = np.array(rng.normals(d))
            mats[i] = np.outer(u, u)
        centers[i] = rng.normals(d)
    return QuadraticSum(mats, centers)


def random_logistic(seed, n=3, d=2, lam=0.1):
    rng = Rng(seed)
    rows = []
    labels = []
    idx = np.arange(d)
    for _ in range(n):
        rows.append((idx, np.array(rng.normals(d))))
        labels.append(1.0 if rng.uniform() < 0.5 else -1.0)
    return LogisticL2(CsrMatrix.from_rows(rows, d), np.array(labels), lam)


def random_least_squares(seed, n=4, d=3, lam=0.05):
    rng = Rng(seed)
    rows = []
    labels = []
    idx = np.arange(d)
    for _ in range(n):
        rows.append((idx, np.array(rng.normals(d))))
        labels.append(rng.normal())
    return LeastSquaresL2(CsrMatrix.from_rows(rows, d), np.array(labels), lam)


def random_start(seed, d, scale=1.0):
    return scale * np.array(Rng(seed, stream=99).normals(d))


def kendall_tau(xs):
    """Plain tau-a of a sequence against its time index (ties contribute 0)."""
    n = len(xs)
    conc = disc = 0
    for i in range(n):
        for j in range(i + 1, n):
            diff = xs[j] - xs[i]
            if diff > 0:
                conc += 1
            elif diff < 0:
                disc += 1
    return (conc - disc) / (n * (n - 1) / 2)


@pytest.fixture(scope="session")
def desk_problem():
    """Normalized synthetic logistic instance shared by the slow tests."""
    from finitesum import data, harness
    from finitesum.objectives import LogisticL2 as _L

    ds = data.synth_logistic(1000, 20, seed=7, separability=0.9)
    ds, _zeros = data.normalize_rows(ds)
    p = _L(ds.features, ds.labels, 1.0 / 1000)
    ref = harness.compute_reference(p, 1e-10)
    return p, ref
