"""Finite-sum objectives with component gradients and curvature constants.

Each problem is an average ``P(w) = (1/n) sum_i f_i(w)`` of ``n`` component
functions over dimension ``d``:

* :class:`LogisticL2` -- ``f_i(w) = log(1 + exp(-y_i x_i^T w)) + (lam/2)||w||^2``
  with labels in {-1, +1};
* :class:`LeastSquaresL2` -- ``f_i(w) = (x_i^T w - y_i)^2 + (lam/2)||w||^2``;
* :class:`QuadraticSum` -- ``f_i(w) = (1/2)(w - c_i)^T A_i (w - c_i)`` for
  symmetric PSD matrices ``A_i`` whose average is positive definite.

All summations over components run in index order via the numkit kernel, so
gradient and loss evaluations are bit-reproducible.  Instances are immutable
after construction and safe to share across threads.
"""

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .numkit import CsrMatrix, DimensionMismatch, axpy_sparse, dot, norm_sq, seq_sum


class DegenerateProblem(ValueError):
    """Raised when a problem has no usable curvature (e.g. L = 0)."""


@dataclass(frozen=True)
class SmoothnessInfo:
    """Component Lipschitz constant, strong-convexity modulus, and their ratio."""

    L: float
    mu: float
    kappa: float | None  # L / mu, defined only when mu > 0


def _stable_sigmoid_neg(z: float) -> float:
    """1 / (1 + exp(z)) without overflow for large |z|."""
    if z >= 0.0:
        e = math.exp(-z)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(z))


def _logistic_loss_term(z: float) -> float:
    """log(1 + exp(-z)), branch-split at z = 0 for stability."""
    if z >= 0.0:
        return math.log1p(math.exp(-z))
    return -z + math.log1p(math.exp(z))


class _LinearModel:
    """Shared machinery for the two regularized linear models."""

    def __init__(self, features: CsrMatrix, labels, lam: float, kind: str):
        labels = np.asarray(labels, dtype=np.float64)
        if features.n_rows < 1 or features.n_cols < 1:
            raise ValueError("need at least one sample and one feature")
        if labels.shape != (features.n_rows,):
            raise ValueError("labels must match the number of feature rows")
        if lam < 0.0:
            raise ValueError("regularization weight must be >= 0")
        self.features = features
        self.labels = labels
        self.lam = float(lam)
        self.kind = kind

    @property
    def n(self) -> int:
        return self.features.n_rows

    @property
    def d(self) -> int:
        return self.features.n_cols

    def _check_dim(self, w):
        if w.shape != (self.d,):
            raise DimensionMismatch(f"expected vector of length {self.d}, got shape {w.shape}")

    def component_coef(self, i: int, w: np.ndarray) -> float:
        """Scalar s such that the data part of grad f_i(w) is s * x_i."""
        raise NotImplementedError

    def _loss_terms(self, margins: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def component_grad(self, i: int, w: np.ndarray) -> np.ndarray:
        self._check_dim(w)
        if not 0 <= i < self.n:
            raise IndexError(f"component index {i} out of range [0, {self.n})")
        g = self.lam * w
        axpy_sparse(self.component_coef(i, w), self.features.row(i), g)
        return g

    def full_grad(self, w: np.ndarray) -> np.ndarray:
        """(1/n) sum_i grad f_i(w), accumulated in index order."""
        self._check_dim(w)
        acc = np.zeros_like(w)
        for i in range(self.n):
            axpy_sparse(self.component_coef(i, w), self.features.row(i), acc)
        acc *= 1.0 / self.n
        acc += self.lam * w
        return acc

    def margins(self, w: np.ndarray) -> np.ndarray:
        """x_i^T w for every row, each computed with the ordered sparse dot."""
        self._check_dim(w)
        return np.array([dot(self.features.row(i), w) for i in range(self.n)])

    def loss(self, w: np.ndarray) -> float:
        self._check_dim(w)
        terms = self._loss_terms(self.margins(w))
        return seq_sum(terms) / self.n + 0.5 * self.lam * norm_sq(w)

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(self.kind.encode())
        h.update(np.float64(self.lam).tobytes())
        for a in (self.features.row_offsets, self.features.cols, self.features.vals, self.labels):
            h.update(np.ascontiguousarray(a).tobytes())
        return h.hexdigest()

    def _max_row_norm_sq(self) -> float:
        off = self.features.row_offsets
        best = 0.0
        for i in range(self.n):
            v = self.features.vals[off[i]:off[i + 1]]
            best = max(best, seq_sum(v * v))
        return best


class LogisticL2(_LinearModel):
    """L2-regularized logistic regression for binary classification."""

    def __init__(self, features: CsrMatrix, labels, lam: float):
        super().__init__(features, labels, lam, "logistic_l2")
        bad = np.setdiff1d(np.unique(self.labels), [-1.0, 1.0])
        if bad.size:
            raise ValueError(f"logistic labels must be -1/+1, found {bad[:5]}")

    def component_coef(self, i: int, w: np.ndarray) -> float:
        y = self.labels[i]
        z = y * dot(self.features.row(i), w)
        return -y * _stable_sigmoid_neg(z)

    def _loss_terms(self, margins: np.ndarray) -> np.ndarray:
        z = self.labels * margins
        return np.array([_logistic_loss_term(zi) for zi in z])

    def smoothness(self) -> SmoothnessInfo:
        L = self._max_row_norm_sq() / 4.0 + self.lam
        if L == 0.0:
            raise DegenerateProblem("zero curvature: all rows empty and lam = 0")
        mu = self.lam
        return SmoothnessInfo(L, mu, L / mu if mu > 0 else None)

    def component_strong_convexity(self) -> float:
        return self.lam


class LeastSquaresL2(_LinearModel):
    """L2-regularized least squares regression."""

    def __init__(self, features: CsrMatrix, labels, lam: float):
        super().__init__(features, labels, lam, "least_squares_l2")

    def component_coef(self, i: int, w: np.ndarray) -> float:
        return 2.0 * (dot(self.features.row(i), w) - self.labels[i])

    def _loss_terms(self, margins: np.ndarray) -> np.ndarray:
        r = margins - self.labels
        return r * r

    def smoothness(self) -> SmoothnessInfo:
        L = 2.0 * self._max_row_norm_sq() + self.lam
        if L == 0.0:
            raise DegenerateProblem("zero curvature: all rows empty and lam = 0")
        mu = self.lam
        return SmoothnessInfo(L, mu, L / mu if mu > 0 else None)

    def component_strong_convexity(self) -> float:
        return self.lam


class QuadraticSum:
    """Average of n quadratics (1/2)(w - c_i)^T A_i (w - c_i)."""

    kind = "quadratic_sum"

    def __init__(self, mats, centers):
        mats = np.asarray(mats, dtype=np.float64)
        centers = np.asarray(centers, dtype=np.float64)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ValueError("mats must have shape (n, d, d)")
        if centers.shape != mats.shape[:2]:
            raise ValueError("centers must have shape (n, d)")
        if mats.shape[0] < 1:
            raise ValueError("need at least one component")
        if not np.allclose(mats, np.transpose(mats, (0, 2, 1)), atol=1e-12):
            raise ValueError("each A_i must be symmetric")
        eigs = np.linalg.eigvalsh(mats)
        scale = max(1.0, float(np.abs(mats).max()))
        if eigs.min() < -1e-10 * scale:
            raise ValueError("each A_i must be positive semidefinite")
        if np.linalg.eigvalsh(mats.mean(axis=0)).min() <= 0.0:
            raise ValueError("the average of the A_i must be positive definite")
        self.mats = mats
        self.centers = centers
        self._eigs = eigs

    @property
    def n(self) -> int:
        return self.mats.shape[0]

    @property
    def d(self) -> int:
        return self.mats.shape[1]

    def _check_dim(self, w):
        if w.shape != (self.d,):
            raise DimensionMismatch(f"expected vector of length {self.d}, got shape {w.shape}")

    def _matvec(self, i: int, v: np.ndarray) -> np.ndarray:
        # row-by-row ordered dot keeps the result reproducible
        A = self.mats[i]
        return np.array([seq_sum(A[j] * v) for j in range(self.d)])

    def component_grad(self, i: int, w: np.ndarray) -> np.ndarray:
        self._check_dim(w)
        if not 0 <= i < self.n:
            raise IndexError(f"component index {i} out of range [0, {self.n})")
        return self._matvec(i, w - self.centers[i])

    def full_grad(self, w: np.ndarray) -> np.ndarray:
        self._check_dim(w)
        acc = np.zeros_like(w)
        for i in range(self.n):
            acc += self.component_grad(i, w)
        acc *= 1.0 / self.n
        return acc

    def loss(self, w: np.ndarray) -> float:
        self._check_dim(w)
        terms = []
        for i in range(self.n):
            diff = w - self.centers[i]
            terms.append(0.5 * seq_sum(diff * self._matvec(i, diff)))
        return seq_sum(terms) / self.n

    def smoothness(self) -> SmoothnessInfo:
        L = float(self._eigs.max())
        if L == 0.0:
            raise DegenerateProblem("all A_i are zero")
        mu = float(np.linalg.eigvalsh(self.mats.mean(axis=0)).min())
        return SmoothnessInfo(L, mu, L / mu if mu > 0 else None)

    def component_strong_convexity(self) -> float:
        """min_i lambda_min(A_i): the modulus shared by every component."""
        return float(self._eigs.min(axis=1).min())

    def minimizer(self) -> np.ndarray:
        """Closed-form optimum (sum A_i)^{-1} sum A_i c_i."""
        lhs = self.mats.mean(axis=0)
        rhs = np.zeros(self.d)
        for i in range(self.n):
            rhs += self._matvec(i, self.centers[i])
        rhs *= 1.0 / self.n
        return np.linalg.solve(lhs, rhs)

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(self.kind.encode())
        h.update(np.ascontiguousarray(self.mats).tobytes())
        h.update(np.ascontiguousarray(self.centers).tobytes())
        return h.hexdigest()


def test_error(features: CsrMatrix, labels, w: np.ndarray) -> float:
    """Fraction of rows with sign(x^T w) != y; sign(0) counts as +1."""
    labels = np.asarray(labels, dtype=np.float64)
    if features.n_rows == 0:
        raise ValueError("empty test set")
    if w.shape != (features.n_cols,):
        raise DimensionMismatch(
            f"expected vector of length {features.n_cols}, got shape {w.shape}"
        )
    wrong = 0
    for i in range(features.n_rows):
        pred = 1.0 if dot(features.row(i), w) >= 0.0 else -1.0
        if pred != labels[i]:
            wrong += 1
    return wrong / features.n_rows
