"""Minimal dense/sparse numeric kernel with order-fixed reductions.

All reductions accumulate strictly left to right (prefix accumulation, no
pairwise blocking, no threaded BLAS), so repeated runs produce bit-identical
results regardless of thread count.  Dense vectors are plain 1-D float64
``numpy`` arrays; sparse rows and CSR matrices are small frozen dataclasses
around index/value arrays.
"""

from dataclasses import dataclass

import numpy as np


class DimensionMismatch(ValueError):
    """Raised when an index exceeds the target vector's length."""


def seq_sum(values) -> float:
    """Sum of ``values`` in strict left-to-right order.

    ``np.add.accumulate`` is required to produce every prefix, which forces
    sequential evaluation; the last prefix is the ordered sum.
    """
    a = np.asarray(values, dtype=np.float64)
    if a.size == 0:
        return 0.0
    return float(np.add.accumulate(a)[-1])


@dataclass(frozen=True)
class SparseRow:
    """One sparse row: strictly increasing column ids with matching values."""

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=np.int64))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if self.indices.shape != self.values.shape or self.indices.ndim != 1:
            raise ValueError("indices and values must be 1-D and the same length")
        if self.indices.size:
            if self.indices[0] < 0:
                raise ValueError("negative column index")
            if self.indices.size > 1 and not (np.diff(self.indices) > 0).all():
                raise ValueError("column indices must be strictly increasing")

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    @classmethod
    def _trusted(cls, indices: np.ndarray, values: np.ndarray) -> "SparseRow":
        # bypass re-validation for slices of an already-validated matrix
        obj = object.__new__(cls)
        object.__setattr__(obj, "indices", indices)
        object.__setattr__(obj, "values", values)
        return obj


def dot(row: SparseRow, w: np.ndarray) -> float:
    """Sparse-dense inner product, accumulated in index order."""
    if row.indices.size and row.indices[-1] >= w.shape[0]:
        raise DimensionMismatch(
            f"row index {int(row.indices[-1])} out of bounds for length {w.shape[0]}"
        )
    if row.indices.size == 0:
        return 0.0
    return seq_sum(row.values * w[row.indices])


def axpy_sparse(alpha: float, row: SparseRow, w: np.ndarray) -> np.ndarray:
    """In place ``w[j] += alpha * row[j]`` at the stored indices; returns ``w``."""
    if row.indices.size and row.indices[-1] >= w.shape[0]:
        raise DimensionMismatch(
            f"row index {int(row.indices[-1])} out of bounds for length {w.shape[0]}"
        )
    # indices are strictly increasing (unique), so fancy-index += is exact
    w[row.indices] += alpha * row.values
    return w


def norm_sq(w: np.ndarray) -> float:
    """Squared Euclidean norm, accumulated left to right."""
    a = np.asarray(w, dtype=np.float64)
    return seq_sum(a * a)


@dataclass(frozen=True)
class CsrMatrix:
    """Compressed sparse rows: ``row_offsets`` (n+1), column ids, values."""

    row_offsets: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    n_rows: int
    n_cols: int

    def __post_init__(self):
        object.__setattr__(self, "row_offsets", np.asarray(self.row_offsets, dtype=np.int64))
        object.__setattr__(self, "cols", np.asarray(self.cols, dtype=np.int64))
        object.__setattr__(self, "vals", np.asarray(self.vals, dtype=np.float64))
        off = self.row_offsets
        if off.shape != (self.n_rows + 1,):
            raise ValueError("row_offsets must have length n_rows + 1")
        if off[0] != 0 or off[-1] != self.cols.size or (np.diff(off) < 0).any():
            raise ValueError("row_offsets must be non-decreasing from 0 to nnz")
        if self.cols.shape != self.vals.shape:
            raise ValueError("cols and vals must have the same length")
        if self.cols.size:
            if self.cols.min() < 0 or self.cols.max() >= self.n_cols:
                raise ValueError("column index out of range")
            for i in range(self.n_rows):
                c = self.cols[off[i]:off[i + 1]]
                if c.size > 1 and not (np.diff(c) > 0).all():
                    raise ValueError(f"row {i}: column ids not strictly increasing")
        object.__setattr__(self, "_row_cache", [None] * self.n_rows)

    @property
    def nnz(self) -> int:
        return int(self.cols.size)

    def row(self, i: int) -> SparseRow:
        cached = self._row_cache[i]
        if cached is None:
            lo, hi = self.row_offsets[i], self.row_offsets[i + 1]
            cached = SparseRow._trusted(self.cols[lo:hi], self.vals[lo:hi])
            self._row_cache[i] = cached
        return cached

    @classmethod
    def from_rows(cls, rows, n_cols: int) -> "CsrMatrix":
        """Build from a sequence of ``(indices, values)`` pairs."""
        offsets = [0]
        cols, vals = [], []
        for idx, val in rows:
            cols.extend(int(j) for j in idx)
            vals.extend(float(v) for v in val)
            offsets.append(len(cols))
        return cls(
            np.asarray(offsets, dtype=np.int64),
            np.asarray(cols, dtype=np.int64),
            np.asarray(vals, dtype=np.float64),
            len(offsets) - 1,
            n_cols,
        )

    @classmethod
    def from_dense(cls, a) -> "CsrMatrix":
        a = np.asarray(a, dtype=np.float64)
        rows = []
        for i in range(a.shape[0]):
            (idx,) = np.nonzero(a[i])
            rows.append((idx, a[i, idx]))
        return cls.from_rows(rows, a.shape[1])

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols))
        for i in range(self.n_rows):
            lo, hi = self.row_offsets[i], self.row_offsets[i + 1]
            out[i, self.cols[lo:hi]] = self.vals[lo:hi]
        return out
