import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from finitesum.numkit import (
    CsrMatrix,
    DimensionMismatch,
    SparseRow,
    axpy_sparse,
    dot,
    norm_sq,
    seq_sum,
)


def test_seq_sum_is_strict_left_to_right():
    # regression canary: np.add.accumulate must match a plain python loop
    # bit for bit, else the determinism story falls apart
    rng = np.random.default_rng(0)
    for _ in range(300):
        a = rng.standard_normal(int(rng.integers(1, 400))) * 10.0 ** int(rng.integers(-9, 9))
        acc = 0.0
        for x in a.tolist():
            acc += x
        assert seq_sum(a) == acc


def test_seq_sum_empty():
    assert seq_sum(np.array([])) == 0.0


def test_dot_examples():
    w = np.array([3.0, 9.0, 4.0])
    assert dot(SparseRow([0, 2], [1.0, 2.0]), w) == 11.0  # 1*3 + 2*4
    assert dot(SparseRow([], []), np.ones(3)) == 0.0
    assert dot(SparseRow([1], [-1.0]), np.array([0.0, 5.0, 0.0])) == -5.0


def test_dot_out_of_bounds():
    with pytest.raises(DimensionMismatch):
        dot(SparseRow([3], [1.0]), np.zeros(3))


def test_axpy_examples():
    w = np.array([0.0, 0.0])
    axpy_sparse(2.0, SparseRow([1], [3.0]), w)
    assert w.tolist() == [0.0, 6.0]

    w = np.array([1.5, -2.0])
    before = w.copy()
    axpy_sparse(0.0, SparseRow([0, 1], [5.0, 7.0]), w)
    assert np.array_equal(w, before)

    w = np.array([1.0, 2.0])
    axpy_sparse(1.0, SparseRow([0, 1], [1.0, 1.0]), w)
    assert w.tolist() == [2.0, 3.0]


def test_axpy_out_of_bounds():
    with pytest.raises(DimensionMismatch):
        axpy_sparse(1.0, SparseRow([5], [1.0]), np.zeros(2))


def test_norm_sq_examples():
    assert norm_sq(np.array([3.0, 4.0])) == 25.0
    assert norm_sq(np.zeros(17)) == 0.0
    assert norm_sq(np.array([-1.0, 1.0, 1.0, 1.0])) == 4.0


@given(
    st.integers(min_value=1, max_value=12),
    st.floats(min_value=-8.0, max_value=8.0, allow_nan=False),
    st.integers(min_value=0, max_value=2**31),
)
@settings(max_examples=60, deadline=None)
def test_dot_linear_in_w(d, a, seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, d + 1))
    idx = np.sort(rng.choice(d, size=k, replace=False))
    row = SparseRow(idx, rng.standard_normal(k))
    w1, w2 = rng.standard_normal(d), rng.standard_normal(d)
    lhs = dot(row, a * w1 + w2)
    rhs = a * dot(row, w1) + dot(row, w2)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_axpy_roundtrip_exact_on_power_of_two_values():
    # +alpha then -alpha restores bits when products are exact
    rng = np.random.default_rng(3)
    for _ in range(50):
        d = int(rng.integers(2, 10))
        k = int(rng.integers(1, d + 1))
        idx = np.sort(rng.choice(d, size=k, replace=False))
        vals = 2.0 ** rng.integers(-3, 4, size=k).astype(float)
        w = 2.0 ** rng.integers(-3, 4, size=d).astype(float)
        row = SparseRow(idx, vals)
        before = w.copy()
        axpy_sparse(2.0, row, w)
        axpy_sparse(-2.0, row, w)
        assert np.array_equal(w, before)


def test_norm_sq_nonnegative_and_zero_iff_zero():
    rng = np.random.default_rng(9)
    for _ in range(100):
        v = rng.standard_normal(int(rng.integers(1, 30)))
        assert norm_sq(v) >= 0.0
        assert (norm_sq(v) == 0.0) == bool((v == 0.0).all())


def test_kernel_outputs_finite_on_finite_inputs():
    rng = np.random.default_rng(5)
    for _ in range(50):
        d = int(rng.integers(1, 20))
        w = rng.standard_normal(d) * 1e8
        k = int(rng.integers(1, d + 1))
        idx = np.sort(rng.choice(d, size=k, replace=False))
        row = SparseRow(idx, rng.standard_normal(k) * 1e8)
        assert np.isfinite(dot(row, w))
        assert np.isfinite(norm_sq(w))
        assert np.isfinite(axpy_sparse(1.5, row, w)).all()


def test_sparse_row_validation():
    with pytest.raises(ValueError):
        SparseRow([2, 1], [1.0, 1.0])  # not increasing
    with pytest.raises(ValueError):
        SparseRow([1, 1], [1.0, 1.0])  # duplicate
    with pytest.raises(ValueError):
        SparseRow([-1], [1.0])
    with pytest.raises(ValueError):
        SparseRow([0, 1], [1.0])  # length mismatch


def test_csr_construction_and_roundtrip():
    dense = np.array([[0.0, 1.5, 0.0], [2.0, 0.0, -3.0]])
    mat = CsrMatrix.from_dense(dense)
    assert mat.n_rows == 2 and mat.n_cols == 3 and mat.nnz == 3
    assert np.array_equal(mat.to_dense(), dense)
    r0 = mat.row(0)
    assert r0.indices.tolist() == [1] and r0.values.tolist() == [1.5]
    assert mat.row(0) is mat.row(0)  # cached view


def test_csr_validation():
    with pytest.raises(ValueError):
        CsrMatrix(np.array([0, 1]), np.array([5]), np.array([1.0]), 1, 3)  # col >= d
    with pytest.raises(ValueError):
        CsrMatrix(np.array([0, 2]), np.array([1, 1]), np.array([1.0, 1.0]), 1, 3)
    with pytest.raises(ValueError):
        CsrMatrix(np.array([1, 2]), np.array([0]), np.array([1.0]), 1, 3)  # offset[0] != 0
