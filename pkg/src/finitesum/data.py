"""Dataset ingestion, splitting, row normalization, and synthetic generators.

Input format is LIBSVM text: one sample per nonempty line,
``<label> <index>:<value> ...`` with 1-based strictly increasing indices.
Gzip-compressed files are decompressed transparently.  Binary labels given
as {0, 1} or {1, 2} are auto-mapped to {-1, +1} (order preserving) and the
mapping is recorded on the dataset.
"""

import gzip
import io
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .numkit import CsrMatrix, seq_sum
from .objectives import QuadraticSum
from .rng import Rng


class LibsvmFormatError(ValueError):
    """Malformed LIBSVM input; the message carries the offending line number."""


@dataclass(frozen=True)
class LabeledDataset:
    features: CsrMatrix
    labels: np.ndarray
    name: str
    normalized: bool = False
    label_mapping: str | None = None

    @property
    def n(self) -> int:
        return self.features.n_rows

    @property
    def d(self) -> int:
        return self.features.n_cols

    def content_hash(self) -> str:
        import hashlib

        h = hashlib.sha256()
        for a in (self.features.row_offsets, self.features.cols, self.features.vals, self.labels):
            h.update(np.ascontiguousarray(a).tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    seed: int


class NormalizeResult(NamedTuple):
    dataset: LabeledDataset
    zero_rows: int


def parse_libsvm(source, name: str = "libsvm") -> LabeledDataset:
    """Parse LIBSVM text from a string or an iterable of lines."""
    if isinstance(source, str):
        lines = source.splitlines()
    else:
        lines = source
    labels = []
    rows = []
    d = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        toks = line.split()
        try:
            label = float(toks[0])
        except ValueError:
            raise LibsvmFormatError(f"line {lineno}: non-numeric label {toks[0]!r}") from None
        idx, val = [], []
        prev = 0
        for tok in toks[1:]:
            parts = tok.split(":")
            if len(parts) != 2:
                raise LibsvmFormatError(f"line {lineno}: malformed pair {tok!r}")
            try:
                j = int(parts[0])
                v = float(parts[1])
            except ValueError:
                raise LibsvmFormatError(f"line {lineno}: non-numeric token {tok!r}") from None
            if j < 1:
                raise LibsvmFormatError(f"line {lineno}: index {j} is not 1-based")
            if j <= prev:
                raise LibsvmFormatError(f"line {lineno}: indices not strictly increasing at {j}")
            prev = j
            idx.append(j - 1)
            val.append(v)
        d = max(d, prev)
        labels.append(label)
        rows.append((idx, val))
    if not rows:
        raise LibsvmFormatError("empty input: no samples found")
    labels = np.asarray(labels, dtype=np.float64)
    labels, mapping = _map_binary_labels(labels)
    return LabeledDataset(CsrMatrix.from_rows(rows, d), labels, name, False, mapping)


def _map_binary_labels(labels: np.ndarray):
    uniq = set(np.unique(labels).tolist())
    if uniq <= {-1.0, 1.0}:
        return labels, None
    if uniq <= {0.0, 1.0}:
        return np.where(labels > 0.5, 1.0, -1.0), "0/1 -> -1/+1"
    if uniq <= {1.0, 2.0}:
        return np.where(labels > 1.5, 1.0, -1.0), "1/2 -> -1/+1"
    return labels, None


def load_libsvm(path, name: str | None = None) -> LabeledDataset:
    """Read a LIBSVM file; .gz (by magic bytes) is decompressed on the fly."""
    with open(path, "rb") as fh:
        head = fh.read(2)
        fh.seek(0)
        if head == b"\x1f\x8b":
            stream = io.TextIOWrapper(gzip.GzipFile(fileobj=fh), encoding="utf-8")
        else:
            stream = io.TextIOWrapper(fh, encoding="utf-8")
        return parse_libsvm(stream, name or str(path))


def dump_libsvm(ds: LabeledDataset) -> str:
    """Serialize back to LIBSVM text; floats use shortest round-trip repr."""
    out = []
    off = ds.features.row_offsets
    for i in range(ds.n):
        parts = [repr(float(ds.labels[i]))]
        for k in range(off[i], off[i + 1]):
            parts.append(f"{int(ds.features.cols[k]) + 1}:{float(ds.features.vals[k])!r}")
        out.append(" ".join(parts))
    return "\n".join(out) + "\n"


def _gather_rows(features: CsrMatrix, labels: np.ndarray, order) -> tuple[CsrMatrix, np.ndarray]:
    off = features.row_offsets
    rows = []
    for i in order:
        lo, hi = off[i], off[i + 1]
        rows.append((features.cols[lo:hi], features.vals[lo:hi]))
    return CsrMatrix.from_rows(rows, features.n_cols), labels[list(order)]


def split(ds: LabeledDataset, spec: SplitSpec) -> tuple[LabeledDataset, LabeledDataset]:
    """Seeded uniform shuffle, then prefix split at floor(train_fraction * n)."""
    if not 0.0 < spec.train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    if ds.n < 2:
        raise ValueError("need at least two rows to split")
    n = ds.n
    n_train = int(math.floor(spec.train_fraction * n))
    if n_train < 1 or n_train >= n:
        raise ValueError(f"split of {n} rows at {spec.train_fraction} leaves an empty side")
    perm = list(range(n))
    rng = Rng(spec.seed)
    for i in range(n - 1, 0, -1):  # Fisher-Yates
        j = rng.below(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    tr_f, tr_y = _gather_rows(ds.features, ds.labels, perm[:n_train])
    te_f, te_y = _gather_rows(ds.features, ds.labels, perm[n_train:])
    train = LabeledDataset(tr_f, tr_y, ds.name + "[train]", ds.normalized, ds.label_mapping)
    test = LabeledDataset(te_f, te_y, ds.name + "[test]", ds.normalized, ds.label_mapping)
    return train, test


def normalize_rows(ds: LabeledDataset) -> NormalizeResult:
    """Scale each nonzero row to unit L2 norm; zero rows are left as-is."""
    off = ds.features.row_offsets
    vals = ds.features.vals.copy()
    zero_rows = 0
    for i in range(ds.n):
        lo, hi = off[i], off[i + 1]
        v = vals[lo:hi]
        nsq = seq_sum(v * v)
        if nsq == 0.0:
            zero_rows += 1
            continue
        vals[lo:hi] = v / math.sqrt(nsq)
    feats = CsrMatrix(off, ds.features.cols, vals, ds.n, ds.d)
    return NormalizeResult(
        LabeledDataset(feats, ds.labels, ds.name, True, ds.label_mapping), zero_rows
    )


def synth_logistic(n: int, d: int, seed: int, separability: float = 1.0) -> LabeledDataset:
    """Gaussian features labeled by a planted hyperplane with flip noise.

    ``separability`` in [0, 1]: each label flips with probability
    ``(1 - separability) / 2``, so 1.0 is perfectly separable by the planted
    direction and 0.0 is pure noise.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    if not 0.0 <= separability <= 1.0:
        raise ValueError("separability must lie in [0, 1]")
    rng = Rng(seed)
    plant = np.array(rng.normals(d))
    flip_prob = (1.0 - separability) / 2.0
    all_idx = np.arange(d)
    rows = []
    labels = []
    for _ in range(n):
        x = np.array(rng.normals(d))
        margin = seq_sum(x * plant)
        y = 1.0 if margin >= 0.0 else -1.0
        if rng.uniform() < flip_prob:
            y = -y
        rows.append((all_idx, x))
        labels.append(y)
    feats = CsrMatrix.from_rows(rows, d)
    name = f"synth_logistic(n={n},d={d},seed={seed},sep={separability})"
    return LabeledDataset(feats, np.asarray(labels), name)


def synth_quadratic_2d(n: int, seed: int, spread: float = 1.0):
    """Random 2-D quadratic sum with a known closed-form optimum.

    Each component Hessian is ``M^T M + 0.05 I`` for a random 2x2 Gaussian M
    (the floor keeps every component PSD and the average PD); centers are
    ``spread``-scaled Gaussians.  Returns ``(problem, w_star)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = Rng(seed)
    mats = np.empty((n, 2, 2))
    centers = np.empty((n, 2))
    for i in range(n):
        M = np.array(rng.normals(4)).reshape(2, 2)
        mats[i] = M.T @ M + 0.05 * np.eye(2)
        centers[i] = spread * np.array(rng.normals(2))
    problem = QuadraticSum(mats, centers)
    return problem, problem.minimizer()
