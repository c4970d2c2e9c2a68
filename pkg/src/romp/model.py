"""Core numeric data model shared by every other module.

Vectors and matrices are plain float64 numpy arrays (dense, row-major).
Structured objects (sparse signals, regression instances, corruption
ledgers) are frozen dataclasses whose array fields are marked read-only,
so instances can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np


class DegenerateSystemError(ValueError):
    """Raised when a linear system is numerically rank-deficient."""


def _frozen(a: np.ndarray) -> np.ndarray:
    """Return a C-contiguous float64 copy with the writeable flag cleared."""
    out = np.array(a, dtype=np.float64, order="C", copy=True)
    out.flags.writeable = False
    return out


def as_vector(v, *, allow_nonfinite: bool = False) -> np.ndarray:
    """Coerce input to a read-only 1-D float64 array, rejecting NaN/Inf."""
    out = _frozen(v)
    if out.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {out.shape}")
    if not allow_nonfinite and not np.all(np.isfinite(out)):
        raise ValueError("vector contains non-finite entries")
    return out


def as_matrix(m, *, allow_nonfinite: bool = False) -> np.ndarray:
    """Coerce input to a read-only 2-D float64 array, rejecting NaN/Inf."""
    out = _frozen(m)
    if out.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {out.shape}")
    if not allow_nonfinite and not np.all(np.isfinite(out)):
        raise ValueError("matrix contains non-finite entries")
    return out


@dataclass(frozen=True)
class SupportSet:
    """A sorted set of distinct column indices in [0, p).

    ``indices`` is strictly increasing.  The ambient dimension is not
    stored; use :func:`support_set` to validate against a known ``p``.
    """

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("support indices must be strictly increasing")
        if idx and idx[0] < 0:
            raise ValueError("support indices must be nonnegative")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, j) -> bool:
        return int(j) in set(self.indices)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp)

    def intersection(self, other: "SupportSet") -> "SupportSet":
        return SupportSet(tuple(sorted(set(self.indices) & set(other.indices))))


def support_set(indices: Iterable[int], p: Optional[int] = None) -> SupportSet:
    """Build a SupportSet from arbitrary (unsorted) indices, checking range."""
    idx = sorted({int(i) for i in indices})
    s = SupportSet(tuple(idx))
    if p is not None and idx and idx[-1] >= p:
        raise ValueError(f"support index {idx[-1]} out of range for p={p}")
    return s


@dataclass(frozen=True)
class SparseSignal:
    """A k-sparse vector stored as (dimension, support, nonzero values)."""

    p: int
    support: SupportSet
    values: np.ndarray  # length == len(support), all nonzero

    def __post_init__(self):
        object.__setattr__(self, "values", as_vector(self.values))
        if len(self.values) != len(self.support):
            raise ValueError("support size and value count differ")
        if len(self.support) and max(self.support.indices) >= self.p:
            raise ValueError("support index out of range")
        if np.any(self.values == 0.0):
            raise ValueError("sparse signal values must be nonzero")

    @property
    def k(self) -> int:
        return len(self.support)

    @staticmethod
    def from_dense(v, *, tol: float = 0.0) -> "SparseSignal":
        v = np.asarray(v, dtype=np.float64)
        idx = np.flatnonzero(np.abs(v) > tol)
        return SparseSignal(len(v), support_set(idx), v[idx])


def dense_expand(s: SparseSignal) -> np.ndarray:
    """Expand a sparse signal to a dense length-p vector."""
    out = np.zeros(s.p)
    out[s.support.as_array()] = s.values
    return out


@dataclass(frozen=True)
class CorruptionLedger:
    """Record of which cells an adversary touched, and under which model.

    ``x_mask`` is an (N, p) boolean mask over covariate cells, ``y_mask``
    a length-N mask over response entries.  Row model: touched cells span
    at most ``budget`` distinct rows.  Distributed model: each column of
    X, and y, holds at most ``budget`` touched cells.
    """

    model: str  # "row" | "distributed" | "none"
    budget: int
    x_mask: np.ndarray
    y_mask: np.ndarray
    attack_name: Optional[str] = None

    def __post_init__(self):
        if self.model not in ("row", "distributed", "none"):
            raise ValueError(f"unknown corruption model {self.model!r}")
        xm = np.array(self.x_mask, dtype=bool, copy=True)
        ym = np.array(self.y_mask, dtype=bool, copy=True)
        xm.flags.writeable = False
        ym.flags.writeable = False
        object.__setattr__(self, "x_mask", xm)
        object.__setattr__(self, "y_mask", ym)
        if xm.ndim != 2 or ym.ndim != 1 or xm.shape[0] != ym.shape[0]:
            raise ValueError("mask shapes inconsistent")
        if self.model == "none":
            if xm.any() or ym.any():
                raise ValueError("model 'none' must have empty masks")
        elif self.model == "row":
            rows = xm.any(axis=1) | ym
            if int(rows.sum()) > self.budget:
                raise ValueError("row model: touched cells span more rows than the budget")
        else:  # distributed
            if xm.any() and int(xm.sum(axis=0).max()) > self.budget:
                raise ValueError("distributed model: a column exceeds the cell budget")
            if int(ym.sum()) > self.budget:
                raise ValueError("distributed model: response exceeds the cell budget")

    @property
    def touched_rows(self) -> np.ndarray:
        return np.flatnonzero(self.x_mask.any(axis=1) | self.y_mask)

    @staticmethod
    def empty(n_rows: int, p: int) -> "CorruptionLedger":
        return CorruptionLedger(
            "none", 0, np.zeros((n_rows, p), dtype=bool), np.zeros(n_rows, dtype=bool)
        )


@dataclass(frozen=True)
class RegressionInstance:
    """Observed (X, y) with ground-truth bookkeeping.

    ``X`` is (n + n1) x p, ``y`` has length n + n1.  ``authentic_rows``
    lists the n rows generated by the linear model; the complement is the
    adversary's row set.  Before any attack is applied (ledger model
    "none"), every row satisfies y_i = <x_i, truth> + e_i by construction.
    """

    X: np.ndarray
    y: np.ndarray
    truth: SparseSignal
    noise_sigma: float
    authentic_rows: tuple[int, ...]
    ledger: CorruptionLedger

    def __post_init__(self):
        object.__setattr__(self, "X", as_matrix(self.X))
        object.__setattr__(self, "y", as_vector(self.y))
        rows = tuple(sorted(int(i) for i in self.authentic_rows))
        object.__setattr__(self, "authentic_rows", rows)
        N, p = self.X.shape
        if len(self.y) != N:
            raise ValueError("X and y row counts differ")
        if self.truth.p != p:
            raise ValueError("signal dimension does not match X")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")
        if rows and (rows[0] < 0 or rows[-1] >= N):
            raise ValueError("authentic row index out of range")
        if self.ledger.x_mask.shape != (N, p):
            raise ValueError("ledger mask shape does not match X")

    @property
    def n_total(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def n_authentic(self) -> int:
        return len(self.authentic_rows)

    @property
    def n_outliers(self) -> int:
        return self.n_total - self.n_authentic

    @property
    def outlier_rows(self) -> tuple[int, ...]:
        auth = set(self.authentic_rows)
        return tuple(i for i in range(self.n_total) if i not in auth)


def submatrix(X: np.ndarray, rows, cols: SupportSet) -> np.ndarray:
    """Extract the submatrix with the given rows (ascending) and support columns.

    Raises IndexError for out-of-range indices.  An empty row set yields a
    0 x len(cols) matrix.
    """
    X = np.asarray(X, dtype=np.float64)
    r = np.asarray(sorted(int(i) for i in rows), dtype=np.intp)
    c = cols.as_array()
    N, p = X.shape
    if r.size and (r[0] < 0 or r[-1] >= N):
        raise IndexError("row index out of range")
    if c.size and (c[0] < 0 or c[-1] >= p):
        raise IndexError("column index out of range")
    return X[np.ix_(r, c)]


def least_squares(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve min_theta ||b - A theta||_2 for a full-column-rank tall system.

    Uses an SVD-based solver (orthogonal factorization; never forms the
    normal equations).  Raises DegenerateSystemError when the smallest
    singular value falls below 1e-10 times the largest.
    """
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError("A must be 2-D")
    m, q = A.shape
    if m < q:
        raise ValueError(f"system must have at least as many rows as columns ({m} < {q})")
    theta, _, _, sv = np.linalg.lstsq(A, b, rcond=None)
    if q > 0 and (sv[0] == 0.0 or sv[-1] < 1e-10 * sv[0]):
        raise DegenerateSystemError(
            f"rank-deficient system: singular values span [{sv[-1]:.3e}, {sv[0]:.3e}]"
        )
    return theta
