"""Estimators: trimmed inner product, robust matching pursuit, OMP,
lasso, justice pursuit (+ fill/row preprocessing), and the exhaustive
subset-search estimator.

All functions are pure and deterministic; every tie anywhere is broken
toward the smaller index.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Optional

import numpy as np

from . import _kernels
from .model import DegenerateSystemError, SupportSet, least_squares, support_set


class ConvergenceError(RuntimeError):
    """An iterative solver hit its sweep budget; carries the last iterate."""

    def __init__(self, message: str, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class SizeGuardError(ValueError):
    """The exhaustive search was refused because the candidate count is too large."""


@dataclass(frozen=True)
class EstimatorResult:
    beta_hat: np.ndarray
    support_hat: SupportSet
    diagnostics: dict = field(default_factory=dict)


def trimmed_inner_product(a, b, n1: int) -> float:
    """Inner product after discarding the n1 products of largest magnitude.

    Products q_i = a_i b_i are ranked by |q_i| (ties kept toward the
    smaller index) and the signed sum of the N - n1 smallest is returned.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or a.shape != b.shape:
        raise ValueError("inputs must be 1-D vectors of equal length")
    N = a.shape[0]
    if not 0 <= n1 <= N:
        raise ValueError(f"trim budget {n1} outside [0, {N}]")
    q = a * b
    if n1 == 0:
        return float(q.sum())
    keep = np.argsort(np.abs(q), kind="stable")[: N - n1]
    return float(q[keep].sum())


def column_trimmed_products(X, y, n1: int) -> np.ndarray:
    """Vector of trimmed inner products between y and every column of X."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return np.array([trimmed_inner_product(y, X[:, j], n1) for j in range(X.shape[1])])


def top_k_support(v, k: int) -> SupportSet:
    """Indices of the k largest |v_i| (ties toward the smaller index)."""
    v = np.asarray(v, dtype=np.float64)
    if k > v.shape[0]:
        raise ValueError(f"k={k} exceeds vector length {v.shape[0]}")
    order = np.argsort(-np.abs(v), kind="stable")
    return support_set(order[:k])


def romp(X, y, k: int, n1: int) -> EstimatorResult:
    """Robust matching pursuit: one-shot support selection by trimmed products.

    Scores every column by its trimmed inner product with y, keeps the k
    of largest magnitude, and uses the scores themselves as coefficient
    estimates.  There is no iterative refitting.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    p = X.shape[1]
    if k > p:
        raise ValueError(f"k={k} exceeds column count {p}")
    t0 = time.perf_counter()
    h = column_trimmed_products(X, y, n1)
    sup = top_k_support(h, k)
    beta = np.zeros(p)
    idx = sup.as_array()
    beta[idx] = h[idx]
    diag = {
        "iterations": 1,
        "objective": float(np.sum(np.abs(h[idx]))),
        "converged": True,
        "wall_time_s": time.perf_counter() - t0,
    }
    return EstimatorResult(beta, sup, diag)


def matching_pursuit_omp(X, y, k: int) -> EstimatorResult:
    """Classic orthogonal matching pursuit with k greedy steps.

    Each step adds the unselected column with the largest |<r, X_j>|,
    refits by least squares on the selected columns, and updates the
    residual.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    N, p = X.shape
    if k > p:
        raise ValueError(f"k={k} exceeds column count {p}")
    t0 = time.perf_counter()
    selected: list[int] = []
    r = y.copy()
    theta = np.zeros(0)
    for _ in range(k):
        scores = np.abs(X.T @ r)
        if selected:
            scores[selected] = -np.inf
        j = int(np.argmax(scores))  # first occurrence wins ties
        selected.append(j)
        cols = sorted(selected)
        theta = least_squares(X[:, cols], y)
        r = y - X[:, cols] @ theta
    cols = sorted(selected)
    beta = np.zeros(p)
    beta[cols] = theta
    diag = {
        "iterations": k,
        "objective": float(np.linalg.norm(r)),
        "converged": True,
        "wall_time_s": time.perf_counter() - t0,
    }
    return EstimatorResult(beta, support_set(cols), diag)


MAX_SWEEPS = 10_000
CD_TOL = 1e-8
KKT_TOL = 1e-6


def _kkt_violation(X, y, beta, lam, z=None, gam=None) -> float:
    """Max deviation from the subgradient optimality conditions."""
    resid = y - X @ beta if z is None else y + z - X @ beta
    g = X.T @ resid
    active = beta != 0
    worst = 0.0
    if np.any(~active):
        worst = max(worst, float(np.max(np.abs(g[~active])) - lam))
    if np.any(active):
        worst = max(worst, float(np.max(np.abs(np.abs(g[active]) - lam))))
    if z is not None:
        gz = resid  # d/dz of the fit term
        zact = z != 0
        if np.any(~zact):
            worst = max(worst, float(np.max(np.abs(gz[~zact])) - gam))
        if np.any(zact):
            worst = max(worst, float(np.max(np.abs(np.abs(gz[zact]) - gam))))
    return max(worst, 0.0)


def lasso(X, y, lam: float, *, max_sweeps: int = MAX_SWEEPS, tol: float = CD_TOL,
          beta0: Optional[np.ndarray] = None, full_output: bool = False):
    """Cyclic coordinate descent for 0.5||y - X b||^2 + lam ||b||_1.

    ``beta0`` warm-starts the sweep (defaults to zero).  Raises
    ConvergenceError (carrying the last iterate) if the relative
    objective change has not fallen below ``tol`` within ``max_sweeps``.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    X = np.asarray(X, dtype=np.float64)
    XT = np.ascontiguousarray(X.T)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if beta0 is None:
        beta0 = np.zeros(X.shape[1])
    t0 = time.perf_counter()
    beta, trace, converged = _kernels.cd_lasso(
        XT, y, float(lam), max_sweeps, tol, KKT_TOL, np.asarray(beta0, dtype=np.float64)
    )
    if not converged:
        raise ConvergenceError(
            f"lasso did not converge within {max_sweeps} sweeps", last_iterate=beta
        )
    if full_output:
        info = {
            "sweeps": len(trace),
            "objective_trace": trace,
            "objective": float(trace[-1]),
            "converged": True,
            "kkt_violation": _kkt_violation(X, y, beta, lam),
            "wall_time_s": time.perf_counter() - t0,
        }
        return beta, info
    return beta


def justice_pursuit(X, y, lam: float, gam: float, *, max_sweeps: int = MAX_SWEEPS,
                    tol: float = CD_TOL, beta0: Optional[np.ndarray] = None,
                    z0: Optional[np.ndarray] = None, full_output: bool = False):
    """Extended lasso with a response-corruption absorber z.

    Solves 0.5||X b - y - z||^2 + lam||b||_1 + gam||z||_1 by joint
    coordinate descent; the z block update is an exact soft-threshold of
    the fit residual.  (beta0, z0) warm-start the sweeps.  Returns
    (beta, z).
    """
    if lam < 0 or gam < 0:
        raise ValueError("lam and gam must be nonnegative")
    X = np.asarray(X, dtype=np.float64)
    XT = np.ascontiguousarray(X.T)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if beta0 is None:
        beta0 = np.zeros(X.shape[1])
    if z0 is None:
        z0 = np.zeros(X.shape[0])
    t0 = time.perf_counter()
    beta, z, trace, converged = _kernels.cd_justice_pursuit(
        XT, y, float(lam), float(gam), max_sweeps, tol, KKT_TOL,
        np.asarray(beta0, dtype=np.float64), np.asarray(z0, dtype=np.float64),
    )
    if not converged:
        raise ConvergenceError(
            f"justice pursuit did not converge within {max_sweeps} sweeps",
            last_iterate=(beta, z),
        )
    if full_output:
        info = {
            "sweeps": len(trace),
            "objective_trace": trace,
            "objective": float(trace[-1]),
            "converged": True,
            "kkt_violation": _kkt_violation(X, y, beta, lam, z=z, gam=gam),
            "wall_time_s": time.perf_counter() - t0,
        }
        return beta, z, info
    return beta, z


def justice_pursuit_grid(X, y, lams, gams, *, max_sweeps: int = MAX_SWEEPS,
                         tol: float = CD_TOL, skip_nonconverged: bool = False):
    """Solve a (lam, gam) grid pathwise, warm-starting along descending gam.

    Small-(lam, gam) corners sit in a nearly flat valley of the joint
    objective where cold-started sweeps crawl; warm starts track the
    solution path instead.  Yields (lam, gam, beta, z) in grid order
    (lams outer as given, gams visited in descending order).  With
    ``skip_nonconverged`` the path continues through a point that hits
    the sweep budget instead of raising; that point is not yielded.
    """
    gams_desc = sorted((float(g) for g in gams), reverse=True)
    for lam in lams:
        beta = np.zeros(X.shape[1])
        z = np.zeros(X.shape[0])
        for gam in gams_desc:
            try:
                beta, z = justice_pursuit(
                    X, y, float(lam), gam, max_sweeps=max_sweeps, tol=tol,
                    beta0=beta, z0=z,
                )
            except ConvergenceError as exc:
                if not skip_nonconverged:
                    raise
                beta, z = exc.last_iterate
                continue
            yield float(lam), gam, beta, z


def extreme_entry_mask(X, n1: int) -> np.ndarray:
    """Boolean mask of the largest n1/n fraction of |X| entries.

    n = (row count) - n1.  The entry count is round(fraction * X.size);
    magnitude ties resolve toward the smaller flat (row-major) index.
    """
    X = np.asarray(X, dtype=np.float64)
    N = X.shape[0]
    n = N - n1
    if n <= 0:
        raise ValueError("n1 must leave at least one authentic row")
    count = min(X.size, int(round((n1 / n) * X.size)))
    mask = np.zeros(X.size, dtype=bool)
    if count > 0:
        order = np.argsort(-np.abs(X).ravel(), kind="stable")
        mask[order[:count]] = True
    return mask.reshape(X.shape)


def fill_extreme_entries(X, n1: int, fill_scale: float = 1.0) -> np.ndarray:
    """Copy of X with the extreme-entry set rescaled to ``fill_scale`` magnitude."""
    X = np.asarray(X, dtype=np.float64)
    mask = extreme_entry_mask(X, n1)
    Xf = X.copy()
    Xf[mask] = np.sign(Xf[mask]) * fill_scale
    return Xf


def extreme_row_filter(X, n1: int) -> np.ndarray:
    """Indices of the rows kept after dropping the n1 richest in extreme entries.

    Ties in the extreme-entry count resolve toward the smaller row index
    (dropped first).
    """
    X = np.asarray(X, dtype=np.float64)
    N = X.shape[0]
    if n1 >= N:
        raise ValueError("n1 must leave at least one row")
    counts = extreme_entry_mask(X, n1).sum(axis=1)
    drop = np.argsort(-counts, kind="stable")[:n1]
    return np.setdiff1d(np.arange(N), drop)


def jp_fill(X, y, n1: int, lam: float, gam: float, *, fill_scale: float = 1.0,
            full_output: bool = False):
    """Justice pursuit after clipping extreme covariate entries.

    The largest n1/n fraction of |X| entries are rescaled to magnitude
    ``fill_scale`` (sign preserved) before solving.
    """
    return justice_pursuit(
        fill_extreme_entries(X, n1, fill_scale), y, lam, gam, full_output=full_output
    )


def jp_row(X, y, n1: int, lam: float, gam: float, *, full_output: bool = False):
    """Justice pursuit after discarding the n1 rows richest in extreme entries.

    The returned z covers only the kept rows (in ascending index order).
    """
    y = np.asarray(y, dtype=np.float64)
    keep = extreme_row_filter(X, n1)
    X = np.asarray(X, dtype=np.float64)
    out = justice_pursuit(X[keep], y[keep], lam, gam, full_output=full_output)
    if full_output:
        beta, z, info = out
        info["kept_rows"] = keep
        return beta, z, info
    return out


def _minnorm_batch(A, b):
    """Minimum-norm least squares over a stack of systems.

    A: (B, m, k), b: (m,).  Returns (theta (B, k), objective (B,)) where
    the objective is the residual 2-norm.  Rank-deficient members get the
    pseudoinverse solution rather than an error, since the subset-search
    objective is well defined there.
    """
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    cutoff = s[:, :1] * max(A.shape[1], A.shape[2]) * np.finfo(np.float64).eps
    s_inv = np.where(s > cutoff, 1.0 / np.where(s > 0, s, 1.0), 0.0)
    coef = np.einsum("bik,i->bk", U, b) * s_inv
    theta = np.einsum("bkj,bk->bj", Vt, coef)
    resid = A @ theta[:, :, None]
    resid = b[None, :] - resid[:, :, 0]
    return theta, np.linalg.norm(resid, axis=1)


def brute_force(X, y, n: int, k: int, size_guard: int = 10_000_000) -> EstimatorResult:
    """Exhaustive search over row subsets of size n and column subsets of size k.

    For each pair the inner problem is solved by least squares and the
    global minimizer of the residual norm is returned (ties resolve to
    the lexicographically smallest (rows, columns) pair).  Refuses to run
    when C(N, n) * C(p, k) exceeds ``size_guard``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    N, p = X.shape
    if not 1 <= n <= N:
        raise ValueError(f"row subset size {n} outside [1, {N}]")
    if not 1 <= k <= p:
        raise ValueError(f"column subset size {k} outside [1, {p}]")
    total = comb(N, n) * comb(p, k)
    if total > size_guard:
        raise SizeGuardError(
            f"{total} (row, column) subset pairs exceed the size guard {size_guard}"
        )
    t0 = time.perf_counter()
    col_combos = np.asarray(list(combinations(range(p), k)), dtype=np.intp)
    chunk = max(1, 2_000_000 // (n * k))
    best_obj = np.inf
    best_theta = None
    best_cols = None
    for rows in combinations(range(N), n):
        ridx = np.asarray(rows, dtype=np.intp)
        Xs = X[ridx]
        ys = y[ridx]
        for lo in range(0, len(col_combos), chunk):
            batch = col_combos[lo : lo + chunk]
            A = np.swapaxes(Xs[:, batch], 0, 1)  # (B, n, k)
            theta, obj = _minnorm_batch(A, ys)
            i = int(np.argmin(obj))  # first minimum: lexicographically smallest columns
            if obj[i] < best_obj:
                best_obj = float(obj[i])
                best_theta = theta[i]
                best_cols = batch[i]
    beta = np.zeros(p)
    beta[best_cols] = best_theta
    diag = {
        "iterations": total,
        "objective": best_obj,
        "converged": True,
        "wall_time_s": time.perf_counter() - t0,
    }
    return EstimatorResult(beta, support_set(best_cols), diag)
