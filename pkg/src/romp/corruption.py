"""Adversarial corruption transforms.

Each attack takes a clean instance, overwrites rows (row model) or
individual cells (distributed model), and returns a new instance whose
ledger records exactly what was touched.  Untouched cells are
bit-identical to the input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .estimators import ConvergenceError
from .model import CorruptionLedger, RegressionInstance
from .rng import substream

ATTACK_NAMES = ("sco", "bruteforce", "feasibility", "random_rows", "distributed_mass")


class AttackDegenerateError(ValueError):
    """The attack construction is degenerate for this instance."""


@dataclass(frozen=True)
class AttackSpec:
    """Which adversary to run, with its (attack-specific) parameters.

    ``magnitude`` is meaningful only for the sco attack and ``scale``
    only for random_rows; setting either elsewhere is an error.
    """

    name: str
    magnitude: Optional[float] = None
    scale: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.name not in ATTACK_NAMES:
            raise ValueError(f"unknown attack {self.name!r}")
        if self.name == "sco":
            if self.magnitude is None or self.magnitude <= 0:
                raise ValueError("sco attack requires a positive magnitude")
        elif self.magnitude is not None:
            raise ValueError(f"magnitude is meaningless for attack {self.name!r}")
        if self.name == "random_rows":
            if self.scale is None or self.scale < 0:
                raise ValueError("random_rows requires a nonnegative scale")
        elif self.scale is not None:
            raise ValueError(f"scale is meaningless for attack {self.name!r}")


def apply_attack(inst: RegressionInstance, spec: AttackSpec) -> RegressionInstance:
    """Dispatch an AttackSpec.  Row budgets come from the instance itself."""
    if spec.name == "sco":
        return attack_sco(inst, spec.magnitude, spec.seed)
    if spec.name == "bruteforce":
        return attack_bruteforce(inst)
    if spec.name == "feasibility":
        return attack_feasibility(inst, spec.seed)
    if spec.name == "random_rows":
        return random_row_corruption(inst, inst.n_outliers, spec.scale, spec.seed)
    return corrupt_distributed(inst, inst.n_outliers, spec.seed)


def _row_ledger(inst: RegressionInstance, rows: np.ndarray, attack: str) -> CorruptionLedger:
    x_mask = np.zeros(inst.X.shape, dtype=bool)
    y_mask = np.zeros(inst.n_total, dtype=bool)
    x_mask[rows, :] = True
    y_mask[rows] = True
    return CorruptionLedger("row", len(rows), x_mask, y_mask, attack)


def _replace(inst: RegressionInstance, X, y, ledger: CorruptionLedger) -> RegressionInstance:
    return RegressionInstance(
        X=X,
        y=y,
        truth=inst.truth,
        noise_sigma=inst.noise_sigma,
        authentic_rows=inst.authentic_rows,
        ledger=ledger,
    )


def attack_sco(inst: RegressionInstance, magnitude: float, seed: int) -> RegressionInstance:
    """Plant a decoy support explained exactly by huge off-support columns.

    A decoy column set disjoint from the true support receives entries of
    magnitude ``magnitude``/sqrt(n) with random signs on the outlier
    rows; the true-support entries of those rows are zeroed, and the
    outlier responses are set so the decoy coefficients fit them exactly.
    Any solution carried by the true support then pays an arbitrarily
    large loss on the outlier block.
    """
    k = inst.truth.k
    p = inst.p
    if inst.n_outliers < 1:
        raise ValueError("attack requires at least one outlier row")
    if p < 2 * k:
        raise ValueError(f"need p >= 2k for a disjoint decoy set (p={p}, k={k})")
    rng = substream(seed, "attack_sco")
    complement = np.setdiff1d(np.arange(p), inst.truth.support.as_array())
    decoy = np.sort(rng.choice(complement, size=k, replace=False))
    rows = np.asarray(inst.outlier_rows, dtype=np.intp)
    n = inst.n_authentic

    X = inst.X.copy()
    y = inst.y.copy()
    X[rows, :] = 0.0
    signs = 2.0 * rng.integers(0, 2, size=(len(rows), k)) - 1.0
    X[np.ix_(rows, decoy)] = magnitude * signs / np.sqrt(n)
    y[rows] = X[np.ix_(rows, decoy)] @ inst.truth.values
    return _replace(inst, X, y, _row_ledger(inst, rows, "sco"))


def attack_bruteforce(inst: RegressionInstance) -> RegressionInstance:
    """Corrupt rows so a shifted support strictly beats the true one.

    Requires the all-ones signal: every outlier response is set to
    sqrt(k), the true-support entries of outlier rows are zeroed, and one
    designated off-support column copies the outlier responses, so the
    support (all of the true support except its first element, plus the
    designated column) with all-ones coefficients fits the outlier block
    exactly.
    """
    if not np.all(inst.truth.values == 1.0):
        raise ValueError("construction requires the all-ones signal")
    k = inst.truth.k
    p = inst.p
    sup = inst.truth.support.as_array()
    off_support = np.setdiff1d(np.arange(p), sup)
    if off_support.size == 0:
        raise ValueError("need a column outside the true support")
    designated = int(off_support[0])
    rows = np.asarray(inst.outlier_rows, dtype=np.intp)
    if rows.size == 0:
        raise ValueError("attack requires at least one outlier row")

    X = inst.X.copy()
    y = inst.y.copy()
    X[rows, :] = 0.0
    y[rows] = np.sqrt(k)
    X[rows, designated] = y[rows]
    return _replace(inst, X, y, _row_ledger(inst, rows, "bruteforce"))


def project_l1_ball(v: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection onto the l1 ball via the sorting construction."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    v = np.asarray(v, dtype=np.float64)
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, len(u) + 1)
    rho = np.max(np.nonzero(u - (css - radius) / j > 0)[0]) + 1
    tau = (css[rho - 1] - radius) / rho
    return np.sign(v) * np.maximum(a - tau, 0.0)


def solve_theta_star(
    inst: RegressionInstance,
    *,
    max_iters: int = 10_000,
    tol: float = 1e-8,
) -> np.ndarray:
    """Best l1-bounded explanation of the authentic data by off-support columns.

    Minimizes ||y_auth - A theta||_2 over ||theta||_1 <= ||truth||_1,
    where A is the authentic block restricted to the complement of the
    true support.  Projected gradient descent with backtracking; stops
    when the relative objective change drops below ``tol``.
    """
    sup = inst.truth.support.as_array()
    comp = np.setdiff1d(np.arange(inst.p), sup)
    auth = np.asarray(inst.authentic_rows, dtype=np.intp)
    A = inst.X[np.ix_(auth, comp)]
    b = inst.y[auth]
    radius = float(np.abs(inst.truth.values).sum())

    theta = np.zeros(comp.size)
    resid = b - A @ theta
    obj = 0.5 * float(resid @ resid)
    step = 1.0
    for _ in range(max_iters):
        grad = -(A.T @ resid)
        # backtracking on the projected step
        while True:
            cand = project_l1_ball(theta - step * grad, radius)
            d = cand - theta
            resid_c = b - A @ cand
            obj_c = 0.5 * float(resid_c @ resid_c)
            if obj_c <= obj + float(grad @ d) + float(d @ d) / (2.0 * step) + 1e-15:
                break
            step *= 0.5
            if step < 1e-18:
                raise ConvergenceError(
                    "backtracking step collapsed", last_iterate=theta
                )
        theta, resid = cand, resid_c
        if abs(obj - obj_c) < tol * max(obj, 1e-300):
            return theta
        obj = obj_c
        step *= 1.25
    raise ConvergenceError(
        f"projected gradient did not converge within {max_iters} iterations",
        last_iterate=theta,
    )


def attack_feasibility(
    inst: RegressionInstance,
    seed: int,
    *,
    theta_star: Optional[np.ndarray] = None,
) -> RegressionInstance:
    """Bounded-magnitude corruption whose rows are exactly explained by a decoy.

    True-support entries of the outlier rows become random +-3/sqrt(n);
    each outlier response is the negated-signal fit of its own row; the
    off-support entries are a random Gaussian direction rescaled so the
    row is consistent with the decoy coefficient vector theta_star.  No
    entry is large, so magnitude-based clipping cannot isolate these rows.
    """
    rows = np.asarray(inst.outlier_rows, dtype=np.intp)
    if rows.size == 0:
        return inst
    if theta_star is None:
        theta_star = solve_theta_star(inst)
    theta_star = np.asarray(theta_star, dtype=np.float64)
    if float(np.linalg.norm(theta_star)) < 1e-10:
        raise AttackDegenerateError("theta_star is numerically zero")

    rng = substream(seed, "attack_feasibility")
    sup = inst.truth.support.as_array()
    comp = np.setdiff1d(np.arange(inst.p), sup)
    if comp.size != theta_star.size:
        raise ValueError("theta_star length does not match the off-support width")
    n = inst.n_authentic
    k = inst.truth.k

    X = inst.X.copy()
    y = inst.y.copy()
    signs = 2.0 * rng.integers(0, 2, size=(rows.size, k)) - 1.0
    X[np.ix_(rows, sup)] = (3.0 / np.sqrt(n)) * signs
    y[rows] = X[np.ix_(rows, sup)] @ (-inst.truth.values)
    for local, i in enumerate(rows):
        while True:
            direction = rng.standard_normal(comp.size)
            pivot = float(direction @ theta_star)
            if abs(pivot) > 1e-8:
                break
        X[i, comp] = (y[i] / pivot) * direction
    return _replace(inst, X, y, _row_ledger(inst, rows, "feasibility"))


def corrupt_distributed(inst: RegressionInstance, n1: int, seed: int) -> RegressionInstance:
    """Cell-level corruption: n1 cells per decoy column and n1 response cells.

    Response cells are inflated to twice the typical clean-response
    ceiling (sign preserved).  Each of k decoy columns (disjoint from the
    true support) gets n1 cells, at rows drawn independently per column,
    whose products with the current response are all positive with
    magnitude 2 log(p)/n -- just under the largest clean products, the
    regime magnitude-based trimming handles worst.
    """
    N = inst.n_total
    p = inst.p
    if not 0 <= n1 <= N:
        raise ValueError(f"cell budget {n1} outside [0, {N}]")
    k = inst.truth.k
    if p < 2 * k:
        raise ValueError(f"need p >= 2k for a disjoint decoy set (p={p}, k={k})")
    rng = substream(seed, "corrupt_distributed")
    x_mask = np.zeros((N, p), dtype=bool)
    y_mask = np.zeros(N, dtype=bool)
    X = inst.X.copy()
    y = inst.y.copy()
    if n1 > 0:
        n = inst.n_authentic
        beta_sq = float(inst.truth.values @ inst.truth.values)
        log_p = np.log(p)
        # response cells first: the column pattern is signed against the final y
        y_rows = np.sort(rng.choice(N, size=n1, replace=False))
        y_ceiling = 2.0 * np.sqrt((log_p / n) * (beta_sq + inst.noise_sigma**2))
        y[y_rows] = np.where(y[y_rows] >= 0, y_ceiling, -y_ceiling)
        y_mask[y_rows] = True

        complement = np.setdiff1d(np.arange(p), inst.truth.support.as_array())
        decoy = np.sort(rng.choice(complement, size=k, replace=False))
        target = 2.0 * log_p / n
        for j in decoy:
            cell_rows = rng.choice(N, size=n1, replace=False)
            ys = y[cell_rows]
            vals = np.zeros(n1)
            nz = ys != 0.0
            vals[nz] = target / ys[nz]  # product X_ij * y_i == target > 0
            X[cell_rows, j] = vals
            x_mask[cell_rows, j] = True
    ledger = CorruptionLedger("distributed", n1, x_mask, y_mask, "distributed_mass")
    return _replace(inst, X, y, ledger)


def random_row_corruption(
    inst: RegressionInstance, n1: int, scale: float, seed: int
) -> RegressionInstance:
    """Naive baseline adversary: overwrite outlier rows with i.i.d. Gaussians."""
    if n1 > inst.n_outliers:
        raise ValueError(f"n1={n1} exceeds the instance's outlier budget {inst.n_outliers}")
    if n1 == 0:
        return inst
    rows = np.asarray(inst.outlier_rows[:n1], dtype=np.intp)
    rng = substream(seed, "random_row_corruption")
    X = inst.X.copy()
    y = inst.y.copy()
    X[rows, :] = scale * rng.standard_normal((n1, inst.p))
    y[rows] = scale * rng.standard_normal(n1)
    return _replace(inst, X, y, _row_ledger(inst, rows, "random_rows"))
