"""Synthetic data generation for the sub-Gaussian design model.

Design entries are i.i.d. zero mean with variance exactly 1/n (n = the
authentic sample count), either Gaussian or scaled Rademacher.  Additive
noise is always Gaussian with standard deviation sigma_e / sqrt(n).
Instances are generated with every row authentic; corruption transforms
overwrite rows/cells afterwards and mark the ledger.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import (
    CorruptionLedger,
    RegressionInstance,
    SparseSignal,
    support_set,
)
from .rng import substream

DESIGN_KINDS = ("gaussian", "rademacher")
SIGNAL_KINDS = ("pm_one", "ones", "fixed_values")


@dataclass(frozen=True)
class DesignDistribution:
    """Entry distribution for the covariate matrix; per-entry variance 1/n."""

    kind: str = "gaussian"

    def __post_init__(self):
        if self.kind not in DESIGN_KINDS:
            raise ValueError(f"unknown design kind {self.kind!r}")


@dataclass(frozen=True)
class SignalScheme:
    """How the k-sparse ground truth is drawn.

    ``pm_one``: each nonzero independently +-1.  ``ones``: all nonzeros 1.
    ``fixed_values``: the given values on the given support.  Support is
    uniform among size-k subsets unless ``support`` is prescribed.
    """

    kind: str = "pm_one"
    k: int = 1
    support: Optional[Sequence[int]] = None
    values: Optional[Sequence[float]] = None

    def __post_init__(self):
        if self.kind not in SIGNAL_KINDS:
            raise ValueError(f"unknown signal kind {self.kind!r}")
        if self.kind == "fixed_values":
            if self.values is None or self.support is None:
                raise ValueError("fixed_values scheme needs explicit support and values")
            if len(self.values) != len(self.support):
                raise ValueError("support and values length mismatch")
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.support is not None:
            sup = tuple(int(i) for i in self.support)
            if len(sup) != self.k:
                raise ValueError("prescribed support size differs from k")
            object.__setattr__(self, "support", sup)


def sample_design(n: int, p: int, dist: DesignDistribution, seed: int) -> np.ndarray:
    """Draw an n x p matrix of i.i.d. entries with variance 1/n.

    ``n`` here is the row count of the matrix being drawn; the variance
    normalisation constant may be supplied separately via
    :func:`sample_design_rows` when drawing extra rows for a larger
    instance.
    """
    return sample_design_rows(n, p, dist, n_norm=n, seed=seed)


def sample_design_rows(
    rows: int, p: int, dist: DesignDistribution, n_norm: int, seed: int
) -> np.ndarray:
    """Draw ``rows`` x p i.i.d. entries with variance 1/n_norm."""
    if rows < 0 or p < 1 or n_norm < 1:
        raise ValueError("rows, p and n_norm must be positive")
    rng = substream(seed, "design")
    scale = 1.0 / np.sqrt(n_norm)
    if dist.kind == "gaussian":
        return rng.standard_normal((rows, p)) * scale
    # rademacher: +-1/sqrt(n) equiprobable
    return (2.0 * rng.integers(0, 2, size=(rows, p)) - 1.0) * scale


def sample_signal(p: int, scheme: SignalScheme, seed: int) -> SparseSignal:
    """Draw a k-sparse signal according to the scheme."""
    k = scheme.k
    if k > p:
        raise ValueError(f"sparsity k={k} exceeds dimension p={p}")
    rng = substream(seed, "signal")
    if scheme.support is not None:
        raw = np.asarray(scheme.support, dtype=np.intp)
    else:
        raw = rng.choice(p, size=k, replace=False)
    sup = support_set(raw, p)
    if scheme.kind == "ones":
        vals = np.ones(k)
    elif scheme.kind == "pm_one":
        vals = 2.0 * rng.integers(0, 2, size=k) - 1.0
    else:
        # keep prescribed (index, value) pairs together under support sorting
        vals = np.asarray(scheme.values, dtype=np.float64)[np.argsort(raw, kind="stable")]
    return SparseSignal(p, sup, vals)


def assemble_instance(
    n: int,
    n1: int,
    p: int,
    dist: DesignDistribution,
    scheme: SignalScheme,
    sigma_e: float,
    seed: int,
) -> RegressionInstance:
    """Generate a clean instance with n + n1 rows, all initially authentic.

    Noise is i.i.d. Gaussian with standard deviation sigma_e / sqrt(n).
    ``authentic_rows`` is a uniformly random size-n subset; the complement
    is reserved for the adversary.  The ledger starts out empty.
    """
    if n < 1 or p < 1 or n1 < 0 or sigma_e < 0:
        raise ValueError("invalid generation parameters")
    total = n + n1
    X = sample_design_rows(total, p, dist, n_norm=n, seed=seed)
    signal = sample_signal(p, scheme, seed)
    beta = np.zeros(p)
    beta[signal.support.as_array()] = signal.values
    noise_rng = substream(seed, "noise")
    e = noise_rng.standard_normal(total) * (sigma_e / np.sqrt(n))
    y = X @ beta + e
    if n1 == 0:
        authentic = tuple(range(total))
    else:
        pick_rng = substream(seed, "authentic_rows")
        authentic = tuple(sorted(pick_rng.choice(total, size=n, replace=False).tolist()))
    return RegressionInstance(
        X=X,
        y=y,
        truth=signal,
        noise_sigma=float(sigma_e),
        authentic_rows=authentic,
        ledger=CorruptionLedger.empty(total, p),
    )
