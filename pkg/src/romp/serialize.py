"""Lossless JSON round-tripping for instances, ledgers and results.

Schema (version 1):

    {
      "format": "robust-regression-instance", "version": 1,
      "n": int, "n1": int, "p": int, "noise_sigma": float,
      "X": [[float, ...], ...],          # row-major nested arrays
      "y": [float, ...],
      "signal": {"p": int, "support": [int, ...], "values": [float, ...]},
      "authentic_rows": [int, ...],
      "ledger": {"model": "none"|"row"|"distributed", "budget": int,
                 "attack": str|null,
                 "touched_x": [[row, col], ...], "touched_y": [row, ...]}
    }

Floats are emitted as plain JSON numbers via Python's shortest
round-trip repr, which reparses to the identical binary64 value, so
dump -> load is bit-exact.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .model import (
    CorruptionLedger,
    RegressionInstance,
    SparseSignal,
    support_set,
)

FORMAT_NAME = "robust-regression-instance"


def canonical_json(obj: Any) -> str:
    """Serialize with a fixed key order and separators (byte-stable)."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def ledger_to_dict(ledger: CorruptionLedger) -> dict:
    rows, cols = np.nonzero(ledger.x_mask)
    return {
        "model": ledger.model,
        "budget": int(ledger.budget),
        "attack": ledger.attack_name,
        "touched_x": [[int(r), int(c)] for r, c in zip(rows, cols)],
        "touched_y": [int(r) for r in np.flatnonzero(ledger.y_mask)],
    }


def ledger_from_dict(d: dict, n_rows: int, p: int) -> CorruptionLedger:
    x_mask = np.zeros((n_rows, p), dtype=bool)
    y_mask = np.zeros(n_rows, dtype=bool)
    for r, c in d["touched_x"]:
        x_mask[r, c] = True
    for r in d["touched_y"]:
        y_mask[r] = True
    return CorruptionLedger(d["model"], d["budget"], x_mask, y_mask, d.get("attack"))


def instance_to_dict(inst: RegressionInstance) -> dict:
    return {
        "format": FORMAT_NAME,
        "version": 1,
        "n": inst.n_authentic,
        "n1": inst.n_outliers,
        "p": inst.p,
        "noise_sigma": inst.noise_sigma,
        "X": inst.X.tolist(),
        "y": inst.y.tolist(),
        "signal": {
            "p": inst.truth.p,
            "support": list(inst.truth.support.indices),
            "values": inst.truth.values.tolist(),
        },
        "authentic_rows": list(inst.authentic_rows),
        "ledger": ledger_to_dict(inst.ledger),
    }


def instance_from_dict(d: dict) -> RegressionInstance:
    if d.get("format") != FORMAT_NAME:
        raise ValueError(f"not a {FORMAT_NAME} document")
    X = np.asarray(d["X"], dtype=np.float64)
    if X.ndim == 1:  # 0-row edge case serialises as []
        X = X.reshape(0, d["p"])
    sig = d["signal"]
    truth = SparseSignal(sig["p"], support_set(sig["support"]), np.asarray(sig["values"]))
    return RegressionInstance(
        X=X,
        y=np.asarray(d["y"], dtype=np.float64),
        truth=truth,
        noise_sigma=float(d["noise_sigma"]),
        authentic_rows=tuple(d["authentic_rows"]),
        ledger=ledger_from_dict(d["ledger"], X.shape[0], X.shape[1]),
    )


def dump_instance(inst: RegressionInstance) -> str:
    return canonical_json(instance_to_dict(inst))


def load_instance(text: str) -> RegressionInstance:
    return instance_from_dict(json.loads(text))
