"""Experiment orchestration: seeded trials, metrics, sweeps and reports.

A sweep point is (estimator, outlier budget); every estimator at a given
(budget, trial) sees the same attacked instance.  Lasso and the justice
pursuit variants are tuned on a log grid against the true coefficients
(an oracle-tuned baseline, deliberately favorable to them); the robust
matching pursuit estimator is handed the true (k, n1).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import estimators as est
from .corruption import AttackSpec, apply_attack
from .datagen import DesignDistribution, SignalScheme, assemble_instance
from .model import RegressionInstance, SupportSet, dense_expand
from .rng import substream
from .serialize import canonical_json
from .svg import line_chart

ESTIMATOR_IDS = ("romp", "omp", "lasso", "jp", "jp_fill", "jp_row")


def support_recovery(support_hat: SupportSet, support_true: SupportSet) -> float:
    """Fraction of true nonzero locations that were identified."""
    if len(support_true) == 0:
        raise ValueError("true support is empty")
    return len(support_hat.intersection(support_true)) / len(support_true)


def relative_l2_error(beta_hat: np.ndarray, beta_true: np.ndarray) -> float:
    """||beta_hat - beta_true||_2 / ||beta_true||_2."""
    beta_hat = np.asarray(beta_hat, dtype=np.float64)
    beta_true = np.asarray(beta_true, dtype=np.float64)
    denom = float(np.linalg.norm(beta_true))
    if denom == 0.0:
        raise ValueError("true coefficient vector is zero")
    return float(np.linalg.norm(beta_hat - beta_true) / denom)


@dataclass(frozen=True)
class ExperimentConfig:
    p: int
    n: int
    k: int
    sigma_e: float
    signal: str = "pm_one"
    design: str = "gaussian"
    attack: str = "feasibility"
    attack_magnitude: float = 1000.0
    attack_scale: float = 1.0
    estimators: tuple[str, ...] = ("romp", "lasso", "jp", "jp_fill", "jp_row")
    n1_fractions: tuple[float, ...] = (0.0, 0.02, 0.04, 0.06, 0.08)
    trials: int = 20
    master_seed: int = 0
    lam_grid_size: int = 7
    gamma_grid_size: int = 7

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.n1_fractions or not self.estimators:
            raise ValueError("grids must be nonempty")
        unknown = set(self.estimators) - set(ESTIMATOR_IDS)
        if unknown:
            raise ValueError(f"unknown estimators: {sorted(unknown)}")
        if any(f < 0 for f in self.n1_fractions):
            raise ValueError("outlier fractions must be nonnegative")
        object.__setattr__(self, "estimators", tuple(self.estimators))
        object.__setattr__(self, "n1_fractions", tuple(float(f) for f in self.n1_fractions))

    def n1_values(self) -> tuple[int, ...]:
        return tuple(int(round(f * self.n)) for f in self.n1_fractions)

    @staticmethod
    def desk_scale(**overrides) -> "ExperimentConfig":
        """Default CI-sized sweep: a 10x linear shrink of the full-scale setup."""
        cfg = ExperimentConfig(p=400, n=160, k=10, sigma_e=2.0)
        return replace(cfg, **overrides) if overrides else cfg

    @staticmethod
    def paper_scale(**overrides) -> "ExperimentConfig":
        """Full-scale setup (minutes, not CI-sized): p=4000, n=1600, k=10."""
        cfg = ExperimentConfig(p=4000, n=1600, k=10, sigma_e=2.0)
        return replace(cfg, **overrides) if overrides else cfg


@dataclass(frozen=True)
class TrialRecord:
    estimator: str
    n1: int
    n1_fraction: float
    seed: int  # trial index within the sweep point
    support_recovery: Optional[float]
    relative_l2_error: Optional[float]
    wall_time_s: float = field(default=0.0, compare=False)  # diagnostics only
    error: Optional[str] = None

    def __post_init__(self):
        if self.support_recovery is not None and not 0.0 <= self.support_recovery <= 1.0:
            raise ValueError("support recovery outside [0, 1]")
        if self.relative_l2_error is not None and self.relative_l2_error < 0.0:
            raise ValueError("relative error must be nonnegative")


@dataclass(frozen=True)
class SweepReport:
    config: ExperimentConfig
    records: tuple[TrialRecord, ...]

    def aggregates(self) -> list[dict]:
        return compute_aggregates(self.records)

    @property
    def failed(self) -> tuple[TrialRecord, ...]:
        return tuple(r for r in self.records if r.error is not None)


def compute_aggregates(records: Sequence[TrialRecord]) -> list[dict]:
    """Per (estimator, n1) mean and standard deviation of both metrics.

    Failed trials are excluded from the moments and counted separately.
    Standard deviation is the population form (ddof=0).
    """
    keys = sorted({(r.estimator, r.n1, r.n1_fraction) for r in records})
    out = []
    for estimator, n1, frac in keys:
        ok = [r for r in records if r.estimator == estimator and r.n1 == n1 and r.error is None]
        rec = [r.support_recovery for r in ok]
        err = [r.relative_l2_error for r in ok]
        failed = sum(
            1 for r in records if r.estimator == estimator and r.n1 == n1 and r.error is not None
        )
        out.append(
            {
                "estimator": estimator,
                "n1": n1,
                "n1_fraction": frac,
                "trials": len(ok),
                "failed": failed,
                "recovery_mean": float(np.mean(rec)) if rec else None,
                "recovery_std": float(np.std(rec)) if rec else None,
                "l2_error_mean": float(np.mean(err)) if err else None,
                "l2_error_std": float(np.std(err)) if err else None,
            }
        )
    return out


def _signal_scheme(config: ExperimentConfig) -> SignalScheme:
    return SignalScheme(config.signal, k=config.k)


def make_attacked_instance(config: ExperimentConfig, n1: int, trial: int) -> RegressionInstance:
    """Generate-then-attack for one (budget, trial) cell; pure in its arguments."""
    gen_seed = int(
        substream(config.master_seed, "trial_instance", n1, trial).integers(0, 2**62)
    )
    inst = assemble_instance(
        config.n,
        n1,
        config.p,
        DesignDistribution(config.design),
        _signal_scheme(config),
        config.sigma_e,
        gen_seed,
    )
    if n1 == 0:
        return inst
    attack_seed = int(
        substream(config.master_seed, "trial_attack", n1, trial).integers(0, 2**62)
    )
    if config.attack == "sco":
        spec = AttackSpec("sco", magnitude=config.attack_magnitude, seed=attack_seed)
    elif config.attack == "random_rows":
        spec = AttackSpec("random_rows", scale=config.attack_scale, seed=attack_seed)
    else:
        spec = AttackSpec(config.attack, seed=attack_seed)
    return apply_attack(inst, spec)


def _lam_grid(X, y, size: int) -> np.ndarray:
    lam_max = float(np.max(np.abs(X.T @ y)))
    if lam_max == 0.0:
        lam_max = 1.0
    return lam_max * np.logspace(-1.5, 0, size)


def _gam_grid(y, size: int) -> np.ndarray:
    gam_max = float(np.max(np.abs(y)))
    if gam_max == 0.0:
        gam_max = 1.0
    return gam_max * np.logspace(-1.5, 0, size)


def _tuned_jp(X, y, config: ExperimentConfig, beta_true: np.ndarray):
    """Oracle grid tuning: keep the (lam, gam) pair of smallest l2 error.

    The grid is solved pathwise (warm starts along descending gam).
    """
    best = None
    lams = _lam_grid(X, y, config.lam_grid_size)
    gams = _gam_grid(y, config.gamma_grid_size)
    for _, _, beta, _ in est.justice_pursuit_grid(
        X, y, lams, gams, skip_nonconverged=True
    ):
        err = relative_l2_error(beta, beta_true)
        if best is None or err < best[0]:
            best = (err, beta.copy())
    if best is None:
        raise est.ConvergenceError("no grid point converged")
    return best[1]


def _tuned_lasso(X, y, config: ExperimentConfig, beta_true: np.ndarray):
    best = None
    beta0 = np.zeros(X.shape[1])
    for lam in sorted(_lam_grid(X, y, config.lam_grid_size), reverse=True):
        try:
            beta0 = est.lasso(X, y, lam, beta0=beta0)
        except est.ConvergenceError as exc:
            beta0 = exc.last_iterate  # continue the path, skip the point
            continue
        err = relative_l2_error(beta0, beta_true)
        if best is None or err < best[0]:
            best = (err, beta0.copy())
    if best is None:
        raise est.ConvergenceError("no grid point converged")
    return best[1]


def _trim_budget(config: ExperimentConfig, n1: int) -> int:
    # distributed cell corruption can hit a column and the response in
    # different rows, so the product-level budget is twice the cell budget
    return 2 * n1 if config.attack == "distributed_mass" else n1


def score_estimator(
    config: ExperimentConfig, estimator: str, inst: RegressionInstance, n1: int
) -> tuple[float, float]:
    """Run one estimator on an attacked instance; returns (recovery, l2 error)."""
    beta_true = dense_expand(inst.truth)
    X, y, k = inst.X, inst.y, config.k
    if estimator == "romp":
        res = est.romp(X, y, k, _trim_budget(config, n1))
        beta, sup = res.beta_hat, res.support_hat
    elif estimator == "omp":
        res = est.matching_pursuit_omp(X, y, k)
        beta, sup = res.beta_hat, res.support_hat
    elif estimator == "lasso":
        beta = _tuned_lasso(X, y, config, beta_true)
        sup = est.top_k_support(beta, k)
    elif estimator == "jp":
        beta = _tuned_jp(X, y, config, beta_true)
        sup = est.top_k_support(beta, k)
    elif estimator == "jp_fill":
        beta = _tuned_jp(est.fill_extreme_entries(X, n1), y, config, beta_true)
        sup = est.top_k_support(beta, k)
    elif estimator == "jp_row":
        keep = est.extreme_row_filter(X, n1)
        beta = _tuned_jp(X[keep], y[keep], config, beta_true)
        sup = est.top_k_support(beta, k)
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    return support_recovery(sup, inst.truth.support), relative_l2_error(beta, beta_true)


def run_trial(config: ExperimentConfig, estimator: str, n1: int, trial: int) -> TrialRecord:
    """Generate, attack, solve and score one trial; errors become failed records."""
    import time

    frac = n1 / config.n
    t0 = time.perf_counter()
    try:
        inst = make_attacked_instance(config, n1, trial)
        recovery, l2 = score_estimator(config, estimator, inst, n1)
        return TrialRecord(
            estimator, n1, frac, trial, recovery, l2, time.perf_counter() - t0, None
        )
    except Exception as exc:  # failed trial, not a crash
        return TrialRecord(
            estimator, n1, frac, trial, None, None, time.perf_counter() - t0,
            f"{type(exc).__name__}: {exc}",
        )


def _worker_count() -> int:
    raw = os.environ.get("ROMP_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_sweep(config: ExperimentConfig) -> SweepReport:
    """Execute every (estimator, n1, trial) combination.

    Instances are shared across estimators within a (n1, trial) cell.
    Cells run in a thread pool sized by the ROMP_THREADS env var
    (default 1); records are assembled in deterministic order.
    """
    import time

    cells = [(n1, t) for n1 in config.n1_values() for t in range(config.trials)]

    def run_cell(cell) -> list[TrialRecord]:
        n1, trial = cell
        frac = n1 / config.n
        out = []
        try:
            inst = make_attacked_instance(config, n1, trial)
        except Exception as exc:
            msg = f"{type(exc).__name__}: {exc}"
            return [
                TrialRecord(estimator, n1, frac, trial, None, None, 0.0, msg)
                for estimator in config.estimators
            ]
        for estimator in config.estimators:
            t0 = time.perf_counter()
            try:
                recovery, l2 = score_estimator(config, estimator, inst, n1)
                out.append(
                    TrialRecord(
                        estimator, n1, frac, trial, recovery, l2,
                        time.perf_counter() - t0, None,
                    )
                )
            except Exception as exc:
                out.append(
                    TrialRecord(
                        estimator, n1, frac, trial, None, None,
                        time.perf_counter() - t0, f"{type(exc).__name__}: {exc}",
                    )
                )
        return out

    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_cell = list(pool.map(run_cell, cells))
    else:
        per_cell = [run_cell(c) for c in cells]
    records = [r for chunk in per_cell for r in chunk]
    records.sort(key=lambda r: (r.estimator, r.n1, r.seed))
    return SweepReport(config, tuple(records))


# ---------------------------------------------------------------------------
# report emission

CSV_HEADER = "estimator,n1,n1_fraction,trial,support_recovery,relative_l2_error,error"


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def report_to_csv(report: SweepReport, include_timing: bool = False) -> str:
    """One row per trial record.  Timing is excluded by default so that
    identical (config, seed) runs emit byte-identical artifacts."""
    header = CSV_HEADER + (",wall_time_s" if include_timing else "")
    lines = [header]
    for r in report.records:
        cells = [
            r.estimator,
            str(r.n1),
            repr(r.n1_fraction),
            str(r.seed),
            _csv_cell(r.support_recovery),
            _csv_cell(r.relative_l2_error),
            r.error or "",
        ]
        if include_timing:
            cells.append(repr(r.wall_time_s))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def report_to_json(report: SweepReport, include_timing: bool = False) -> str:
    recs = []
    for r in report.records:
        d = asdict(r)
        if not include_timing:
            d.pop("wall_time_s")
        recs.append(d)
    doc = {
        "format": "sweep-report",
        "version": 1,
        "config": asdict(report.config),
        "records": recs,
        "aggregates": report.aggregates(),
    }
    return canonical_json(doc)


def report_from_json(text: str) -> SweepReport:
    import json

    doc = json.loads(text)
    if doc.get("format") != "sweep-report":
        raise ValueError("not a sweep-report document")
    cfg_d = doc["config"]
    cfg_d["estimators"] = tuple(cfg_d["estimators"])
    cfg_d["n1_fractions"] = tuple(cfg_d["n1_fractions"])
    cfg = ExperimentConfig(**cfg_d)
    records = tuple(TrialRecord(**r) for r in doc["records"])
    return SweepReport(cfg, records)


def report_charts(report: SweepReport) -> dict[str, str]:
    """Two SVG panels: mean recovery and mean l2 error vs outlier fraction."""
    aggs = report.aggregates()
    charts = {}
    for metric, label, fname in (
        ("recovery", "mean support recovery", "recovery"),
        ("l2_error", "mean relative l2 error", "l2_error"),
    ):
        series = []
        for estimator in report.config.estimators:
            rows = [a for a in aggs if a["estimator"] == estimator and a[f"{metric}_mean"] is not None]
            rows.sort(key=lambda a: a["n1_fraction"])
            if not rows:
                continue
            series.append(
                {
                    "label": estimator,
                    "x": [a["n1_fraction"] for a in rows],
                    "y": [a[f"{metric}_mean"] for a in rows],
                    "err": [a[f"{metric}_std"] for a in rows],
                }
            )
        charts[fname] = line_chart(
            f"{label} vs outlier fraction", "outlier fraction n1/n", label, series
        )
    return charts


def emit_report(
    report: SweepReport,
    out_dir,
    formats: Sequence[str] = ("csv", "json", "svg"),
    include_timing: bool = False,
) -> list[Path]:
    """Write sweep.csv / sweep.json / <metric>.svg into ``out_dir``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        if "csv" in formats:
            path = out / "sweep.csv"
            path.write_text(report_to_csv(report, include_timing))
            written.append(path)
        if "json" in formats:
            path = out / "sweep.json"
            path.write_text(report_to_json(report, include_timing))
            written.append(path)
        if "svg" in formats:
            for name, text in report_charts(report).items():
                path = out / f"{name}.svg"
                path.write_text(text)
                written.append(path)
        return written
    except OSError as exc:
        raise OSError(f"failed writing report under {out}: {exc}") from exc
