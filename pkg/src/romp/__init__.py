"""Robust sparse regression under adversarial corruption.

Recovers the support of a k-sparse linear regressor when an adversary
arbitrarily rewrites whole covariate/response rows, or a bounded number
of cells per column.  The core estimator scores columns by a trimmed
inner product with the response and keeps the k largest scores; the
package also ships the baseline estimators it is measured against,
explicit adversarial constructions, Monte Carlo concentration probes,
and a seeded benchmark harness.
"""

from .corruption import (
    AttackDegenerateError,
    AttackSpec,
    apply_attack,
    attack_bruteforce,
    attack_feasibility,
    attack_sco,
    corrupt_distributed,
    project_l1_ball,
    random_row_corruption,
    solve_theta_star,
)
from .datagen import (
    DesignDistribution,
    SignalScheme,
    assemble_instance,
    sample_design,
    sample_signal,
)
from .estimators import (
    ConvergenceError,
    EstimatorResult,
    SizeGuardError,
    brute_force,
    column_trimmed_products,
    extreme_entry_mask,
    extreme_row_filter,
    fill_extreme_entries,
    jp_fill,
    jp_row,
    justice_pursuit,
    justice_pursuit_grid,
    lasso,
    matching_pursuit_omp,
    romp,
    top_k_support,
    trimmed_inner_product,
)
from .harness import (
    ExperimentConfig,
    SweepReport,
    TrialRecord,
    emit_report,
    relative_l2_error,
    run_sweep,
    run_trial,
    support_recovery,
)
from .model import (
    CorruptionLedger,
    DegenerateSystemError,
    RegressionInstance,
    SparseSignal,
    SupportSet,
    dense_expand,
    least_squares,
    submatrix,
    support_set,
)
from .probes import (
    ProbeReport,
    probe_bruteforce_failure,
    probe_concentration,
    probe_h_deviation,
    probe_max_subgaussian,
)
from .serialize import dump_instance, load_instance

__version__ = "0.1.0"

__all__ = [
    "AttackDegenerateError",
    "AttackSpec",
    "ConvergenceError",
    "CorruptionLedger",
    "DegenerateSystemError",
    "DesignDistribution",
    "EstimatorResult",
    "ExperimentConfig",
    "ProbeReport",
    "RegressionInstance",
    "SignalScheme",
    "SizeGuardError",
    "SparseSignal",
    "SupportSet",
    "SweepReport",
    "TrialRecord",
    "apply_attack",
    "assemble_instance",
    "attack_bruteforce",
    "attack_feasibility",
    "attack_sco",
    "brute_force",
    "column_trimmed_products",
    "corrupt_distributed",
    "dense_expand",
    "dump_instance",
    "emit_report",
    "extreme_entry_mask",
    "extreme_row_filter",
    "fill_extreme_entries",
    "jp_fill",
    "jp_row",
    "justice_pursuit",
    "justice_pursuit_grid",
    "lasso",
    "least_squares",
    "load_instance",
    "matching_pursuit_omp",
    "probe_bruteforce_failure",
    "probe_concentration",
    "probe_h_deviation",
    "probe_max_subgaussian",
    "project_l1_ball",
    "random_row_corruption",
    "relative_l2_error",
    "romp",
    "run_sweep",
    "run_trial",
    "sample_design",
    "sample_signal",
    "solve_theta_star",
    "submatrix",
    "support_recovery",
    "support_set",
    "top_k_support",
    "trimmed_inner_product",
]
