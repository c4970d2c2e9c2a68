"""Command-line interface.

Subcommands: generate, attack, solve, probe, benchmark.  Instances and
results travel as JSON documents (see serialize module for the schema).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import estimators as est
from .corruption import AttackSpec, apply_attack
from .datagen import DesignDistribution, SignalScheme, assemble_instance
from .harness import ExperimentConfig, emit_report, run_sweep
from .probes import (
    probe_bruteforce_failure,
    probe_concentration,
    probe_h_deviation,
    probe_max_subgaussian,
)
from .serialize import canonical_json, dump_instance, ledger_to_dict, load_instance


def _cmd_generate(args) -> int:
    inst = assemble_instance(
        args.n,
        args.n1,
        args.p,
        DesignDistribution(args.design),
        SignalScheme(args.signal, k=args.k),
        args.sigma_e,
        args.seed,
    )
    Path(args.out).write_text(dump_instance(inst))
    print(f"wrote instance ({inst.n_total} x {inst.p}) to {args.out}")
    return 0


def _cmd_attack(args) -> int:
    inst = load_instance(Path(args.infile).read_text())
    spec = AttackSpec(
        args.name,
        magnitude=args.magnitude if args.name == "sco" else None,
        scale=args.scale if args.name == "random_rows" else None,
        seed=args.seed,
    )
    attacked = apply_attack(inst, spec)
    Path(args.out).write_text(dump_instance(attacked))
    ledger_path = args.ledger or str(Path(args.out).with_suffix(".ledger.json"))
    Path(ledger_path).write_text(canonical_json(ledger_to_dict(attacked.ledger)))
    print(f"wrote attacked instance to {args.out}, ledger to {ledger_path}")
    return 0


def _cmd_solve(args) -> int:
    inst = load_instance(Path(args.infile).read_text())
    X, y = inst.X, inst.y
    k = args.k if args.k is not None else inst.truth.k
    n1 = args.n1 if args.n1 is not None else inst.n_outliers
    diagnostics = {}
    if args.estimator == "romp":
        res = est.romp(X, y, k, n1)
        beta, sup, diagnostics = res.beta_hat, res.support_hat, res.diagnostics
    elif args.estimator == "omp":
        res = est.matching_pursuit_omp(X, y, k)
        beta, sup, diagnostics = res.beta_hat, res.support_hat, res.diagnostics
    elif args.estimator == "brute_force":
        res = est.brute_force(X, y, inst.n_authentic, k, args.size_guard)
        beta, sup, diagnostics = res.beta_hat, res.support_hat, res.diagnostics
    elif args.estimator == "lasso":
        beta, info = est.lasso(X, y, args.lam, full_output=True)
        sup = est.top_k_support(beta, k)
        diagnostics = {k_: v for k_, v in info.items() if k_ != "objective_trace"}
    else:  # jp / jp_fill / jp_row
        if args.estimator == "jp":
            beta, z, info = est.justice_pursuit(X, y, args.lam, args.gamma, full_output=True)
        elif args.estimator == "jp_fill":
            beta, z, info = est.jp_fill(X, y, n1, args.lam, args.gamma, full_output=True)
        else:
            beta, z, info = est.jp_row(X, y, n1, args.lam, args.gamma, full_output=True)
        sup = est.top_k_support(beta, k)
        diagnostics = {
            k_: v for k_, v in info.items() if k_ not in ("objective_trace", "kept_rows")
        }
    doc = {
        "estimator": args.estimator,
        "beta_hat": np.asarray(beta).tolist(),
        "support_hat": list(sup.indices),
        "diagnostics": diagnostics,
    }
    Path(args.out).write_text(canonical_json(doc))
    print(f"wrote result to {args.out} (support: {list(sup.indices)})")
    return 0


def _cmd_probe(args) -> int:
    if args.name == "max_subgaussian":
        report = probe_max_subgaussian(args.m, args.p, args.sigma, args.trials, args.seed)
    elif args.name == "concentration":
        report = probe_concentration(args.n, args.p, args.trials, args.seed)
    elif args.name == "h_deviation":
        grid = [int(v) for v in args.n1_grid.split(",")]
        report = probe_h_deviation(
            int(args.p), args.n, args.k, args.sigma, grid, args.trials, args.seed
        )
    else:
        report = probe_bruteforce_failure(
            int(args.p), args.k, args.n, args.n1, args.trials, args.seed
        )
    Path(args.out).write_text(report.to_json())
    print(
        f"probe {report.name}: trials={report.trials} "
        f"violation_rate={report.violation_rate:.4g} -> {args.out}"
    )
    return 0


def _cmd_benchmark(args) -> int:
    cfg_doc = json.loads(Path(args.config).read_text())
    cfg_doc["estimators"] = tuple(cfg_doc.get("estimators", ("romp", "lasso", "jp")))
    cfg_doc["n1_fractions"] = tuple(cfg_doc.get("n1_fractions", (0.0, 0.04, 0.08)))
    config = ExperimentConfig(**cfg_doc)
    report = run_sweep(config)
    paths = emit_report(report, args.out, include_timing=args.timing)
    for path in paths:
        print(f"wrote {path}")
    failed = report.failed
    if failed:
        print(f"{len(failed)} trial(s) failed", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="romp",
        description="Robust sparse regression under adversarial corruption.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a clean instance as JSON")
    g.add_argument("--n", type=int, required=True, help="authentic sample count")
    g.add_argument("--n1", type=int, default=0, help="rows reserved for the adversary")
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--sigma-e", dest="sigma_e", type=float, default=0.0)
    g.add_argument("--design", choices=("gaussian", "rademacher"), default="gaussian")
    g.add_argument("--signal", choices=("pm_one", "ones"), default="pm_one")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_generate)

    a = sub.add_parser("attack", help="corrupt an instance and record the ledger")
    a.add_argument(
        "--name",
        choices=("sco", "bruteforce", "feasibility", "random_rows", "distributed_mass"),
        required=True,
    )
    a.add_argument("--in", dest="infile", required=True)
    a.add_argument("--out", required=True)
    a.add_argument("--ledger", help="ledger JSON path (default: <out>.ledger.json)")
    a.add_argument("--magnitude", type=float, default=1000.0, help="sco column magnitude")
    a.add_argument("--scale", type=float, default=1.0, help="random_rows entry scale")
    a.add_argument("--seed", type=int, default=0)
    a.set_defaults(func=_cmd_attack)

    s = sub.add_parser("solve", help="run one estimator on an instance")
    s.add_argument(
        "--estimator",
        choices=("romp", "omp", "lasso", "jp", "jp_fill", "jp_row", "brute_force"),
        required=True,
    )
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--k", type=int, help="sparsity (default: the instance's truth)")
    s.add_argument("--n1", type=int, help="trim/discard budget (default: instance outliers)")
    s.add_argument("--lam", type=float, default=0.1)
    s.add_argument("--gamma", type=float, default=0.1)
    s.add_argument("--size-guard", dest="size_guard", type=int, default=10_000_000)
    s.set_defaults(func=_cmd_solve)

    pr = sub.add_parser("probe", help="run a Monte Carlo probe, emit a JSON report")
    pr.add_argument(
        "--name",
        choices=("max_subgaussian", "concentration", "h_deviation", "bruteforce_failure"),
        required=True,
    )
    pr.add_argument("--m", type=int, default=1000)
    pr.add_argument("--n", type=int, default=300)
    pr.add_argument("--n1", type=int, default=0)
    pr.add_argument("--p", type=float, default=100.0)
    pr.add_argument("--k", type=int, default=5)
    pr.add_argument("--sigma", type=float, default=1.0)
    pr.add_argument("--n1-grid", dest="n1_grid", default="0,2,4,6,8")
    pr.add_argument("--trials", type=int, default=1000)
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--out", required=True)
    pr.set_defaults(func=_cmd_probe)

    b = sub.add_parser("benchmark", help="run a sweep from a config JSON")
    b.add_argument("--config", required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--timing", action="store_true", help="include wall times in artifacts")
    b.set_defaults(func=_cmd_benchmark)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
