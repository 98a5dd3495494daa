"""Command-line interface.

Subcommands: ``analyze {matrix,exact,bound}``, ``estimate``, ``benchmark
{analyzers,utility}``, ``calibrate`` and ``fixtures generate``. Every run
emits a JSON envelope with a manifest (command line, seed, config digest,
version, wall time); identical flags and seed reproduce byte-identical
results apart from the wall-time field. Leakage values are reported in nats
and declared as such in the ``units`` block; ``--bits`` adds a converted
display field.

Exit codes: 0 success, 2 usage or input error (machine-readable JSON on
stderr), 3 numerical infeasibility.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .benchmarks import analyzer_benchmark, pairwise_conditionals, utility_benchmark
from .calibration import calibrate
from .composition import CplMatrix, tcpl
from .correlation_metrics import metrics
from .cpl_bound import BudgetParams, cpl_bound
from .cpl_exact import cpl_exact
from .data_model import empirical_joint, expand_dataset, load_conditional_json, load_csv
from .errors import CplKitError, InfeasibleBudgetError
from .fixtures import generate_fixtures
from .mechanisms import KINDS, MechanismSpec, transition_matrix
from .statistical import EstimationConfig, perturb_dataset, statistical_cpl

_LN2 = math.log(2.0)


def _default_seed() -> int:
    env = os.environ.get("CPL_KIT_SEED")
    return int(env) if env else 0


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x != ""]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x != ""]


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x]
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _config_digest(args: argparse.Namespace) -> str:
    payload = {k: v for k, v in sorted(vars(args).items())
               if k not in ("func", "out") and not callable(v)}
    blob = json.dumps(payload, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def _emit(args: argparse.Namespace, result: dict, started: float) -> None:
    envelope = {
        "manifest": {
            "command": " ".join(args._argv),
            "seed": getattr(args, "seed", None),
            "config_digest": _config_digest(args),
            "version": __version__,
            "wall_time_s": round(time.perf_counter() - started, 6),
        },
        "units": {"leakage": "nats", "entropy": "nats"},
        "result": _jsonable(result),
    }
    text = json.dumps(envelope, indent=2, sort_keys=True)
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _with_bits(obj: dict, args: argparse.Namespace) -> dict:
    if getattr(args, "bits", False) and "leakage_nats" in obj:
        obj["leakage_bits"] = obj["leakage_nats"] / _LN2
    return obj


def _spec_from_args(args: argparse.Namespace, k: int) -> MechanismSpec:
    return MechanismSpec(args.mechanism, args.epsilon, k, getattr(args, "delta", 0.0))


# --------------------------------------------------------------------------
# Subcommand handlers
# --------------------------------------------------------------------------

def _cmd_analyze_matrix(args) -> dict:
    d = load_csv(args.data)
    conds = pairwise_conditionals(d)
    n = d.n_attributes
    entries = []
    grid: list[list] = [[None] * n for _ in range(n)]
    for (i, j), cond in sorted(conds.items()):
        if args.mechanism:
            spec = MechanismSpec(args.mechanism, args.epsilon, cond.n_cols)
            res = cpl_exact(cond, transition_matrix(spec))
            grid[i][j] = res
            entry = {"target": i, "neighbor": j, "leakage_nats": res.leakage,
                     "infinite": res.is_infinite}
        else:
            res = cpl_bound(cond, BudgetParams(args.epsilon, args.delta))
            grid[i][j] = res
            entry = {"target": i, "neighbor": j, "leakage_nats": res.leakage,
                     "relaxation": res.relaxation}
        entries.append(_with_bits(entry, args))
    matrix = CplMatrix(d.attribute_names, tuple(tuple(row) for row in grid))
    metric_rows = []
    for i in range(n):
        for j in range(i + 1, n):
            rep = metrics(empirical_joint(d, i, j))
            metric_rows.append({
                "i": i, "j": j, "mi_nats": rep.mi, "nmi": rep.nmi,
                "pcc": None if math.isnan(rep.pcc) else rep.pcc,
                "h_a_nats": rep.h_a, "h_b_nats": rep.h_b, "h_joint_nats": rep.h_joint,
            })
    return {
        "attributes": list(d.attribute_names),
        "epsilon": args.epsilon,
        "delta": args.delta,
        "engine": f"exact-{args.mechanism}" if args.mechanism else "bound",
        "entries": entries,
        "tcpl_nats": tcpl(matrix),
        "metrics": metric_rows,
    }


def _cmd_analyze_exact(args) -> dict:
    cond = load_conditional_json(args.cond)
    k = args.k if args.k else cond.n_cols
    spec = _spec_from_args(args, k)
    res = cpl_exact(cond, transition_matrix(spec))
    out = {
        "leakage_nats": res.leakage,
        "witness": {"output": res.witness[0], "x": res.witness[1], "x_prime": res.witness[2]},
        "infinite_witness": None if res.infinite_witness is None else
            {"output": res.infinite_witness[0], "x": res.infinite_witness[1],
             "x_prime": res.infinite_witness[2]},
    }
    return _with_bits(out, args)


def _cmd_analyze_bound(args) -> dict:
    cond = load_conditional_json(args.cond)
    res = cpl_bound(cond, BudgetParams(args.epsilon, args.delta))
    out = {
        "leakage_nats": res.leakage,
        "relaxation": res.relaxation,
        "subset": list(res.subset),
        "A": res.a_mass,
        "B": res.b_mass,
        "witness_pair": list(res.witness_pair),
    }
    return _with_bits(out, args)


def _cmd_estimate(args) -> dict:
    d = load_csv(args.data)
    cfg = EstimationConfig(expansion=args.r, surrogates=args.surrogates,
                           alpha=args.alpha, seed=args.seed, threads=args.threads)
    specs = [MechanismSpec(args.mechanism, args.epsilon, d.alphabet(j).size)
             for j in range(d.n_attributes)]
    perturbed = perturb_dataset(d, specs, cfg)
    original = expand_dataset(d, cfg.expansion)
    res = statistical_cpl(perturbed, original, args.target, _int_list(args.neighbors), cfg)
    return _with_bits({
        "target": args.target,
        "neighbors": _int_list(args.neighbors),
        "mechanism": args.mechanism,
        "epsilon": args.epsilon,
        "leakage_nats": res.leakage,
        "p_value": res.p_value,
        "significant": res.significant,
        "excluded_cells": res.excluded_cells,
    }, args)


def _cmd_benchmark_analyzers(args) -> dict:
    d = load_csv(args.data)
    runs = []
    for eps in _float_list(args.epsilons):
        points = analyzer_benchmark(d, eps, thresholds=tuple(_float_list(args.thresholds)),
                                    reference=args.reference)
        runs.append({
            "epsilon": eps,
            "reference": args.reference,
            "points": {name: {"undershoot": p.undershoot, "overshoot": p.overshoot,
                              "region": p.region} for name, p in sorted(points.items())},
        })
    return {"runs": runs}


def _cmd_benchmark_utility(args) -> dict:
    d = load_csv(args.data)
    cfg = EstimationConfig(expansion=args.r, surrogates=1, alpha=0.05,
                           seed=args.seed, threads=args.threads)
    rows = utility_benchmark(d, args.mechanisms.split(","), _float_list(args.epsilons), cfg)
    return {"rows": [{
        "mechanism": r.mechanism, "epsilon": r.epsilon,
        "freq_nmse": r.report.freq_nmse, "zero_one_error": r.report.zero_one_error,
        "norm_tcpl": r.report.norm_tcpl,
    } for r in rows]}


def _cmd_calibrate(args) -> dict:
    d = load_csv(args.data)
    joints = {(i, j): empirical_joint(d, i, j)
              for i in range(d.n_attributes) for j in range(d.n_attributes) if i != j}
    res = calibrate(joints, args.budget, step=args.step, engine=args.engine)
    return {
        "epsilon_star": res.epsilon_star,
        "worst_attribute": res.worst_attribute,
        "worst_tpl_nats": res.worst_tpl,
        "iterations": res.iterations,
        "trace": [{"epsilon": e, "worst_tpl_nats": w} for e, w in res.trace],
    }


def _cmd_fixtures_generate(args) -> dict:
    samples = {}
    if args.samples:
        for part in args.samples.split(","):
            name, _, count = part.partition("=")
            samples[name] = int(count)
    return generate_fixtures(args.out_dir, seed=args.seed, samples=samples)


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

def _add_seed(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=_default_seed(),
                   help="root seed for all randomness (env CPL_KIT_SEED)")
    p.add_argument("--threads", type=int, default=max(1, os.cpu_count() or 1),
                   help="worker-parallelism cap; results do not depend on it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cpl-kit",
                                     description="Correlation-induced privacy leakage toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="leakage analysis from tables")
    asub = analyze.add_subparsers(dest="analyze_command", required=True)

    p = asub.add_parser("matrix", help="full pairwise leakage matrix for a CSV dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--mechanism", choices=("grr", "exp"), default=None,
                   help="use exact transition-matrix leakage instead of the bound")
    p.add_argument("--bits", action="store_true")
    p.add_argument("--out")
    _add_seed(p)
    p.set_defaults(func=_cmd_analyze_matrix)

    p = asub.add_parser("exact", help="exact leakage for one conditional table")
    p.add_argument("--cond", required=True, help="conditional table JSON")
    p.add_argument("--mechanism", choices=("grr", "exp"), required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--bits", action="store_true")
    p.add_argument("--out")
    _add_seed(p)
    p.set_defaults(func=_cmd_analyze_exact)

    p = asub.add_parser("bound", help="budget-only leakage bound for one conditional table")
    p.add_argument("--cond", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--bits", action="store_true")
    p.add_argument("--out")
    _add_seed(p)
    p.set_defaults(func=_cmd_analyze_bound)

    p = sub.add_parser("estimate", help="statistical leakage estimate from perturbed data")
    p.add_argument("--data", required=True)
    p.add_argument("--mechanism", choices=KINDS, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--neighbors", required=True, help="comma-separated attribute indices")
    p.add_argument("--r", type=int, default=50, help="record replication factor")
    p.add_argument("--surrogates", type=int, default=1000)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--bits", action="store_true")
    p.add_argument("--out")
    _add_seed(p)
    p.set_defaults(func=_cmd_estimate)

    bench = sub.add_parser("benchmark", help="analyzer and utility benchmarks")
    bsub = bench.add_subparsers(dest="benchmark_command", required=True)

    p = bsub.add_parser("analyzers", help="undershoot/overshoot of leakage analyzers")
    p.add_argument("--data", required=True)
    p.add_argument("--epsilons", default="1")
    p.add_argument("--thresholds", default="0.2,0.4")
    p.add_argument("--reference", default="bound",
                   choices=("bound", "exact-grr", "exact-exp"))
    p.add_argument("--out")
    _add_seed(p)
    p.set_defaults(func=_cmd_benchmark_analyzers)

    p = bsub.add_parser("utility", help="utility error vs normalized total leakage")
    p.add_argument("--data", required=True)
    p.add_argument("--mechanisms", default=",".join(KINDS))
    p.add_argument("--epsilons", default="1,3,5")
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--out")
    _add_seed(p)
    p.set_defaults(func=_cmd_benchmark_utility)

    p = sub.add_parser("calibrate", help="correlation-aware uniform budget calibration")
    p.add_argument("--data", required=True)
    p.add_argument("--budget", type=float, required=True)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--engine", default="bound", choices=("bound", "exact-grr"))
    p.add_argument("--out")
    _add_seed(p)
    p.set_defaults(func=_cmd_calibrate)

    fixtures = sub.add_parser("fixtures", help="bundled synthetic datasets")
    fsub = fixtures.add_subparsers(dest="fixtures_command", required=True)
    p = fsub.add_parser("generate", help="write fixture CSVs and a manifest")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--samples", default=None, help="overrides, e.g. maxleak_pair=10000")
    p.add_argument("--out")
    _add_seed(p)
    p.set_defaults(func=_cmd_fixtures_generate)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args._argv = ["cpl-kit", *argv]
    started = time.perf_counter()
    try:
        result = args.func(args)
    except InfeasibleBudgetError as exc:
        json.dump({"error": {"type": type(exc).__name__, "message": str(exc)}},
                  sys.stderr, sort_keys=True)
        sys.stderr.write("\n")
        return 3
    except (CplKitError, OSError) as exc:
        json.dump({"error": {"type": type(exc).__name__, "message": str(exc)}},
                  sys.stderr, sort_keys=True)
        sys.stderr.write("\n")
        return 2
    _emit(args, result, started)
    return 0


if __name__ == "__main__":
    sys.exit(main())
