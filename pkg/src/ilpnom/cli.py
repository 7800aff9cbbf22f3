"""Command-line entry points.

Exit codes: 0 success, 1 statistical test undefined (too few nonzero
differences), 2 malformed input, 3 solver limit reached (the result
document is still written).
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import math
import sys
from typing import List, Optional

from . import __version__, io
from .core import SupervisionInstance
from .eval import ExperimentConfig, compare_paired, run_simulation, singleton_baseline
from .ilp import Status, build_model, export_lp, solution_to_ranker, solve
from .ranking import count_beating_worst, mean_reciprocal_rank
from .solver import SolverConfig
from .spectral import GENERATOR_NAME, make_rng

EXIT_OK = 0
EXIT_UNDEFINED = 1
EXIT_INPUT = 2
EXIT_LIMIT = 3


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _fail(code: int, msg: str) -> int:
    print(f"ilpnom: error: {msg}", file=sys.stderr)
    return code


def _solver_config(args) -> SolverConfig:
    return SolverConfig(node_limit=args.node_limit, time_budget=args.time_budget_s)


def _tracer(args):
    if not args.trace:
        return None
    return lambda line: print(line, file=sys.stderr)


def build_nominate_document(matrix, rep_names, s_rows, cfg: SolverConfig, *, tie_break="index",
                            seed=0, restrict_mrr="full", holdout=None, inputs=None,
                            trace=None):
    """Solve one instance and assemble the result document."""
    inst = SupervisionInstance(matrix.n_items, frozenset(s_rows))
    sol = solve(build_model(matrix, inst), cfg, trace=trace)
    nlist = solution_to_ranker(matrix, sol)
    order = nlist.order()
    rank_of = nlist.rank_of()
    fused = dict(zip(nlist.rows.tolist(), nlist.fused_values.tolist()))

    rng = make_rng(seed) if tie_break == "seeded" else None
    j_single, single_list = singleton_baseline(matrix, inst, tie_break, rng)

    doc = {
        "alpha": [float(a) for a in sol.alpha.alpha],
        "objective": int(sol.objective_value),
        "status": sol.status.value,
        "ranking": [
            {"id": matrix.label(r), "rank": int(rank_of[r]), "fused": float(fused[r]),
             "supervised": bool(r in inst.s_set)}
            for r in order.tolist()
        ],
        "singleton": {
            "column": rep_names[j_single],
            "index": j_single,
            "objective": count_beating_worst(matrix.column(j_single), inst),
        },
        "provenance": {
            "tool": "ilpnom",
            "version": __version__,
            "generator": GENERATOR_NAME,
            "inputs": inputs or {},
            "representations": list(rep_names),
            "column_shift": [float(c) for c in matrix.column_shift],
            "config": dict(cfg.as_dict(), tie_break=tie_break, seed=seed,
                           restrict_mrr=restrict_mrr),
            "solver": {"nodes": sol.nodes, "lp_iterations": sol.lp_iterations,
                       "lower_bound": sol.lower_bound},
        },
    }
    if holdout is not None:
        use = inst if restrict_mrr == "candidate" else None
        doc["mrr"] = {
            "holdout": [matrix.label(r) for r in holdout],
            "mode": restrict_mrr,
            "ilp": mean_reciprocal_rank(nlist, holdout, use),
            "singleton": mean_reciprocal_rank(single_list, holdout, use),
        }
    return doc, sol


def cmd_nominate(args) -> int:
    try:
        matrix, rep_names = io.read_dissimilarity_csv(args.dissimilarities)
        s_rows = io.read_id_list(args.supervision, matrix.labels)
        holdout = io.read_id_list(args.holdout, matrix.labels) if args.holdout else None
        if len(s_rows) >= matrix.n_items:
            raise io.InputError(f"{args.supervision}: S covers every item; no candidates remain")
        if holdout is not None and set(holdout) & set(s_rows):
            raise io.InputError(f"{args.holdout}: held-out ids must not be in S")
    except (OSError, io.InputError) as exc:
        return _fail(EXIT_INPUT, str(exc))
    inputs = {
        "dissimilarities": {"path": args.dissimilarities, "sha256": io.sha256_of(args.dissimilarities)},
        "supervision": {"path": args.supervision, "sha256": io.sha256_of(args.supervision)},
    }
    if args.holdout:
        inputs["holdout"] = {"path": args.holdout, "sha256": io.sha256_of(args.holdout)}
    cfg = _solver_config(args)
    doc, sol = build_nominate_document(
        matrix, rep_names, s_rows, cfg, tie_break=args.tie_break, seed=args.seed,
        restrict_mrr=args.restrict_mrr, holdout=holdout, inputs=inputs, trace=_tracer(args))
    if args.export_lp:
        inst = SupervisionInstance(matrix.n_items, frozenset(s_rows))
        _write(args.export_lp, export_lp(build_model(matrix, inst)))
    _write(args.output, io.dumps(doc))
    if sol.status is Status.ITERATION_LIMIT:
        print("ilpnom: solver limit reached; result holds the best incumbent", file=sys.stderr)
        return EXIT_LIMIT
    return EXIT_OK


SUMMARY_COLUMNS = ["alpha_truth", "scheme", "mean_rr", "ci_halfwidth", "mean_objective",
                   "reps_used", "limit_hits"]
REPLICATE_COLUMNS = ["alpha_truth", "replicate", "scheme", "reciprocal_rank", "objective",
                     "limit_hit"]


def _csv_text(header: List[str], rows: List[list]) -> str:
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        # an empty cell marks a mean over zero replicates
        w.writerow(["" if isinstance(v, float) and math.isnan(v)
                    else io.format_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def cmd_simulate(args) -> int:
    try:
        raw = io.read_key_value(args.config)
        try:
            cfg = ExperimentConfig.from_strings(raw)
        except (TypeError, ValueError) as exc:
            raise io.InputError(f"{args.config}: {exc}") from None
    except (OSError, io.InputError) as exc:
        return _fail(EXIT_INPUT, str(exc))
    solver_cfg = _solver_config(args)
    result = run_simulation(cfg, solver_cfg, restrict_mrr=args.restrict_mrr,
                            workers=args.workers, exclude_limit_hits=args.exclude_limit_hits)
    summary = _csv_text(SUMMARY_COLUMNS, [
        [r.alpha_truth, r.scheme, r.mean_rr, r.ci_halfwidth, r.mean_objective, r.reps_used,
         r.limit_hits] for r in result.rows])
    _write(args.output, summary)
    if args.replicates_out:
        _write(args.replicates_out, _csv_text(REPLICATE_COLUMNS, [
            [r.alpha_truth, r.replicate, r.scheme, r.reciprocal_rank, r.objective,
             int(r.limit_hit)] for r in result.replicates]))
    if args.metadata_out:
        meta = {
            "tool": "ilpnom",
            "version": __version__,
            "generator": GENERATOR_NAME,
            "config": cfg.as_dict(),
            "config_sha256": io.sha256_of(args.config),
            "solver": solver_cfg.as_dict(),
            "restrict_mrr": args.restrict_mrr,
            "exclude_limit_hits": bool(args.exclude_limit_hits),
        }
        _write(args.metadata_out, io.dumps(meta))
    return EXIT_OK


def _parse_where(items) -> list:
    out = []
    for item in items or []:
        if "=" not in item:
            raise io.InputError(f"filter {item!r} must look like COLUMN=VALUE")
        k, v = item.split("=", 1)
        out.append((k, v))
    return out


def cmd_compare(args) -> int:
    keys = [k.strip() for k in args.key_columns.split(",") if k.strip()]
    try:
        a = io.read_scores(args.results_a, keys, args.value_column, _parse_where(args.where_a))
        b = io.read_scores(args.results_b, keys, args.value_column, _parse_where(args.where_b))
        if set(a) != set(b):
            only = sorted(set(a) ^ set(b))[:5]
            raise io.InputError(f"inputs do not pair up; unmatched keys include {only}")
    except (OSError, io.InputError) as exc:
        return _fail(EXIT_INPUT, str(exc))
    order = sorted(a)
    try:
        report = compare_paired([a[k] for k in order], [b[k] for k in order],
                                args.label_a, args.label_b, order)
    except ValueError as exc:
        return _fail(EXIT_UNDEFINED, str(exc))
    doc = report.to_dict()
    doc["provenance"] = {
        "tool": "ilpnom",
        "version": __version__,
        "inputs": {
            "a": {"path": args.results_a, "sha256": io.sha256_of(args.results_a)},
            "b": {"path": args.results_b, "sha256": io.sha256_of(args.results_b)},
        },
    }
    _write(args.output, io.dumps(doc))
    print(report.direction, file=sys.stderr)
    return EXIT_OK


def _add_solver_flags(p: argparse.ArgumentParser, restrict_default: str) -> None:
    p.add_argument("--node-limit", type=int, default=100_000)
    p.add_argument("--time-budget-s", type=float, default=600.0)
    p.add_argument("--trace", action="store_true",
                   help="print one line per branch-and-bound node to stderr")
    p.add_argument("--restrict-mrr", choices=("full", "candidate"), default=restrict_default,
                   help="rank held-out items in the full list or among candidates only")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ilpnom", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ilpnom {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("nominate", help="learn weights for one query and write its ranking")
    p.add_argument("dissimilarities", help="CSV with header id,d1,...,dJ")
    p.add_argument("supervision", help="newline-separated ids known to be similar")
    p.add_argument("-o", "--output", help="result JSON path (default: stdout)")
    p.add_argument("--holdout", help="ids to score by MRR")
    p.add_argument("--export-lp", metavar="PATH", help="also write the model in LP format")
    p.add_argument("--tie-break", choices=("index", "seeded"), default="index",
                   help="singleton baseline tie-break")
    p.add_argument("--seed", type=int, default=0)
    _add_solver_flags(p, "full")
    p.set_defaults(func=cmd_nominate)

    p = sub.add_parser("simulate", help="run the RDPG simulation from a key = value config")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="summary CSV path (default: stdout)")
    p.add_argument("--replicates-out", metavar="PATH", help="per-replicate CSV")
    p.add_argument("--metadata-out", metavar="PATH", help="provenance JSON")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--exclude-limit-hits", action="store_true")
    _add_solver_flags(p, "candidate")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="paired Wilcoxon comparison of two score tables")
    p.add_argument("results_a")
    p.add_argument("results_b")
    p.add_argument("-o", "--output", help="report JSON path (default: stdout)")
    p.add_argument("--key-columns", default="id", help="comma-separated pairing key columns")
    p.add_argument("--value-column")
    p.add_argument("--where-a", action="append", metavar="COL=VALUE")
    p.add_argument("--where-b", action="append", metavar="COL=VALUE")
    p.add_argument("--label-a", default="a")
    p.add_argument("--label-b", default="b")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "node_limit", 1) <= 0 or getattr(args, "time_budget_s", 1) <= 0:
        return _fail(EXIT_INPUT, "--node-limit and --time-budget-s must be positive")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
