"""Command line entry point.

Exit codes: 10 satisfiable, 20 unsatisfiable, 0 analysis success,
1 usage or input error, 2 node budget exhausted.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys

from .cnf import DimacsError, Formula, generate_uniform_ksat, iter_dimacs, satisfies, write_dimacs
from .experiment import (
    DESK_DEFAULTS,
    Dataset,
    build_dataset,
    default_jobs,
    encode_bits,
    evaluate,
    greedy_construct,
    linear_sweep,
    split_half_eval,
)
from .heuristics import HeuristicConfig, UnsupportedWidthError
from .orders import StrategyKind, is_permutation, visit_order
from .search import DEFAULT_BUDGET, BudgetExhausted, map_subtrees, solve
from .treemodel import ALL_STRATEGIES, DepthProfile, e_goal, leaf_probs, optimal_order, unsolved_curve

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BUDGET = 2
EXIT_SAT = 10
EXIT_UNSAT = 20

log = logging.getLogger("lasat")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _heuristic_flags(p):
    g = p.add_argument_group("heuristic")
    g.add_argument("--heuristic", choices=["w0x", "w1plus", "w1x", "wix"], default="wix",
                   help="weight variant (default wix, i.e. w3x with --iterations 3)")
    g.add_argument("--iterations", type=int, default=None,
                   help="recursion depth for wix (default 3)")
    g.add_argument("--gamma", type=float, default=3.3, help="binary clause weight (default 3.3)")
    g.add_argument("--no-failed-literals", action="store_true",
                   help="do not force the negation of failed look-aheads")


def _config(args) -> HeuristicConfig:
    if args.iterations is not None and args.heuristic != "wix":
        raise UsageError("--iterations only applies to --heuristic wix")
    iterations = 3 if args.iterations is None else args.iterations
    try:
        return HeuristicConfig.named(args.heuristic, iterations=iterations, gamma=args.gamma,
                                     failed_literal_detection=not args.no_failed_literals)
    except ValueError as err:
        raise UsageError(str(err)) from None


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


def _strategy(text: str) -> StrategyKind:
    try:
        return StrategyKind.parse(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown strategy {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lasat", description="Look-ahead SAT solving with discrepancy-ordered search.")
    parser.add_argument("-q", "--quiet", action="store_true", help="only print errors")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve a DIMACS CNF file")
    p.add_argument("file", help="DIMACS file, '-' for stdin")
    p.add_argument("--strategy", type=_strategy, default=StrategyKind.ALDS,
                   help="dfs, ilds, dds or alds (default alds)")
    p.add_argument("--jump-depth", type=int, default=8, help="levels ordered by the strategy (default 8)")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="node expansion limit")
    p.add_argument("--skip-dead", action=argparse.BooleanOptionalAction, default=True,
                   help="skip subtrees under refuted prefixes (default on)")
    p.add_argument("--format", choices=["dimacs", "json"], default="dimacs")
    p.add_argument("--output", help="write the result here instead of stdout")
    _heuristic_flags(p)

    p = sub.add_parser("gen", help="generate a uniform random k-SAT instance")
    p.add_argument("--vars", "-n", type=int, required=True)
    size = p.add_mutually_exclusive_group(required=True)
    size.add_argument("--clauses", "-m", type=int)
    size.add_argument("--ratio", type=float, help="clauses per variable, rounded")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")

    p = sub.add_parser("order", help="print a visit order, one 0-based index per line")
    p.add_argument("--strategy", type=_strategy, default=StrategyKind.ALDS)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--output")

    p = sub.add_parser("map", help="print which depth-d subtrees hold a model")
    p.add_argument("file")
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--format", choices=["hex", "json"], default="hex")
    p.add_argument("--output")
    _heuristic_flags(p)

    p = sub.add_parser("model", help="expected goal rank under the single-goal tree model")
    p.add_argument("--depth", type=int, required=True)
    prof = p.add_mutually_exclusive_group(required=True)
    prof.add_argument("--profile", type=_floats, help="p1,...,pd per level")
    prof.add_argument("--linear", type=_floats, help="y,x for p = y + x * level")
    p.add_argument("--strategies", default="all", help="'all' or a comma list of dfs,ilds,dds,alds,optimal")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--output")

    p = sub.add_parser("experiment", help="subtree-map datasets and order evaluation")
    esub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)

    e = esub.add_parser("build", help="map random instances into a dataset file")
    e.add_argument("--count", type=int, default=DESK_DEFAULTS["count"])
    e.add_argument("--vars", "-n", type=int, default=DESK_DEFAULTS["n"])
    e.add_argument("--ratio", type=float, default=DESK_DEFAULTS["ratio"])
    e.add_argument("--depth", type=int, default=DESK_DEFAULTS["d"])
    e.add_argument("--seed", type=int, default=0, help="first instance seed")
    e.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    e.add_argument("--jobs", type=int, default=None, help="worker processes (default $LASAT_JOBS or 1)")
    e.add_argument("--output", required=True)
    _heuristic_flags(e)

    e = esub.add_parser("eval", help="E* and unsolved-fraction curve of orders")
    e.add_argument("--dataset", required=True)
    e.add_argument("--order", action="append",
                   help="dfs, ilds, dds, alds, greedy or file:PATH; repeatable (default the four strategies)")
    e.add_argument("--skip-dead", action="store_true", help="do not count subtrees under refuted prefixes")
    e.add_argument("--format", choices=["csv", "json"], default="csv")
    e.add_argument("--output")

    e = esub.add_parser("greedy", help="greedy coverage order of a dataset")
    e.add_argument("--dataset", required=True)
    e.add_argument("--format", choices=["csv", "json"], default="csv")
    e.add_argument("--output")

    e = esub.add_parser("split", help="greedy on a random half against ALDS")
    e.add_argument("--dataset", required=True)
    e.add_argument("--runs", type=int, default=10)
    e.add_argument("--seed", type=int, default=0, help="seed of the first split")
    e.add_argument("--format", choices=["csv", "json"], default="csv")
    e.add_argument("--output")

    e = esub.add_parser("sweep", help="E* of linear-profile orders y + x * level")
    e.add_argument("--dataset", required=True)
    e.add_argument("--y", type=float, default=0.56)
    e.add_argument("--xs", type=_floats, default=[0.0, 0.0025, 0.005, 0.0075, 0.01, 0.015, 0.02, 0.03])
    e.add_argument("--skip-dead", action="store_true")
    e.add_argument("--format", choices=["csv", "json"], default="csv")
    e.add_argument("--output")
    return parser


def _emit(args, text: str) -> None:
    if getattr(args, "output", None):
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(*tables) -> str:
    """Tables separated by a blank line, each with a header row."""
    buf = io.StringIO()
    for i, rows in enumerate(tables):
        if i:
            buf.write("\n")
        csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _read_cnf(path: str):
    try:
        if path == "-":
            n, _, comments, raw = iter_dimacs(sys.stdin)
        else:
            with open(path) as fh:
                n, _, comments, raw = iter_dimacs(fh)
    except OSError as err:
        raise UsageError(f"{path}: {err.strerror}") from None
    except DimacsError as err:
        raise UsageError(f"{path}: {err}") from None
    formula = Formula.from_clauses(n, raw, comments)
    if formula.tautologies_removed:
        log.warning("removed %d tautological clause(s)", formula.tautologies_removed)
    return formula, raw


def cmd_solve(args) -> int:
    if args.jump_depth < 0:
        raise UsageError("--jump-depth must be non-negative")
    if args.strategy is StrategyKind.LDS:
        raise UsageError("lds is only available as an order (see 'order')")
    config = _config(args)
    formula, raw = _read_cnf(args.file)
    report = solve(formula, config, args.strategy, args.jump_depth, args.budget, args.skip_dead)
    if report.sat and not satisfies(raw, report.model):
        raise AssertionError("model fails the input clauses")
    status = {"sat": "SATISFIABLE", "unsat": "UNSATISFIABLE"}.get(report.status, "UNKNOWN")
    if args.format == "json":
        obj = {
            "status": report.status,
            "model": [v if report.model[v] else -v for v in sorted(report.model)] if report.sat else None,
            "strategy": args.strategy.value,
            "jump_depth": args.jump_depth,
            "subtrees_entered": report.subtrees_entered,
            "subtrees_skipped": report.subtrees_skipped,
            "rank_of_first_solution": report.rank_of_first_solution,
            "nodes_expanded": report.nodes_expanded,
        }
        _emit(args, _json(obj))
    else:
        lines = [
            f"c strategy {args.strategy.value} jump-depth {args.jump_depth} heuristic {config.name}",
            f"c nodes {report.nodes_expanded} subtrees {report.subtrees_entered} skipped {report.subtrees_skipped}",
        ]
        if report.rank_of_first_solution is not None:
            lines.append(f"c rank {report.rank_of_first_solution}")
        lines.append(f"s {status}")
        if report.sat:
            lits = [str(v if report.model[v] else -v) for v in sorted(report.model)] + ["0"]
            for i in range(0, len(lits), 10):
                lines.append("v " + " ".join(lits[i:i + 10]))
        _emit(args, "\n".join(lines) + "\n")
    if report.status == "budget-exhausted":
        return EXIT_BUDGET
    return EXIT_SAT if report.sat else EXIT_UNSAT


def cmd_gen(args) -> int:
    m = args.clauses if args.clauses is not None else round(args.ratio * args.vars)
    try:
        formula = generate_uniform_ksat(args.vars, m, args.k, args.seed)
    except ValueError as err:
        raise UsageError(str(err)) from None
    _emit(args, write_dimacs(formula))
    return EXIT_OK


def cmd_order(args) -> int:
    try:
        order = visit_order(args.strategy, args.depth)
    except ValueError as err:
        raise UsageError(str(err)) from None
    _emit(args, "".join(f"{v}\n" for v in order))
    return EXIT_OK


def cmd_map(args) -> int:
    if args.depth < 1:
        raise UsageError("--depth must be at least 1")
    config = _config(args)
    formula, _ = _read_cnf(args.file)
    try:
        scan = map_subtrees(formula, config, args.depth, args.budget)
    except BudgetExhausted as err:
        log.error("%s", err)
        return EXIT_BUDGET
    bits = encode_bits(scan.bits, args.depth)
    if args.format == "json":
        _emit(args, _json({"d": args.depth, "bits": bits, "popcount": scan.popcount,
                           "dead_prefixes": scan.dead_prefixes, "nodes_expanded": scan.nodes_expanded}))
    else:
        _emit(args, bits + "\n")
    return EXIT_OK


def _model_profile(args) -> DepthProfile:
    try:
        if args.linear is not None:
            if len(args.linear) != 2:
                raise UsageError("--linear takes y,x")
            return DepthProfile.linear(args.linear[0], args.linear[1], args.depth)
        if len(args.profile) != args.depth:
            raise UsageError(f"--profile has {len(args.profile)} values for depth {args.depth}")
        return DepthProfile.of(args.profile)
    except ValueError as err:
        raise UsageError(str(err)) from None


def cmd_model(args) -> int:
    if not 1 <= args.depth <= 20:
        raise UsageError("--depth must be in [1, 20]")
    profile = _model_profile(args)
    if args.strategies == "all":
        names = [k.value for k in ALL_STRATEGIES] + ["optimal"]
    else:
        names = [s.strip().lower() for s in args.strategies.split(",") if s.strip()]
        for s in names:
            if s != "optimal" and s not in {k.value for k in ALL_STRATEGIES}:
                raise UsageError(f"unknown strategy {s!r}")
    probs = leaf_probs(profile)
    orders = {s: optimal_order(probs) if s == "optimal" else visit_order(s, profile.d) for s in names}
    values = {s: e_goal(o, probs) for s, o in orders.items()}
    curves = {s: unsolved_curve(o, probs) for s, o in orders.items()}
    if args.format == "json":
        _emit(args, _json({"depth": profile.d, "profile": list(profile.p), "e_goal": values,
                           "unsolved": curves}))
        return EXIT_OK
    summary = [["strategy", "e_goal"]] + [[s, _fmt(values[s])] for s in names]
    curve = [["rank"] + names]
    for k in range(len(probs) + 1):
        curve.append([k] + [repr(curves[s][k]) for s in names])
    _emit(args, _csv(summary, curve))
    return EXIT_OK


def _load_dataset(path: str) -> Dataset:
    try:
        return Dataset.load(path)
    except OSError as err:
        raise UsageError(f"{path}: {err.strerror}") from None
    except (ValueError, KeyError) as err:
        raise UsageError(f"{path}: not a dataset file ({err})") from None


def _resolve_order(spec: str, dataset: Dataset) -> list[int]:
    d = dataset.d
    if spec == "greedy":
        return greedy_construct(dataset, d).order
    if spec.startswith("file:"):
        path = spec[5:]
        try:
            with open(path) as fh:
                order = [int(line) for line in fh if line.strip()]
        except OSError as err:
            raise UsageError(f"{path}: {err.strerror}") from None
        except ValueError:
            raise UsageError(f"{path}: expected one integer per line") from None
        if not is_permutation(order, d):
            raise UsageError(f"{path}: not a permutation of 2**{d} subtrees")
        return order
    try:
        kind = StrategyKind.parse(spec)
    except ValueError:
        raise UsageError(f"unknown order {spec!r}") from None
    if kind is StrategyKind.LDS:
        raise UsageError("lds has repeats and cannot be evaluated as a permutation")
    return visit_order(kind, d)


def cmd_experiment(args) -> int:
    action = args.action
    if action == "build":
        if args.depth < 1 or args.count < 0 or args.vars < 3:
            raise UsageError("need --depth >= 1, --count >= 0 and --vars >= 3")
        config = _config(args)
        jobs = args.jobs if args.jobs is not None else default_jobs()
        ds = build_dataset(args.count, args.vars, args.ratio, args.depth, args.seed, config,
                           jobs=max(1, jobs), budget=args.budget)
        if len(ds) < args.count:
            log.warning("dataset has %d of %d requested records", len(ds), args.count)
        ds.save(args.output)
        log.info("wrote %d records to %s", len(ds), args.output)
        return EXIT_OK

    ds = _load_dataset(args.dataset)
    if action == "eval":
        specs = args.order or [k.value for k in ALL_STRATEGIES]
        curves = {s: evaluate(_resolve_order(s, ds), ds, args.skip_dead) for s in specs}
        if args.format == "json":
            _emit(args, _json({s: {"e_star": c.e_star, "unsolved_fraction": c.unsolved_fraction}
                               for s, c in curves.items()}))
            return EXIT_OK
        summary = [["order", "e_star", "instances"]] + [[s, _fmt(c.e_star), len(c.ranks)]
                                                         for s, c in curves.items()]
        curve = [["rank"] + specs]
        for k in range(1 << ds.d):
            curve.append([k + 1] + [repr(curves[s].unsolved_fraction[k]) for s in specs])
        _emit(args, _csv(summary, curve))
    elif action == "greedy":
        g = greedy_construct(ds, ds.d)
        if args.format == "json":
            _emit(args, _json({"order": g.order, "covered": g.covered}))
            return EXIT_OK
        rows = [["position", "subtree", "covered"]]
        for pos, v in enumerate(g.order):
            rows.append([pos + 1, v, g.covered[pos] if pos < len(g.covered) else 0])
        _emit(args, _csv(rows))
    elif action == "split":
        runs = [dict(split_half_eval(ds, args.seed + i), seed=args.seed + i) for i in range(args.runs)]
        if args.format == "json":
            _emit(args, _json(runs))
            return EXIT_OK
        cols = ["greedy_a_on_a", "alds_on_a", "greedy_a_on_b", "alds_on_b"]
        rows = [["seed", "size_a", "size_b"] + cols]
        for r in runs:
            rows.append([r["seed"], r["size_a"], r["size_b"]] + [_fmt(r[c]) for c in cols])
        _emit(args, _csv(rows))
    elif action == "sweep":
        table = linear_sweep(ds, args.y, args.xs, args.skip_dead)
        if args.format == "json":
            _emit(args, _json({"y": args.y, "e_star": [[x, v] for x, v in table.items()]}))
            return EXIT_OK
        rows = [["x", "e_star"]] + [[repr(x), _fmt(v)] for x, v in table.items()]
        _emit(args, _csv(rows))
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "gen": cmd_gen,
    "order": cmd_order,
    "map": cmd_map,
    "model": cmd_model,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO,
                        format="lasat: %(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except UsageError as err:
        print(f"lasat: error: {err}", file=sys.stderr)
        return EXIT_ERROR
    except UnsupportedWidthError as err:
        print(f"lasat: error: {err}", file=sys.stderr)
        return EXIT_ERROR
    except BudgetExhausted as err:
        print(f"lasat: {err}", file=sys.stderr)
        return EXIT_BUDGET
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
