"""``territory`` command-line front end.

Exit codes: 0 success (for ``solve``: a feasible solution), 2 ``solve`` returned
a best-effort infeasible solution, 64 usage error, 65 malformed input file.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .bench import run_bench
from .core import InstanceError
from .export import export
from .formats import FormatError, load_instance, load_solution, save_instance, save_solution
from .generate import generate_instance
from .graphmodel import build_model, write_edgelist
from .runner import SOLVERS, run_solver

EXIT_OK, EXIT_BEST_EFFORT, EXIT_USAGE, EXIT_DATA = 0, 2, 64, 65

DEFAULTS = {"epsilon": 0.05, "alpha": 0.1, "beta": 5.0, "gamma": 20, "time_limit": 300.0,
            "workers": 4, "repetitions": 40}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would collide with the best-effort code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(kind):
    def conv(text):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return conv


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="territory", description="Balanced, compact territory design.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a synthetic clustered instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--clusters", type=int, default=8)
    g.add_argument("--spread", type=float, default=6.0)
    g.add_argument("--epsilon", type=float, default=DEFAULTS["epsilon"])
    g.add_argument("-o", "--output", required=True)

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("instance")
    s.add_argument("--algo", choices=SOLVERS, default="kated")
    s.add_argument("--time-limit", type=_positive(float), default=DEFAULTS["time_limit"])
    s.add_argument("--epsilon", type=float, default=None,
                   help="override the instance's epsilon (files without one use 0.05)")
    s.add_argument("--alpha", type=_positive(float), default=DEFAULTS["alpha"])
    s.add_argument("--beta", type=float, default=DEFAULTS["beta"])
    s.add_argument("--gamma", type=int, default=DEFAULTS["gamma"])
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=_positive(int), default=DEFAULTS["workers"])
    s.add_argument("--max-generations", type=_positive(int), default=None,
                   help="KaTeD: stop after this many offspring (deterministic budget)")
    s.add_argument("--max-starts", type=_positive(int), default=None,
                   help="KaLocAlloc: stop after this many starts (deterministic budget)")
    s.add_argument("--max-nodes", type=_positive(int), default=None,
                   help="KaLocAlloc: branch-and-bound nodes per allocation instead of its time "
                        "limit (default 200 with --reproducible)")
    s.add_argument("--reproducible", action="store_true",
                   help="force one worker and omit wall time so equal seeds give identical files")
    s.add_argument("-o", "--output", default="solution.json")
    s.add_argument("--log", default=None, help="JSON-lines run log (default: <output>.log.jsonl)")

    b = sub.add_parser("bench", help="repeat solvers over instances and aggregate")
    b.add_argument("instances", nargs="+")
    b.add_argument("--solvers", default=",".join(SOLVERS))
    b.add_argument("--repetitions", type=_positive(int), default=DEFAULTS["repetitions"])
    b.add_argument("--time-limit", type=_positive(float), default=DEFAULTS["time_limit"])
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--workers", type=_positive(int), default=1, help="workers per solver run")
    b.add_argument("--jobs", type=_positive(int), default=1, help="cells run concurrently")
    b.add_argument("--alpha", type=_positive(float), default=DEFAULTS["alpha"])
    b.add_argument("--beta", type=float, default=DEFAULTS["beta"])
    b.add_argument("--gamma", type=int, default=DEFAULTS["gamma"])
    b.add_argument("--csv", default=None)

    e = sub.add_parser("export", help="write GeoJSON or CSV for a solution")
    e.add_argument("solution")
    e.add_argument("instance")
    e.add_argument("--format", choices=("geojson", "csv"), default="geojson")
    e.add_argument("-o", "--output", required=True)

    m = sub.add_parser("model", help="write the model graph as an edge list")
    m.add_argument("instance")
    m.add_argument("--beta", type=float, default=DEFAULTS["beta"])
    m.add_argument("--gamma", type=int, default=DEFAULTS["gamma"])
    m.add_argument("-o", "--output", required=True)
    return p


def cmd_generate(args) -> int:
    if not (args.n >= args.k >= 2):
        raise UsageError(f"need n >= k >= 2, got n={args.n}, k={args.k}")
    if args.clusters < 1 or args.spread <= 0:
        raise UsageError("clusters must be >= 1 and spread > 0")
    inst = generate_instance(args.n, args.k, args.seed, args.clusters, args.spread, args.epsilon)
    save_instance(inst, args.output)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    if args.epsilon is not None:
        inst = inst.with_epsilon(args.epsilon)
    workers = 1 if args.reproducible else args.workers
    log_path = Path(args.log) if args.log else Path(str(args.output) + ".log.jsonl")
    try:
        graph = build_model(inst, args.beta, args.gamma)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    with log_path.open("w") as log:
        def on_log(entry):
            log.write(json.dumps(entry) + "\n")
        sol = run_solver(inst, args.algo, seed=args.seed, time_limit=args.time_limit,
                         alpha=args.alpha, beta=args.beta, gamma=args.gamma, workers=workers,
                         max_generations=args.max_generations, max_starts=args.max_starts,
                         max_nodes=args.max_nodes, graph=graph, reproducible=args.reproducible, on_log=on_log)
    save_solution(sol, args.output)
    status = "feasible" if sol.feasible else "best-effort (infeasible)"
    print(f"{args.algo}: pairwise cost {sol.objective:.6g}, fitness {sol.fitness:.6g}, "
          f"{status}, contiguous={sol.contiguous}", file=sys.stderr)
    return EXIT_OK if sol.feasible else EXIT_BEST_EFFORT


def cmd_bench(args) -> int:
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
    bad = [s for s in solvers if s not in SOLVERS]
    if bad or not solvers:
        raise UsageError(f"unknown solver(s): {', '.join(bad) or '(none given)'}")
    for path in args.instances:
        load_instance(path)  # fail early on malformed files
    report = run_bench(args.instances, solvers, args.repetitions, args.time_limit, args.seed,
                       args.jobs, workers=args.workers, alpha=args.alpha, beta=args.beta,
                       gamma=args.gamma)
    if args.csv:
        Path(args.csv).write_text(report.to_csv())
    sys.stdout.write(report.to_table())
    for row in report.rows:
        for err in row.errors:
            print(f"[{row.instance}/{row.solver}] {err.splitlines()[0]}", file=sys.stderr)
    return EXIT_OK


def cmd_export(args) -> int:
    inst = load_instance(args.instance)
    sol = load_solution(args.solution)
    export(inst, sol, args.output, args.format)
    return EXIT_OK


def cmd_model(args) -> int:
    inst = load_instance(args.instance)
    try:
        graph = build_model(inst, args.beta, args.gamma)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    write_edgelist(graph, args.output)
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "solve": cmd_solve, "bench": cmd_bench,
            "export": cmd_export, "model": cmd_model}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"territory {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, InstanceError) as exc:
        print(f"territory {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"territory {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
