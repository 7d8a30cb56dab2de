"""Benchmark harness: repeated seeded runs aggregated per (instance, solver)."""
from __future__ import annotations

import csv
import io
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .formats import load_instance
from .graphmodel import build_model
from .runner import run_solver

COLUMNS = ("instance", "solver", "reps", "avg", "min", "max", "feasible_rate", "seconds",
           "contiguous_rate", "errors")


@dataclass
class BenchRow:
    instance: str
    solver: str
    costs: list[float] = field(default_factory=list)
    feasible: list[bool] = field(default_factory=list)
    contiguous: list[bool] = field(default_factory=list)
    seconds: list[float] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def reps(self) -> int:
        return len(self.costs)

    def stat(self, name: str) -> float:
        if not self.costs:
            return float("nan")
        lo, hi = float(np.min(self.costs)), float(np.max(self.costs))
        # summation rounding can push the mean of equal costs just outside [min, max]
        return {"avg": min(max(float(np.mean(self.costs)), lo), hi), "min": lo, "max": hi}[name]

    def as_dict(self) -> dict:
        rate = (lambda xs: float(np.mean(xs)) if xs else float("nan"))
        return {"instance": self.instance, "solver": self.solver, "reps": self.reps,
                "avg": self.stat("avg"), "min": self.stat("min"), "max": self.stat("max"),
                "feasible_rate": rate(self.feasible), "seconds": rate(self.seconds),
                "contiguous_rate": rate(self.contiguous), "errors": len(self.errors)}


@dataclass
class BenchmarkReport:
    rows: list[BenchRow]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow(r.as_dict())
        return buf.getvalue()

    def to_table(self) -> str:
        head = ["instance", "solver", "reps", "avg", "min", "max", "feas", "contig", "sec", "err"]
        body = []
        for r in self.rows:
            d = r.as_dict()
            body.append([d["instance"], d["solver"], str(d["reps"]), f"{d['avg']:.1f}",
                         f"{d['min']:.1f}", f"{d['max']:.1f}", f"{d['feasible_rate']:.2f}",
                         f"{d['contiguous_rate']:.2f}", f"{d['seconds']:.2f}", str(d["errors"])])
        widths = [max(len(x) for x in col) for col in zip(head, *body)]
        fmt = lambda cells: "  ".join(c.rjust(w) if i > 1 else c.ljust(w)
                                      for i, (c, w) in enumerate(zip(cells, widths)))
        lines = [fmt(head), "  ".join("-" * w for w in widths)]
        lines += [fmt(b) for b in body]
        return "\n".join(lines) + "\n"


def _cell(args):
    path, algo, seed, kw = args
    try:
        inst = load_instance(path)
        graph = build_model(inst, kw.get("beta", 5.0), kw.get("gamma", 20))
        sol = run_solver(inst, algo, seed=seed, graph=graph, **kw)
        return path, algo, seed, sol.objective, sol.feasible, sol.contiguous, sol.wall_seconds, None
    except Exception as exc:  # recorded per cell; the run continues
        msg = f"{type(exc).__name__}: {exc}"
        return path, algo, seed, None, None, None, None, msg + "\n" + traceback.format_exc(limit=3)


def run_bench(instances, solvers=("kated", "kalocalloc", "bkns"), repetitions: int = 40,
              time_limit: float = 300.0, seed: int = 0, jobs: int = 1, **solver_kw) -> BenchmarkReport:
    """Stochastic solvers run ``repetitions`` times with seeds ``seed..seed+reps-1``; BKNS once."""
    instances = [str(p) for p in instances]
    if not instances:
        raise ValueError("need at least one instance")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    kw = dict(solver_kw, time_limit=time_limit)
    cells = []
    for path in instances:
        for algo in solvers:
            reps = 1 if algo == "bkns" else repetitions
            cells += [(path, algo, seed + r, kw) for r in range(reps)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_cell, cells))
    else:
        results = [_cell(c) for c in cells]

    rows = {(p, a): BenchRow(Path(p).stem, a) for p in instances for a in solvers}
    for path, algo, s, cost, feas, contig, sec, err in results:
        row = rows[(path, algo)]
        if err is not None:
            row.errors.append(f"seed {s}: {err}")
            continue
        row.costs.append(cost)
        row.feasible.append(feas)
        row.contiguous.append(contig)
        row.seconds.append(sec)
    return BenchmarkReport(list(rows.values()))
