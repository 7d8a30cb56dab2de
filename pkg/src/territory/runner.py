"""Run one solver on one instance and package the result as a :class:`Solution`."""
from __future__ import annotations

import time
from typing import Callable

import numpy as np

from . import kernels
from .baseline import solve_bkns
from .core import Instance, Partition, check_feasibility, fitness, pairwise_cost
from .evo import EvoConfig, solve_kated
from .formats import Solution
from .graphmodel import ModelGraph, build_model
from .localloc import LocAllocConfig, solve_kalocalloc

SOLVERS = ("kated", "kalocalloc", "bkns")
# branch-and-bound nodes per allocation when a run must not depend on the clock
REPRODUCIBLE_NODE_LIMIT = 200


def run_solver(instance: Instance, algo: str, *, seed: int = 0, time_limit: float = 300.0,
               alpha: float = 0.1, beta: float = 5.0, gamma: int = 20, workers: int = 1,
               max_generations: int | None = None, max_starts: int | None = None,
               max_nodes: int | None = None,
               graph: ModelGraph | None = None, reproducible: bool = False,
               on_log: Callable[[dict], None] | None = None) -> Solution:
    """Solve ``instance`` with ``algo``; every solver is scored on the same model graph."""
    if algo not in SOLVERS:
        raise ValueError(f"unknown solver {algo!r}; choose from {', '.join(SOLVERS)}")
    if graph is None:
        graph = build_model(instance, beta, gamma)
    t0 = time.perf_counter()
    stats: dict = {}
    best_effort = False
    if algo == "kated":
        cfg = EvoConfig(alpha=alpha, time_limit=time_limit, seed=seed, workers=workers,
                        max_generations=max_generations)
        ind, st = solve_kated(instance, graph, cfg, on_log)
        part = ind.partition
        best_effort = st.best_effort
        stats = {"generations": st.generations, "initial_population": st.initial_population,
                 "accepted_offspring": st.accepted_offspring, "population_size": cfg.population_size}
    elif algo == "kalocalloc":
        cfg = LocAllocConfig(total_time_limit=time_limit, seed=seed, workers=workers,
                             max_starts=max_starts,
                             node_limit=max_nodes if max_nodes is not None or not reproducible
                             else REPRODUCIBLE_NODE_LIMIT,
                             allocation_time_limit=min(15.0, time_limit / 20))
        part, st = solve_kalocalloc(instance, cfg, on_log)
        best_effort = st.best_effort
        stats = {"starts_completed": st.starts_completed,
                 "max_gap": max(st.gaps) if st.gaps else None}
        if part is None:
            # no start produced an allocation: fall back to a labelled placeholder
            part = Partition(np.arange(instance.n) % instance.k, instance.k)
            best_effort = True
    else:
        part = solve_bkns(instance)
    elapsed = time.perf_counter() - t0

    report = check_feasibility(part, instance, graph)
    feasible = report.balanced and report.nonempty and not best_effort
    return Solution(
        assignment=part.assignment.tolist(),
        objective=pairwise_cost(part, instance),
        fitness=fitness(part, instance, graph, alpha),
        feasible=bool(feasible),
        solver=algo,
        seed=int(seed),
        wall_seconds=None if reproducible else round(elapsed, 6),
        contiguous=report.contiguous,
        k=instance.k,
        metadata={
            "n": instance.n,
            "epsilon": instance.epsilon,
            "travel_source": instance.travel_source,
            "balance_bound": report.balance_bound,
            "max_activity": report.max_activity,
            "components": sum(report.components_per_territory),
            "alpha": alpha, "beta": beta, "gamma": int(gamma),
            "workers": workers,
            "backend": kernels.BACKEND,
            "stats": stats,
        },
    )
