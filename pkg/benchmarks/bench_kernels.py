"""Time the compiled and pure-Python kernels on the same inputs.

    python3 benchmarks/bench_kernels.py --n 2000 --k 10 --repeat 3
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from territory import kernels
from territory.core import Instance
from territory.evo import _Ctx, _grow
from territory.generate import generate_instance
from territory.graphmodel import build_model


def _cases(inst: Instance, rng: np.random.Generator):
    g = build_model(inst)
    ctx = _Ctx(inst, g)
    assign = _grow(ctx, rng)
    n, k = inst.n, inst.k
    iu, iv = np.triu_indices(n, 1)
    length = inst.travel[iu, iv]
    order = np.argsort(length, kind="stable")
    eu = np.ascontiguousarray(iu[order], dtype=np.int64)
    ev = np.ascontiguousarray(iv[order], dtype=np.int64)
    mst, _ = kernels.python_kernels.kruskal_pass(n, eu, ev)
    deg0 = np.bincount(np.concatenate([eu[mst], ev[mst]]), minlength=n).astype(np.int64)
    cand = np.flatnonzero(~mst)
    cu, cv = np.ascontiguousarray(eu[cand]), np.ascontiguousarray(ev[cand])
    onehot = np.zeros((n, k))
    onehot[np.arange(n), assign] = 1.0
    sums = np.ascontiguousarray(inst.travel @ onehot)
    loads = np.bincount(assign, weights=ctx.w, minlength=k)
    sizes = np.bincount(assign, minlength=k).astype(np.int64)
    v = int(np.flatnonzero(assign == assign[0])[-1])

    return {
        "kruskal_pass": lambda m: m.kruskal_pass(n, eu, ev),
        "degree_pass": lambda m: m.degree_pass(cu, cv, deg0.copy(), g.gamma),
        "component_labels": lambda m: m.component_labels(g.indptr, g.indices, assign),
        "connected_without": lambda m: m.connected_without(g.indptr, g.indices, assign, v,
                                                           int(sizes[assign[v]])),
        "pairwise_cost": lambda m: m.pairwise_cost(inst.travel, assign),
        "local_search": lambda m: m.local_search(g.indptr, g.indices, inst.travel,
                                                 assign.copy(), ctx.w, loads.copy(),
                                                 sizes.copy(), sums.copy(), ctx.cap, 1_000_000),
    }


def _best_time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--k", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--only", default=None, help="comma-separated kernel names")
    args = ap.parse_args(argv)

    if kernels.compiled_kernels is None:
        print("compiled kernels unavailable (not built, or TERRITORY_PURE_PYTHON=1); "
              "timing the Python backend only")
    inst = generate_instance(args.n, args.k, seed=args.seed)
    cases = _cases(inst, np.random.default_rng(args.seed))
    names = args.only.split(",") if args.only else list(cases)

    print(f"n={args.n} k={args.k} best of {args.repeat}")
    print(f"{'kernel':<18} {'python [s]':>11} {'cython [s]':>11} {'speedup':>8}")
    for name in names:
        py = _best_time(lambda: cases[name](kernels.python_kernels), args.repeat)
        if kernels.compiled_kernels is None:
            print(f"{name:<18} {py:>11.4f} {'-':>11} {'-':>8}")
            continue
        cy = _best_time(lambda: cases[name](kernels.compiled_kernels), args.repeat)
        print(f"{name:<18} {py:>11.4f} {cy:>11.4f} {py / max(cy, 1e-9):>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
