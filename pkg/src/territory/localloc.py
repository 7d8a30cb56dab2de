"""KaLocAlloc: multi-start location-allocation with an exact allocation step.

Location picks territory centers among the basic areas (k-means++ seeding,
then discrete centers of gravity). Allocation solves the capacitated
assignment integer program

    min  sum_ij d(i, c_j)^2 * a_i * x_ij
    s.t. sum_j x_ij = 1,   sum_i a_i x_ij <= (1 + eps) * a(B) / k,   x binary

by best-first branch and bound. Node bounds come from the Lagrangian
relaxation of the capacity rows; with zero multipliers this is the plain
"cheapest center per area" relaxation. Root multipliers are the capacity
duals of the LP relaxation; nodes refine them by a short subgradient run.
"""
from __future__ import annotations

import heapq
import logging
import multiprocessing as mp
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .core import BALANCE_RTOL, Instance, Partition, pairwise_cost

log = logging.getLogger(__name__)

OPTIMAL = "optimal_within_gap"
TIME_LIMITED = "time_limited"
INFEASIBLE = "infeasible"


class SeedingError(ValueError):
    pass


@dataclass(frozen=True)
class CenterSet:
    centers: tuple[int, ...]

    def __post_init__(self):
        c = tuple(int(x) for x in self.centers)
        if len(set(c)) != len(c):
            raise ValueError(f"duplicate centers in {c}")
        if any(x < 0 for x in c):
            raise ValueError("center ids must be nonnegative")
        object.__setattr__(self, "centers", c)

    def __len__(self):
        return len(self.centers)

    def __iter__(self):
        return iter(self.centers)

    def key(self) -> frozenset:
        return frozenset(self.centers)


@dataclass(frozen=True)
class AllocationResult:
    assignment: Partition | None
    compactness: float
    lower_bound: float
    gap: float
    status: str
    nodes: int = 0


@dataclass
class LocAllocConfig:
    epsilon: float | None = None
    gap_target: float = 0.001
    allocation_time_limit: float = 15.0
    total_time_limit: float = 300.0
    seed: int = 0
    max_starts: int | None = None
    max_inner: int = 50
    workers: int = 1
    node_limit: int | None = None  # work budget per allocation; replaces the wall clock

    def __post_init__(self):
        if self.gap_target < 0:
            raise ValueError("gap_target must be >= 0")
        if not (self.allocation_time_limit > 0 and self.total_time_limit > 0):
            raise ValueError("time limits must be positive")
        if self.epsilon is not None and self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.node_limit is not None and self.node_limit < 1:
            raise ValueError("node_limit must be >= 1")


@dataclass
class LocAllocStats:
    starts_completed: int = 0
    inner_iterations: list[int] = field(default_factory=list)
    gaps: list[float] = field(default_factory=list)
    start_costs: list[float] = field(default_factory=list)
    best_costs: list[float] = field(default_factory=list)
    best_effort: bool = False


# ------------------------------------------------------------------ location

def kmeanspp_seed(instance: Instance, k: int, rng: np.random.Generator,
                  first: int | None = None) -> CenterSet:
    """First center uniform (or ``first``); each next one with probability proportional to D^2."""
    n = instance.n
    if k > n:
        raise SeedingError(f"cannot pick {k} centers among {n} areas")
    first = int(rng.integers(n)) if first is None else int(first)
    chosen = [first]
    dist = instance.travel[first].copy()
    while len(chosen) < k:
        weight = dist * dist
        positive = int(np.count_nonzero(weight > 0))
        if positive < k - len(chosen):
            raise SeedingError(
                f"only {positive} areas at positive distance from the {len(chosen)} chosen "
                f"centers, {k - len(chosen)} more needed (coincident areas?)")
        cum = np.cumsum(weight)
        r = rng.random() * cum[-1]
        nxt = int(np.searchsorted(cum, r, side="right"))
        nxt = min(nxt, n - 1)
        while weight[nxt] == 0:  # r landed on a flat stretch of the cumulative sum
            nxt -= 1
        chosen.append(nxt)
        np.minimum(dist, instance.travel[nxt], out=dist)
    return CenterSet(tuple(chosen))


def update_centers(instance: Instance, partition: Partition) -> CenterSet:
    """Per territory, the member minimising the activity-weighted squared distance to all members."""
    centers = []
    for t, members in enumerate(partition.blocks()):
        if len(members) == 0:
            raise ValueError(f"territory {t} is empty")
        d2 = instance.travel[np.ix_(members, members)] ** 2
        cost = instance.activity[members] @ d2
        centers.append(int(members[np.argmin(cost)]))
    return CenterSet(tuple(centers))


# ---------------------------------------------------------------- allocation

class _Allocator:
    def __init__(self, instance: Instance, centers: CenterSet, epsilon: float):
        self.n = instance.n
        self.k = len(centers)
        self.a = instance.activity
        c = np.array(centers.centers, dtype=np.int64)
        if c.max() >= self.n:
            raise ValueError("center id out of range")
        self.cost = instance.travel[:, c] ** 2 * self.a[:, None]
        self.cap = (1.0 + epsilon) * instance.total_activity / self.k
        self.capt = self.cap + BALANCE_RTOL * max(abs(self.cap), 1.0)
        self.root_fixed = np.full(self.n, -1, dtype=np.int64)
        self.root_fixed[c] = np.arange(self.k)
        self.lam = np.zeros(self.k)

    def true_cost(self, assign: np.ndarray) -> float:
        return float(self.cost[np.arange(self.n), assign].sum())

    def loads(self, assign: np.ndarray) -> np.ndarray:
        return np.bincount(assign, weights=self.a, minlength=self.k)

    def feasible(self, assign: np.ndarray) -> bool:
        return bool((self.loads(assign) <= self.capt).all())

    # -- bounds
    def evaluate(self, fixed: np.ndarray, lam: np.ndarray):
        """Lagrangian bound at a node; returns (bound, argmin assignment, regret info) or None."""
        free = fixed < 0
        fl = np.bincount(fixed[~free], weights=self.a[~free], minlength=self.k)
        if (fl > self.capt).any():
            return None
        rem = self.capt - fl
        red = self.cost + lam[None, :] * self.a[:, None]
        fi = np.flatnonzero(free)
        redf = red[fi]
        allowed = self.a[fi, None] <= rem[None, :]
        redf = np.where(allowed, redf, np.inf)
        best = redf.min(axis=1) if len(fi) else np.zeros(0)
        if np.isinf(best).any():
            return None
        assign = fixed.copy()
        assign[fi] = redf.argmin(axis=1)
        fx = np.flatnonzero(~free)
        bound = float(red[fx, fixed[fx]].sum() + best.sum() - lam @ np.full(self.k, self.capt))
        return bound, assign, fi, redf

    def lp_root(self, fixed: np.ndarray):
        """LP relaxation by HiGHS: returns (multipliers, fractional x) or None if infeasible.

        With activities as flow this relaxation is a transportation problem, and
        its capacity duals are the optimal Lagrange multipliers.
        """
        n, k = self.n, self.k
        nk = n * k
        cols = np.arange(nk)
        eq = sp.csr_matrix((np.ones(nk), (np.repeat(np.arange(n), k), cols)), shape=(n, nk))
        ub_rows = sp.csr_matrix((np.repeat(self.a, k), (np.tile(np.arange(k), n), cols)),
                                shape=(k, nk))
        lo = np.zeros(nk)
        hi = np.ones(nk)
        f = np.flatnonzero(fixed >= 0)
        lo[f * k + fixed[f]] = 1.0
        hi.reshape(n, k)[f] = 0.0
        hi[f * k + fixed[f]] = 1.0
        res = linprog(self.cost.ravel(), A_ub=ub_rows, b_ub=np.full(k, self.capt), A_eq=eq,
                      b_eq=np.ones(n), bounds=np.column_stack([lo, hi]), method="highs")
        if res.status == 2:
            return None
        if res.status != 0:
            raise RuntimeError(f"LP relaxation failed: {res.message}")
        return np.maximum(0.0, -np.asarray(res.ineqlin.marginals)), res.x.reshape(n, k)

    def subgradient(self, fixed: np.ndarray, ub: float, iters: int = 300,
                    lam0: np.ndarray | None = None, theta: float = 2.0):
        """Polyak subgradient ascent on the multipliers; returns (lam, bound, evaluation)."""
        lam = np.zeros(self.k) if lam0 is None else lam0.copy()
        best_lam, best_bound, best_ev = lam.copy(), -np.inf, None
        stall = 0
        for _ in range(iters):
            ev = self.evaluate(fixed, lam)
            if ev is None:
                return None, np.inf, None
            bound, assign = ev[0], ev[1]
            if bound > best_bound + 1e-12 * max(1.0, abs(bound)):
                best_bound, best_lam, best_ev, stall = bound, lam.copy(), ev, 0
            else:
                stall += 1
                if stall >= 15:
                    theta *= 0.5
                    stall = 0
            g = self.loads(assign) - self.capt
            if (g <= 0).all() and abs(lam @ g) <= 1e-9 * max(1.0, abs(bound)):
                break  # complementary slackness: this assignment is optimal
            g = np.where((lam <= 0) & (g < 0), 0.0, g)
            norm = float(g @ g)
            if norm == 0 or theta < 1e-5:
                break
            target = ub if np.isfinite(ub) else best_bound + abs(best_bound) * 0.05 + 1.0
            if target - bound <= 1e-9 * max(1.0, abs(target)):
                break
            lam = np.maximum(0.0, lam + theta * (target - bound) / norm * g)
        return best_lam, best_bound, best_ev

    # -- primal heuristics
    def repair(self, assign: np.ndarray, fixed: np.ndarray,
               lam: np.ndarray | None = None) -> np.ndarray | None:
        """Move areas out of overloaded territories, cheapest (reduced) cost per unit first."""
        cost = self.cost if lam is None else self.cost + lam[None, :] * self.a[:, None]
        assign = assign.copy()
        loads = self.loads(assign)
        movable = fixed < 0
        for _ in range(4 * self.n + 10):
            over = loads > self.capt
            if not over.any():
                return assign
            rows = np.flatnonzero(movable & over[assign])
            if len(rows) == 0:
                return None
            room = (loads[None, :] + self.a[rows, None]) <= self.capt
            delta = cost[rows] - cost[rows, assign[rows]][:, None]
            delta = np.where(room, delta, np.inf)
            # cheapest increase per unit of activity relieved
            score = delta / np.maximum(self.a[rows], 1e-12)[:, None]
            flat = int(np.argmin(score))
            r, j = divmod(flat, self.k)
            if not np.isfinite(score[r, j]):
                return None
            i = rows[r]
            loads[assign[i]] -= self.a[i]
            loads[j] += self.a[i]
            assign[i] = j
        return assign if self.feasible(assign) else None

    def greedy(self, fixed: np.ndarray) -> np.ndarray | None:
        assign = fixed.copy()
        loads = np.bincount(fixed[fixed >= 0], weights=self.a[fixed >= 0], minlength=self.k)
        fi = np.flatnonzero(fixed < 0)
        srt = np.sort(self.cost[fi], axis=1)
        regret = srt[:, 1] - srt[:, 0] if self.k > 1 else np.zeros(len(fi))
        for i in fi[np.argsort(-regret, kind="stable")].tolist():
            for j in np.argsort(self.cost[i], kind="stable").tolist():
                if loads[j] + self.a[i] <= self.capt:
                    assign[i] = j
                    loads[j] += self.a[i]
                    break
            else:
                return None
        return assign

    def improve(self, assign: np.ndarray, fixed: np.ndarray, deadline: float) -> np.ndarray:
        """Shift and swap descent on the true cost, keeping capacities."""
        assign = assign.copy()
        loads = self.loads(assign)
        movable = fixed < 0
        rows = np.arange(self.n)
        a, capt = self.a, self.capt
        tol = 1e-12 * max(1.0, float(self.cost.max(initial=0.0)))
        for _ in range(200):
            if time.perf_counter() > deadline:
                break
            cur = self.cost[rows, assign]
            delta = self.cost - cur[:, None]
            ok = (loads[None, :] + a[:, None] <= capt) & movable[:, None]
            dm = np.where(ok, delta, 0.0)
            best = dm.argmin(axis=1)
            gain = dm[rows, best]
            cand = np.flatnonzero(gain < -tol)
            moved = 0
            for i in cand[np.argsort(gain[cand], kind="stable")].tolist():
                j = int(best[i])
                if loads[j] + a[i] <= capt:
                    loads[assign[i]] -= a[i]
                    loads[j] += a[i]
                    assign[i] = j
                    moved += 1
            if moved:
                continue
            if self.k < 2:
                break
            # swaps between territories that are close for some member
            alt = np.argsort(delta, axis=1, kind="stable")[:, 1:min(4, self.k)]
            pairs = set()
            for i in np.flatnonzero(movable).tolist():
                for j in alt[i].tolist():
                    pairs.add((min(assign[i], j), max(assign[i], j)))
            for j1, j2 in sorted(pairs):
                r1 = np.flatnonzero(movable & (assign == j1))
                r2 = np.flatnonzero(movable & (assign == j2))
                if len(r1) == 0 or len(r2) == 0:
                    continue
                g = (self.cost[r1, j2][:, None] + self.cost[r2, j1][None, :]
                     - self.cost[r1, j1][:, None] - self.cost[r2, j2][None, :])
                da = a[r2][None, :] - a[r1][:, None]
                fits = (loads[j1] + da <= capt) & (loads[j2] - da <= capt)
                g = np.where(fits, g, np.inf)
                x, y = divmod(int(np.argmin(g)), len(r2))
                if g[x, y] < -tol:
                    i1, i2 = r1[x], r2[y]
                    assign[i1], assign[i2] = j2, j1
                    loads[j1] += a[i2] - a[i1]
                    loads[j2] += a[i1] - a[i2]
                    moved += 1
            if not moved:
                break
        return assign


def _gap(ub: float, lb: float) -> float:
    if not np.isfinite(ub):
        return float("inf")
    if ub <= 0:
        return 0.0
    return max(0.0, (ub - lb) / ub)


def allocate(instance: Instance, centers: CenterSet | Sequence[int],
             config: LocAllocConfig | None = None,
             initial: np.ndarray | None = None) -> AllocationResult:
    """Optimal (within ``gap_target``) capacitated assignment of areas to ``centers``.

    Best-first branch and bound. Each node re-tunes the multipliers from its
    parent's, fixes variables by reduced cost and branches on one area over
    its remaining centers. Child keys are the parent's bound plus the reduced
    cost penalty, which are valid lower bounds; ties go to deeper nodes so the
    search dives for incumbents early.
    """
    config = config or LocAllocConfig()
    if not isinstance(centers, CenterSet):
        centers = CenterSet(tuple(centers))
    eps = instance.epsilon if config.epsilon is None else config.epsilon
    budgeted = config.node_limit is not None
    # a node budget makes the search independent of machine speed
    deadline = np.inf if budgeted else time.perf_counter() + config.allocation_time_limit
    al = _Allocator(instance, centers, eps)
    k = al.k
    root = al.root_fixed

    if (np.bincount(root[root >= 0], weights=al.a[root >= 0], minlength=k) > al.capt).any():
        return AllocationResult(None, float("inf"), float("inf"), float("inf"), INFEASIBLE)

    ub, incumbent = np.inf, None

    def offer(assign, polish=False):
        nonlocal ub, incumbent
        if assign is None or not al.feasible(assign):
            return
        c = al.true_cost(assign)
        if c < ub:
            ub, incumbent = c, assign.copy()
            if polish:
                offer(al.improve(assign, root, deadline if budgeted
                                 else min(deadline, time.perf_counter() + 1.0)))

    if initial is not None:
        initial = np.asarray(initial, dtype=np.int64)
        if initial.shape == (al.n,) and np.array_equal(initial[root >= 0], root[root >= 0]):
            offer(initial, polish=True)
    offer(al.greedy(root), polish=True)
    relax = al.lp_root(root)
    if relax is None:
        return AllocationResult(None, float("inf"), float("inf"), float("inf"), INFEASIBLE)
    lam, x = relax
    ev = al.evaluate(root, lam)
    if ev is None:
        return AllocationResult(None, float("inf"), float("inf"), float("inf"), INFEASIBLE)
    root_bound = ev[0]  # recomputed here, so solver tolerances cannot inflate it
    rounded = np.where(root >= 0, root, x.argmax(axis=1))
    offer(rounded, polish=True)
    offer(al.repair(rounded, root, lam), polish=True)
    offer(ev[1], polish=True)
    offer(al.repair(ev[1], root, lam), polish=True)
    offer(al.repair(ev[1], root), polish=True)

    tol = 1e-12
    heap: list = []
    counter = 0
    nodes = 0
    pruned_lb = np.inf

    def prunable(bound: float) -> bool:
        return bound >= ub * (1.0 - config.gap_target) - tol * max(1.0, abs(ub))

    def lower() -> float:
        return min(heap[0][0] if heap else np.inf, pruned_lb, ub)

    heapq.heappush(heap, (root_bound, 0, 0, (), lam))
    status = None
    while heap:
        if _gap(ub, lower()) <= config.gap_target:
            status = OPTIMAL
            break
        if (budgeted and nodes >= config.node_limit) or time.perf_counter() > deadline:
            status = TIME_LIMITED
            break
        key, negdepth, _, fixes, lam_parent = heapq.heappop(heap)
        if prunable(key):
            pruned_lb = min(pruned_lb, key)
            continue
        nodes += 1
        fixed = root.copy()
        for i, j in fixes:
            fixed[i] = j
        if fixes:
            lam_node, bound, ev = al.subgradient(fixed, ub, iters=30, lam0=lam_parent, theta=0.5)
            if ev is None:
                continue  # no completion fits the capacities
            bound = max(bound, key)
        else:
            lam_node, bound = lam, max(root_bound, key)
            ev = al.evaluate(fixed, lam)
        _, assign, fi, redf = ev
        offer(assign, polish=True)
        offer(al.repair(assign, fixed, lam_node), polish=True)
        if prunable(bound):
            pruned_lb = min(pruned_lb, bound)
            continue
        if len(fi) == 0:
            continue
        # reduced-cost fixing: forcing area fi[r] onto center j costs at least this much
        pen = redf - redf.min(axis=1, keepdims=True)
        allowed = ~prunable_mask(bound + pen, ub, config.gap_target, tol)
        nallowed = allowed.sum(axis=1)
        # completions outside ``allowed`` cost at least the current prune threshold
        cutoff = ub * (1.0 - config.gap_target) - tol * max(1.0, abs(ub))
        if (nallowed == 0).any():
            pruned_lb = min(pruned_lb, cutoff)
            continue
        amb = np.flatnonzero(nallowed >= 2)
        if len(amb) == 0:
            # every free area has a single admissible center
            leaf = fixed.copy()
            leaf[fi] = np.argmax(allowed, axis=1)
            offer(leaf, polish=True)
            leaf_cost = al.true_cost(leaf) if al.feasible(leaf) else np.inf
            pruned_lb = min(pruned_lb, max(bound, min(leaf_cost, cutoff)))
            continue
        over = al.loads(assign) > al.capt
        pool = amb[over[assign[fi[amb]]]] if over.any() else amb
        if len(pool) == 0:
            pool = amb
        pm = np.where(allowed[pool], pen[pool], np.inf)
        srt = np.sort(pm, axis=1)
        # nearest tie per unit of activity: the areas an LP would split
        r = int(pool[np.argmin(srt[:, 1] / np.maximum(al.a[fi[pool]], 1e-12))])
        i = int(fi[r])
        for j in np.flatnonzero(allowed[r]).tolist():
            counter += 1
            heapq.heappush(heap, (bound + float(pen[r, j]), negdepth - 1, counter,
                                  fixes + ((i, j),), lam_node))
    if status is None:
        status = OPTIMAL if incumbent is not None else INFEASIBLE

    if incumbent is None:
        st = INFEASIBLE if status == OPTIMAL else status
        return AllocationResult(None, float("inf"), float(lower()), float("inf"), st, nodes)
    lb = float(lower())
    return AllocationResult(Partition(incumbent, k), float(ub), float(lb), _gap(ub, lb),
                            status, nodes)


def prunable_mask(bounds: np.ndarray, ub: float, gap_target: float, tol: float) -> np.ndarray:
    return bounds >= ub * (1.0 - gap_target) - tol * max(1.0, abs(ub))


# -------------------------------------------------------------- multi-start

def _with_eps(instance: Instance, config: LocAllocConfig) -> Instance:
    if config.epsilon is None or config.epsilon == instance.epsilon:
        return instance
    return instance.with_epsilon(config.epsilon)


def _multistart(instance: Instance, config: LocAllocConfig, seed, deadline: float,
                on_log: Callable[[dict], None] | None, t0: float):
    rng = np.random.default_rng(seed)
    stats = LocAllocStats()
    best, best_cost = None, float("inf")
    start = 0
    while config.max_starts is None or start < config.max_starts:
        if time.perf_counter() >= deadline:
            break
        try:
            centers = kmeanspp_seed(instance, instance.k, rng)
        except SeedingError:
            log.warning("k-means++ seeding failed; stopping multi-start")
            break
        seen = {centers.key()}
        part, interrupted, inner = None, False, 0
        for inner in range(1, config.max_inner + 1):
            remaining = deadline - time.perf_counter()
            if remaining <= 0:
                interrupted = True
                break
            sub = LocAllocConfig(epsilon=config.epsilon, gap_target=config.gap_target,
                                 allocation_time_limit=min(config.allocation_time_limit, remaining),
                                 total_time_limit=config.total_time_limit,
                                 node_limit=config.node_limit)
            res = allocate(instance, centers, sub,
                           None if part is None else part.assignment)
            if res.assignment is None:
                break
            part = res.assignment
            stats.gaps.append(res.gap)
            if on_log is not None:
                on_log({"start_index": start, "inner_iteration": inner,
                        "compactness": res.compactness, "gap": res.gap,
                        "pairwise_cost": pairwise_cost(part, instance),
                        "wall_seconds": round(time.perf_counter() - t0, 6)})
            centers = update_centers(instance, part)
            if centers.key() in seen:
                break
            seen.add(centers.key())
        if part is None:
            start += 1
            continue
        cost = pairwise_cost(part, instance)
        if interrupted:
            # a balanced allocation from an unfinished start still counts
            if cost < best_cost:
                best, best_cost = part, cost
            break
        stats.starts_completed += 1
        stats.inner_iterations.append(inner)
        stats.start_costs.append(cost)
        if cost < best_cost:
            best, best_cost = part, cost
        stats.best_costs.append(best_cost)
        start += 1
    return best, best_cost, stats


def _worker(args):
    instance, config, seed, deadline_offset = args
    t0 = time.perf_counter()
    best, cost, stats = _multistart(instance, config, seed, t0 + deadline_offset, None, t0)
    return best.assignment if best is not None else None, cost, stats


def solve_kalocalloc(instance: Instance, config: LocAllocConfig | None = None,
                     on_log: Callable[[dict], None] | None = None
                     ) -> tuple[Partition | None, LocAllocStats]:
    """Multi-start location-allocation; keeps the start with the least pairwise travel cost."""
    config = config or LocAllocConfig()
    instance = _with_eps(instance, config)
    t0 = time.perf_counter()
    if instance.k == 1:
        p = Partition(np.zeros(instance.n, dtype=np.int64), 1)
        stats = LocAllocStats(starts_completed=1, inner_iterations=[0], gaps=[0.0])
        c = pairwise_cost(p, instance)
        stats.start_costs.append(c)
        stats.best_costs.append(c)
        return p, stats
    if config.workers <= 1:
        best, _, stats = _multistart(instance, config, config.seed,
                                     t0 + config.total_time_limit, on_log, t0)
        if best is None:
            stats.best_effort = True
        return best, stats

    seeds = np.random.SeedSequence(config.seed).spawn(config.workers)
    per_worker = config
    if config.max_starts is not None:
        per_worker = LocAllocConfig(**{**config.__dict__,
                                       "max_starts": -(-config.max_starts // config.workers)})
    jobs = [(instance, per_worker, int(s.generate_state(1)[0]), config.total_time_limit)
            for s in seeds]
    try:
        ctx = mp.get_context("fork")
    except ValueError:
        ctx = mp.get_context()
    with ctx.Pool(config.workers) as pool:
        results = pool.map(_worker, jobs)
    merged = LocAllocStats()
    best, best_cost = None, float("inf")
    for assign, cost, st in results:
        merged.starts_completed += st.starts_completed
        merged.inner_iterations += st.inner_iterations
        merged.gaps += st.gaps
        merged.start_costs += st.start_costs
        merged.best_effort |= st.best_effort
        if assign is not None and cost < best_cost:
            best, best_cost = Partition(assign, instance.k), cost
    running = float("inf")
    for c in merged.start_costs:
        running = min(running, c)
        merged.best_costs.append(running)
    if on_log is not None:
        on_log({"start_index": -1, "inner_iteration": 0, "compactness": float("nan"),
                "gap": float("nan"), "pairwise_cost": best_cost,
                "wall_seconds": round(time.perf_counter() - t0, 6)})
    if best is None:
        merged.best_effort = True
    return best, merged
