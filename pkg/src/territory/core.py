"""Instance model, objective evaluation and feasibility checks shared by all solvers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Sequence

import numpy as np

from . import kernels

if TYPE_CHECKING:
    from .graphmodel import ModelGraph

# relative slack on activity caps so that float summation order never flips a verdict
BALANCE_RTOL = 1e-9


class InstanceError(ValueError):
    """Raised for structurally invalid instances or partitions."""


@dataclass(frozen=True)
class BasicArea:
    id: int
    x: float
    y: float
    activity: float

    def __post_init__(self):
        if not (self.activity >= 0 and math.isfinite(self.activity)):
            raise InstanceError(f"area {self.id}: activity must be finite and >= 0, got {self.activity}")


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Instance:
    """Basic areas with activities, a symmetric travel-time matrix and territory count.

    Build with :meth:`from_areas` or :meth:`from_arrays`; the constructor
    expects already-validated arrays.
    """

    coords: np.ndarray
    activity: np.ndarray
    travel: np.ndarray
    k: int
    epsilon: float = 0.05
    travel_source: str = "matrix"

    @classmethod
    def from_arrays(cls, x, y, activity, k: int, epsilon: float = 0.05,
                    travel=None) -> "Instance":
        coords = np.column_stack([np.asarray(x, dtype=float), np.asarray(y, dtype=float)])
        activity = np.array(activity, dtype=float)
        n = len(activity)
        if coords.shape != (n, 2):
            raise InstanceError("coordinate and activity arrays differ in length")
        if n == 0:
            raise InstanceError("instance has no basic areas")
        if not np.all(np.isfinite(coords)):
            raise InstanceError("coordinates must be finite")
        if np.any(~np.isfinite(activity)) or np.any(activity < 0):
            bad = int(np.flatnonzero(~(activity >= 0) | ~np.isfinite(activity))[0])
            raise InstanceError(f"area {bad}: activity must be finite and >= 0")
        k = int(k)
        if k < 1 or k > n:
            raise InstanceError(f"territory count k={k} must lie in 1..{n}")
        epsilon = float(epsilon)
        if not epsilon >= 0:
            raise InstanceError(f"epsilon must be >= 0, got {epsilon}")
        if travel is None:
            diff = coords[:, None, :] - coords[None, :, :]
            travel = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
            source = "euclidean"
        else:
            travel = np.array(travel, dtype=float)
            if travel.shape != (n, n):
                raise InstanceError(f"travel matrix must be {n}x{n}, got {travel.shape}")
            if not np.all(np.isfinite(travel)):
                raise InstanceError("travel matrix contains non-finite entries")
            if np.any(travel < 0):
                raise InstanceError("travel times must be nonnegative")
            if np.any(np.diag(travel) != 0):
                raise InstanceError("travel matrix must have a zero diagonal")
            if not np.array_equal(travel, travel.T):
                travel = (travel + travel.T) / 2.0
            source = "matrix"
        travel = np.ascontiguousarray(travel)
        return cls(_freeze(coords), _freeze(activity), _freeze(travel), k, epsilon, source)

    @classmethod
    def from_areas(cls, areas: Sequence[BasicArea], k: int, epsilon: float = 0.05,
                   travel=None) -> "Instance":
        ids = [a.id for a in areas]
        if sorted(ids) != list(range(len(areas))):
            raise InstanceError("area ids must be dense and unique (0..n-1)")
        ordered = sorted(areas, key=lambda a: a.id)
        return cls.from_arrays([a.x for a in ordered], [a.y for a in ordered],
                               [a.activity for a in ordered], k, epsilon, travel)

    @property
    def n(self) -> int:
        return len(self.activity)

    @cached_property
    def total_activity(self) -> float:
        return float(self.activity.sum())

    @property
    def areas(self) -> list[BasicArea]:
        return [BasicArea(i, float(x), float(y), float(a))
                for i, ((x, y), a) in enumerate(zip(self.coords, self.activity))]

    def with_k(self, k: int) -> "Instance":
        return Instance(self.coords, self.activity, self.travel, int(k), self.epsilon,
                        self.travel_source)

    def with_epsilon(self, epsilon: float) -> "Instance":
        return Instance(self.coords, self.activity, self.travel, self.k, float(epsilon),
                        self.travel_source)


@dataclass(frozen=True, eq=False)
class Partition:
    assignment: np.ndarray
    k: int

    def __post_init__(self):
        a = np.array(self.assignment, dtype=np.int64)
        if a.ndim != 1:
            raise InstanceError("assignment must be one-dimensional")
        if len(a) and (a.min() < 0 or a.max() >= self.k):
            raise InstanceError(f"assignment values must lie in 0..{self.k - 1}")
        object.__setattr__(self, "assignment", _freeze(a))

    def __eq__(self, other):
        return (isinstance(other, Partition) and self.k == other.k
                and np.array_equal(self.assignment, other.assignment))

    def __hash__(self):
        return hash((self.k, self.assignment.tobytes()))

    @property
    def n(self) -> int:
        return len(self.assignment)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.k)

    def loads(self, activity: np.ndarray) -> np.ndarray:
        return np.bincount(self.assignment, weights=activity, minlength=self.k)

    def blocks(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.assignment == t) for t in range(self.k)]

    def canonical(self) -> "Partition":
        """Relabel territories in order of first appearance."""
        _, first = np.unique(self.assignment, return_index=True)
        order = np.argsort(first)
        relabel = np.empty(self.k, dtype=np.int64)
        used = np.unique(self.assignment)[order]
        relabel[used] = np.arange(len(used))
        return Partition(relabel[self.assignment], self.k)


@dataclass(frozen=True)
class FeasibilityReport:
    balanced: bool
    contiguous: bool
    max_activity: float
    balance_bound: float
    components_per_territory: list[int] = field(default_factory=list)
    empty_territories: list[int] = field(default_factory=list)

    @property
    def nonempty(self) -> bool:
        return not self.empty_territories

    @property
    def feasible(self) -> bool:
        return self.balanced and self.contiguous and self.nonempty


def balance_bound(instance: Instance) -> float:
    """Per-territory activity cap ``(1 + eps) * ceil(a(B) / k)``."""
    return (1.0 + instance.epsilon) * math.ceil(instance.total_activity / instance.k)


def within(load, cap: float):
    """``load <= cap`` up to :data:`BALANCE_RTOL`; works on scalars and arrays."""
    return load <= cap + BALANCE_RTOL * max(abs(cap), 1.0)


def pairwise_cost(partition: Partition, instance: Instance) -> float:
    """Sum of travel times over unordered within-territory pairs."""
    if partition.n != instance.n:
        raise InstanceError(f"partition covers {partition.n} areas, instance has {instance.n}")
    return float(kernels.pairwise_cost(instance.travel, partition.assignment))


def count_components(partition: Partition, graph: "ModelGraph") -> list[int]:
    if graph.n != partition.n:
        raise InstanceError("graph and partition sizes differ")
    labels, ncomp = kernels.component_labels(graph.indptr, graph.indices, partition.assignment)
    comp_block = np.zeros(ncomp, dtype=np.int64)
    comp_block[labels] = partition.assignment
    return np.bincount(comp_block, minlength=partition.k).tolist()


def penalty_factor(n_con: int, k: int, alpha: float) -> float:
    return 1.0 + alpha * (n_con - k)


def fitness(partition: Partition, instance: Instance, graph: "ModelGraph",
            alpha: float = 0.1) -> float:
    """Pairwise cost scaled by the disconnection penalty ``1 + alpha*(n_con - k)``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    n_con = sum(count_components(partition, graph))
    return penalty_factor(n_con, partition.k, alpha) * pairwise_cost(partition, instance)


def check_feasibility(partition: Partition, instance: Instance,
                      graph: "ModelGraph | None" = None) -> FeasibilityReport:
    """Balance, contiguity and emptiness verdicts for ``partition``.

    Without a graph, contiguity is reported as ``True`` (not checked).
    """
    bound = balance_bound(instance)
    loads = partition.loads(instance.activity)
    max_load = float(loads.max()) if len(loads) else 0.0
    if graph is not None:
        comps = count_components(partition, graph)
    else:
        comps = [1 if s else 0 for s in partition.sizes().tolist()]
    empty = [t for t, s in enumerate(partition.sizes().tolist()) if s == 0]
    return FeasibilityReport(
        balanced=bool(within(max_load, bound)),
        contiguous=all(c == 1 for c in comps),
        max_activity=max_load,
        balance_bound=bound,
        components_per_territory=comps,
        empty_territories=empty,
    )
