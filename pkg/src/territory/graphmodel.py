"""Proximity graph over basic areas, built with two Kruskal passes.

Pass one inserts every edge of the minimum spanning tree of the complete
distance graph. Pass two rescans the remaining edges by increasing length
and inserts an edge when it is no longer than ``beta * omega_avg`` and both
endpoints currently have degree below ``gamma``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from . import kernels
from .core import Instance


class DisconnectedGraphError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ModelGraph:
    n: int
    node_weight: np.ndarray
    edge_u: np.ndarray
    edge_v: np.ndarray
    edge_length: np.ndarray
    mst_flags: np.ndarray
    omega_avg: float
    indptr: np.ndarray
    indices: np.ndarray
    beta: float = float("nan")
    gamma: int = 0

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], node_weight=None,
                   lengths=None, mst_flags=None, omega_avg: float = float("nan"),
                   beta: float = float("nan"), gamma: int = 0) -> "ModelGraph":
        """Wrap an explicit edge list; handy for tests and hand-built graphs."""
        e = np.array(list(edges), dtype=np.int64).reshape(-1, 2)
        u = np.minimum(e[:, 0], e[:, 1])
        v = np.maximum(e[:, 0], e[:, 1])
        if np.any(u == v):
            raise ValueError("self-loops are not allowed")
        if len(np.unique(u * n + v)) != len(u):
            raise ValueError("duplicate edges")
        m = len(u)
        lengths = np.ones(m) if lengths is None else np.asarray(lengths, dtype=float)
        flags = np.zeros(m, dtype=bool) if mst_flags is None else np.asarray(mst_flags, dtype=bool)
        weight = np.ones(n) if node_weight is None else np.asarray(node_weight, dtype=float)
        indptr, indices = _csr(n, u, v)
        return cls(n, weight, u, v, lengths, flags, float(omega_avg), indptr, indices,
                   float(beta), int(gamma))

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return list(zip(self.edge_u.tolist(), self.edge_v.tolist(), self.edge_length.tolist()))

    @property
    def m(self) -> int:
        return len(self.edge_u)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def is_connected(self) -> bool:
        labels, ncomp = kernels.component_labels(self.indptr, self.indices,
                                                 np.zeros(self.n, dtype=np.int64))
        return ncomp == 1


def _csr(n: int, u: np.ndarray, v: np.ndarray):
    src = np.concatenate([u, v])
    dst = np.concatenate([v, u])
    order = np.lexsort((dst, src))
    indices = np.ascontiguousarray(dst[order], dtype=np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return indptr, indices


def _unreached(n: int, u: np.ndarray, v: np.ndarray) -> list[int]:
    indptr, indices = _csr(n, u, v)
    labels, _ = kernels.component_labels(indptr, indices, np.zeros(n, dtype=np.int64))
    return np.flatnonzero(labels != labels[0]).tolist()


def kruskal_mst(n: int, weighted_edges) -> list[tuple[int, int, float]]:
    """Minimum spanning tree; ties broken by ``(length, min id, max id)``."""
    if n <= 1:
        return []
    e = list(weighted_edges)
    if not e:
        raise DisconnectedGraphError(f"no edges; nodes 1..{n - 1} unreached from node 0")
    arr = np.array([(min(a, b), max(a, b), w) for a, b, w in e], dtype=float)
    u = arr[:, 0].astype(np.int64)
    v = arr[:, 1].astype(np.int64)
    w = arr[:, 2]
    order = np.lexsort((v, u, w))
    u, v, w = u[order], v[order], w[order]
    mask, joined = kernels.kruskal_pass(n, np.ascontiguousarray(u), np.ascontiguousarray(v))
    if joined < n - 1:
        missing = _unreached(n, u, v)
        raise DisconnectedGraphError(f"graph is disconnected; nodes {missing} unreached from node 0")
    return list(zip(u[mask].tolist(), v[mask].tolist(), w[mask].tolist()))


def build_model(instance: Instance, beta: float = 5.0, gamma: int = 20) -> ModelGraph:
    n = instance.n
    if n < 2:
        raise ValueError("the model needs at least two basic areas")
    if not beta > 1:
        raise ValueError(f"beta must exceed 1, got {beta}")
    if int(gamma) != gamma or gamma <= 1:
        raise ValueError(f"gamma must be an integer > 1, got {gamma}")
    gamma = int(gamma)
    travel = instance.travel
    if not np.all(np.isfinite(travel)):
        raise ValueError("travel matrix contains non-finite distances")

    # triu_indices enumerates (u, v) lexicographically, so a stable sort by
    # length yields the (length, u, v) scan order
    iu, iv = np.triu_indices(n, 1)
    length = travel[iu, iv]
    order = np.argsort(length, kind="stable")
    eu = np.ascontiguousarray(iu[order], dtype=np.int64)
    ev = np.ascontiguousarray(iv[order], dtype=np.int64)
    length = length[order]
    del iu, iv, order

    mst_mask, joined = kernels.kruskal_pass(n, eu, ev)
    if joined < n - 1:  # only reachable with inf-free but degenerate inputs
        raise DisconnectedGraphError("distance graph is disconnected")
    omega_avg = float(length[mst_mask].mean())

    limit = beta * omega_avg
    cand = np.flatnonzero(~mst_mask & (length <= limit))
    deg = np.bincount(np.concatenate([eu[mst_mask], ev[mst_mask]]), minlength=n).astype(np.int64)
    extra = kernels.degree_pass(np.ascontiguousarray(eu[cand]), np.ascontiguousarray(ev[cand]),
                                deg, gamma)
    extra_idx = cand[extra]
    mst_idx = np.flatnonzero(mst_mask)
    sel = np.concatenate([mst_idx, extra_idx])
    u, v, w = eu[sel], ev[sel], length[sel]
    flags = np.zeros(len(sel), dtype=bool)
    flags[:len(mst_idx)] = True
    indptr, indices = _csr(n, u, v)
    for a in (u, v, w, flags, indptr, indices):
        a.setflags(write=False)
    weight = instance.activity
    return ModelGraph(n, weight, u, v, w, flags, omega_avg, indptr, indices,
                      float(beta), gamma)


def write_edgelist(graph: ModelGraph, path) -> None:
    """Debug export: one ``u v length mst_flag`` line per edge."""
    with Path(path).open("w") as fh:
        for u, v, w, f in zip(graph.edge_u.tolist(), graph.edge_v.tolist(),
                               graph.edge_length.tolist(), graph.mst_flags.tolist()):
            fh.write(f"{u} {v} {w!r} {int(f)}\n")


def read_edgelist(path, n: int, node_weight=None) -> ModelGraph:
    rows = [line.split() for line in Path(path).read_text().splitlines() if line.strip()]
    edges = [(int(r[0]), int(r[1])) for r in rows]
    lengths = [float(r[2]) for r in rows]
    flags = [r[3] == "1" for r in rows]
    mst_len = [l for l, f in zip(lengths, flags) if f]
    omega = float(np.mean(mst_len)) if mst_len else float("nan")
    return ModelGraph.from_edges(n, edges, node_weight, lengths, flags, omega)
