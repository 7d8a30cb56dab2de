"""Compiled and pure-Python kernels must agree bit for bit."""
import numpy as np
import pytest

from territory import kernels
from territory.kernels import python_kernels as py

from conftest import random_graph, ref_components, edge_pairs

cy = kernels.compiled_kernels
needs_cy = pytest.mark.skipif(cy is None, reason="compiled kernels not built")


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")
    assert (kernels.BACKEND == "cython") == (cy is not None)


def _edges(rng, n, m):
    iu, iv = np.triu_indices(n, 1)
    sel = rng.choice(len(iu), size=min(m, len(iu)), replace=False)
    w = rng.integers(0, 5, size=len(sel)).astype(float)  # many ties
    order = np.lexsort((iv[sel], iu[sel], w))
    return (np.ascontiguousarray(iu[sel][order], dtype=np.int64),
            np.ascontiguousarray(iv[sel][order], dtype=np.int64))


@needs_cy
@pytest.mark.parametrize("seed", range(10))
def test_kruskal_and_degree_parity(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 40))
    eu, ev = _edges(rng, n, 3 * n)
    m1, j1 = py.kruskal_pass(n, eu, ev)
    m2, j2 = cy.kruskal_pass(n, eu, ev)
    assert j1 == j2 and np.array_equal(m1, m2)
    deg = rng.integers(0, 4, size=n).astype(np.int64)
    d1, d2 = deg.copy(), deg.copy()
    assert np.array_equal(py.degree_pass(eu, ev, d1, 3), cy.degree_pass(eu, ev, d2, 3))
    assert np.array_equal(d1, d2)


@needs_cy
@pytest.mark.parametrize("seed", range(10))
def test_components_and_connectivity_parity(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(2, 60))
    k = int(rng.integers(1, 5))
    g = random_graph(rng, n, extra=n // 3)
    a = rng.integers(0, k, size=n).astype(np.int64)
    l1, c1 = py.component_labels(g.indptr, g.indices, a)
    l2, c2 = cy.component_labels(g.indptr, g.indices, a)
    assert c1 == c2 and np.array_equal(l1, l2)
    assert c1 == sum(ref_components(n, edge_pairs(g), a.tolist(), k))
    sizes = np.bincount(a, minlength=k)
    for v in range(n):
        s = int(sizes[a[v]])
        assert (py.connected_without(g.indptr, g.indices, a, v, s)
                == cy.connected_without(g.indptr, g.indices, a, v, s))


@needs_cy
@pytest.mark.parametrize("seed", range(5))
def test_pairwise_parity(seed):
    rng = np.random.default_rng(200 + seed)
    n = 50
    t = rng.uniform(0, 10, size=(n, n))
    t = np.ascontiguousarray((t + t.T) / 2)
    np.fill_diagonal(t, 0)
    a = rng.integers(0, 4, size=n).astype(np.int64)
    assert py.pairwise_cost(t, a) == cy.pairwise_cost(t, a)


@needs_cy
@pytest.mark.parametrize("seed", range(8))
def test_local_search_parity(seed):
    rng = np.random.default_rng(300 + seed)
    n, k = 40, 3
    g = random_graph(rng, n, extra=n)
    xy = rng.uniform(0, 10, size=(n, 2))
    t = np.ascontiguousarray(np.hypot(*(xy[:, None, :] - xy[None, :, :]).transpose(2, 0, 1)))
    w = rng.uniform(1, 3, size=n)
    a0 = rng.integers(0, k, size=n).astype(np.int64)
    cap = 1.2 * w.sum() / k
    out = []
    for mod in (py, cy):
        a = a0.copy()
        onehot = np.eye(k)[a]
        sums = np.ascontiguousarray(t @ onehot)
        loads = np.bincount(a, weights=w, minlength=k)
        sizes = np.bincount(a, minlength=k).astype(np.int64)
        moves = mod.local_search(g.indptr, g.indices, t, a, w, loads, sizes, sums, cap, 1000)
        out.append((moves, a, loads, sizes, sums))
    (m1, a1, l1, s1, u1), (m2, a2, l2, s2, u2) = out
    assert m1 == m2
    assert np.array_equal(a1, a2) and np.array_equal(s1, s2)
    assert np.array_equal(l1, l2) and np.array_equal(u1, u2)


def test_benchmark_script_runs(capsys):
    import runpy
    import sys
    from pathlib import Path
    script = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    argv = sys.argv
    sys.argv = [str(script), "--n", "60", "--k", "3", "--repeat", "1"]
    try:
        with pytest.raises(SystemExit) as exc:
            runpy.run_path(str(script), run_name="__main__")
    finally:
        sys.argv = argv
    assert exc.value.code == 0
    out = capsys.readouterr().out
    assert "local_search" in out and "kruskal_pass" in out
