"""Kernel selection: compiled Cython loops when built, pure Python otherwise.

Set ``TERRITORY_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _pykernels as python_kernels

compiled_kernels = None
if os.environ.get("TERRITORY_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as compiled_kernels
    except ImportError:
        compiled_kernels = None

_impl = compiled_kernels if compiled_kernels is not None else python_kernels
BACKEND = "cython" if compiled_kernels is not None else "python"

kruskal_pass = _impl.kruskal_pass
degree_pass = _impl.degree_pass
component_labels = _impl.component_labels
connected_without = _impl.connected_without
pairwise_cost = _impl.pairwise_cost
local_search = _impl.local_search

__all__ = [
    "BACKEND",
    "compiled_kernels",
    "python_kernels",
    "kruskal_pass",
    "degree_pass",
    "component_labels",
    "connected_without",
    "pairwise_cost",
    "local_search",
]
