"""Territory design: balanced, compact partitions of basic areas."""
from .core import (BALANCE_RTOL, BasicArea, FeasibilityReport, Instance, InstanceError, Partition,
                   balance_bound, check_feasibility, count_components, fitness, pairwise_cost)
from .graphmodel import DisconnectedGraphError, ModelGraph, build_model, kruskal_mst
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BALANCE_RTOL", "BACKEND", "BasicArea", "DisconnectedGraphError", "FeasibilityReport",
    "Instance", "InstanceError", "ModelGraph", "Partition", "balance_bound", "build_model",
    "check_feasibility", "count_components", "fitness", "kruskal_mst", "pairwise_cost",
]
