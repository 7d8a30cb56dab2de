"""JSON instance and solution files."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import Instance, InstanceError

DEFAULT_EPSILON = 0.05


class FormatError(ValueError):
    pass


def _load_json(path):
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        lines = text.splitlines()
        context = lines[exc.lineno - 1] if 0 < exc.lineno <= len(lines) else ""
        raise FormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}\n  {context[:120]}") from exc


def instance_from_dict(doc: dict) -> Instance:
    try:
        areas = doc["areas"]
        k = int(doc["k"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"instance document needs 'areas' and integer 'k': {exc}") from exc
    try:
        ids = [int(a["id"]) for a in areas]
        if sorted(ids) != list(range(len(ids))):
            raise FormatError("area ids must be dense and unique (0..n-1)")
        order = np.argsort(ids)
        x = [float(areas[i]["x"]) for i in order]
        y = [float(areas[i]["y"]) for i in order]
        act = [float(areas[i]["activity"]) for i in order]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed area record: {exc}") from exc
    travel = doc.get("travel")
    if travel is not None:
        n = len(areas)
        travel = np.asarray(travel, dtype=float)
        if travel.ndim == 1:
            if travel.size != n * n:
                raise FormatError(f"travel must hold {n * n} entries, got {travel.size}")
            travel = travel.reshape(n, n)
    try:
        return Instance.from_arrays(x, y, act, k, float(doc.get("epsilon", DEFAULT_EPSILON)), travel)
    except InstanceError as exc:
        raise FormatError(str(exc)) from exc


def instance_to_dict(instance: Instance, include_travel: bool | None = None) -> dict:
    doc = {
        "areas": [{"id": i, "x": float(x), "y": float(y), "activity": float(a)}
                  for i, ((x, y), a) in enumerate(zip(instance.coords, instance.activity))],
        "k": instance.k,
        "epsilon": instance.epsilon,
    }
    if include_travel is None:
        include_travel = instance.travel_source != "euclidean"
    if include_travel:
        doc["travel"] = instance.travel.tolist()
    return doc


def load_instance(path) -> Instance:
    return instance_from_dict(_load_json(path))


def save_instance(instance: Instance, path, include_travel: bool | None = None) -> None:
    write_json(instance_to_dict(instance, include_travel), path)


def write_json(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc) + "\n")


@dataclass
class Solution:
    assignment: list[int]
    objective: float
    fitness: float
    feasible: bool
    solver: str
    seed: int
    wall_seconds: float | None
    contiguous: bool = False
    k: int = 0
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "assignment": [int(a) for a in self.assignment],
            "objective": self.objective,
            "fitness": self.fitness,
            "feasible": self.feasible,
            "solver": self.solver,
            "seed": self.seed,
            "wall_seconds": self.wall_seconds,
            "contiguous": self.contiguous,
            "k": self.k,
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Solution":
        try:
            return cls(
                assignment=[int(a) for a in doc["assignment"]],
                objective=float(doc["objective"]),
                fitness=float(doc["fitness"]),
                feasible=bool(doc["feasible"]),
                solver=str(doc["solver"]),
                seed=int(doc["seed"]),
                wall_seconds=None if doc.get("wall_seconds") is None else float(doc["wall_seconds"]),
                contiguous=bool(doc.get("contiguous", False)),
                k=int(doc.get("k", max(doc["assignment"], default=-1) + 1)),
                metadata=dict(doc.get("metadata", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed solution document: {exc}") from exc


def save_solution(solution: Solution, path) -> None:
    write_json(solution.to_dict(), path)


def load_solution(path) -> Solution:
    return Solution.from_dict(_load_json(path))
