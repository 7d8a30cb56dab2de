"""GeoJSON and CSV export of solved instances."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .core import Instance
from .formats import FormatError, Solution

CSV_COLUMNS = ("id", "x", "y", "activity", "territory")


def _check(instance: Instance, solution: Solution):
    if len(solution.assignment) != instance.n:
        raise FormatError(f"solution covers {len(solution.assignment)} areas, "
                          f"instance has {instance.n}")


def to_geojson(instance: Instance, solution: Solution) -> dict:
    _check(instance, solution)
    feats = []
    for i, ((x, y), a, t) in enumerate(zip(instance.coords.tolist(), instance.activity.tolist(),
                                           solution.assignment)):
        feats.append({"type": "Feature",
                      "geometry": {"type": "Point", "coordinates": [x, y]},
                      "properties": {"id": i, "activity": a, "territory": int(t)}})
    return {"type": "FeatureCollection", "features": feats}


def to_csv(instance: Instance, solution: Solution) -> str:
    _check(instance, solution)
    lines = [",".join(CSV_COLUMNS)]
    for i, ((x, y), a, t) in enumerate(zip(instance.coords.tolist(), instance.activity.tolist(),
                                           solution.assignment)):
        lines.append(f"{i},{x!r},{y!r},{a!r},{int(t)}")
    return "\n".join(lines) + "\n"


def export(instance: Instance, solution: Solution, path, fmt: str = "geojson") -> None:
    if fmt == "geojson":
        Path(path).write_text(json.dumps(to_geojson(instance, solution)) + "\n")
    elif fmt == "csv":
        Path(path).write_text(to_csv(instance, solution))
    else:
        raise ValueError(f"unknown export format {fmt!r}")


def read_assignment(path) -> np.ndarray:
    """Territory labels from an exported GeoJSON or CSV file, ordered by area id."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        feats = json.loads(text)["features"]
        pairs = [(f["properties"]["id"], f["properties"]["territory"]) for f in feats]
    else:
        with Path(path).open(newline="") as fh:
            pairs = [(int(r["id"]), int(r["territory"])) for r in csv.DictReader(fh)]
    pairs.sort()
    if [p[0] for p in pairs] != list(range(len(pairs))):
        raise FormatError("exported ids are not 0..n-1")
    return np.array([p[1] for p in pairs], dtype=np.int64)
