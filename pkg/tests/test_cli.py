import csv
import io
import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from territory import cli
from territory.bench import COLUMNS, run_bench
from territory.core import Instance, check_feasibility
from territory.export import read_assignment
from territory.formats import (FormatError, Solution, load_instance, load_solution,
                               save_instance)
from territory.generate import generate_instance
from territory.graphmodel import build_model, read_edgelist


@pytest.fixture
def inst_path(tmp_path):
    p = tmp_path / "inst.json"
    assert cli.main(["generate", "--n", "60", "--k", "3", "--seed", "4", "-o", str(p)]) == 0
    return p


# ---- generate ----------------------------------------------------------------------

def test_generate_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert cli.main(["generate", "--n", "300", "--k", "5", "--seed", "7", "-o", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    inst = load_instance(a)
    assert inst.n == 300 and inst.k == 5 and inst.epsilon == 0.05
    assert inst.travel_source == "euclidean"
    assert 1.0 <= inst.activity.min() and inst.activity.max() <= 100.0


def test_generate_seeds_differ(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    cli.main(["generate", "--n", "50", "--k", "2", "--seed", "1", "-o", str(a)])
    cli.main(["generate", "--n", "50", "--k", "2", "--seed", "2", "-o", str(b)])
    assert a.read_bytes() != b.read_bytes()


def test_generated_activity_spans_range():
    inst = generate_instance(5000, 45, seed=0)
    act = inst.activity
    assert act.min() >= 1.0 and act.max() <= 100.0
    # log-uniform: about half the mass of log(a) below log(10)
    assert 0.45 < np.mean(act < 10.0) < 0.55


@pytest.mark.parametrize("n,k", [(1, 1), (5, 1), (3, 4)])
def test_generate_rejects_bad_sizes(tmp_path, n, k):
    code = cli.main(["generate", "--n", str(n), "--k", str(k), "-o", str(tmp_path / "x.json")])
    assert code == cli.EXIT_USAGE


# ---- solve --------------------------------------------------------------------------------

def test_solve_and_bench_defaults():
    args = cli.build_parser().parse_args(["solve", "x.json"])
    assert (args.alpha, args.beta, args.gamma, args.time_limit, args.workers) == (
        0.1, 5.0, 20, 300.0, 4)
    assert cli.DEFAULTS["epsilon"] == 0.05
    assert cli.build_parser().parse_args(["generate", "--n", "9", "--k", "2", "-o", "x"]).epsilon == 0.05
    assert cli.build_parser().parse_args(["bench", "x.json"]).repetitions == 40


@pytest.mark.parametrize("algo", ["kated", "kalocalloc", "bkns"])
def test_solve_writes_valid_solution(tmp_path, inst_path, algo):
    out = tmp_path / f"{algo}.json"
    code = cli.main(["solve", str(inst_path), "--algo", algo, "--time-limit", "2",
                     "--workers", "1", "-o", str(out)])
    sol = load_solution(out)
    assert code == (0 if sol.feasible else 2)
    assert sol.solver == algo and len(sol.assignment) == 60
    inst = load_instance(inst_path)
    from territory.core import Partition
    rep = check_feasibility(Partition(sol.assignment, 3), inst, build_model(inst))
    assert rep.balanced == (sol.metadata["max_activity"] <= sol.metadata["balance_bound"] * (1 + 1e-9))
    doc = json.loads(out.read_text())
    assert {"assignment", "objective", "fitness", "feasible", "solver", "seed",
            "wall_seconds"} <= set(doc)
    log = (tmp_path / f"{algo}.json.log.jsonl").read_text().splitlines()
    if algo != "bkns":
        assert log and all(json.loads(line) for line in log)


def test_solve_bkns_deterministic(tmp_path, inst_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"b{i}.json"
        cli.main(["solve", str(inst_path), "--algo", "bkns", "--reproducible", "-o", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_solve_epsilon_override(tmp_path, inst_path):
    out = tmp_path / "s.json"
    cli.main(["solve", str(inst_path), "--algo", "bkns", "--epsilon", "0.5", "-o", str(out)])
    assert load_solution(out).metadata["epsilon"] == 0.5


def test_exit_code_two_on_best_effort(tmp_path):
    # eps = 0 and one dominant area: no balanced partition exists
    inst = Instance.from_arrays([0, 1, 2, 3], [0, 0, 0, 0], [10.0, 1.0, 1.0, 1.0], 2, 0.0)
    p = tmp_path / "hard.json"
    save_instance(inst, p)
    code = cli.main(["solve", str(p), "--algo", "bkns", "-o", str(tmp_path / "s.json")])
    assert code == cli.EXIT_BEST_EFFORT
    assert load_solution(tmp_path / "s.json").feasible is False


def test_usage_errors(tmp_path, inst_path, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["solve", str(inst_path), "--algo", "gurobi"])
    assert exc.value.code == cli.EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        cli.main(["solve", str(inst_path), "--time-limit", "-1"])
    assert exc.value.code == cli.EXIT_USAGE
    assert cli.main(["solve", str(tmp_path / "missing.json")]) == cli.EXIT_USAGE
    assert cli.main(["solve", str(inst_path), "--beta", "0.5", "-o",
                     str(tmp_path / "s.json")]) == cli.EXIT_USAGE


def test_malformed_file_reports_line(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"areas": [\n  {"id": 0, "x": 1, "y": 2, "activity": 3},\n  oops\n], "k": 2}\n')
    assert cli.main(["solve", str(bad)]) == cli.EXIT_DATA
    err = capsys.readouterr().err
    assert "bad.json:3:" in err and "oops" in err


@pytest.mark.parametrize("doc,msg", [
    ({"areas": [{"id": 0, "x": 0, "y": 0, "activity": 1}]}, "k"),
    ({"areas": [{"id": 0, "x": 0, "y": 0, "activity": 1},
                {"id": 2, "x": 1, "y": 0, "activity": 1}], "k": 2}, "dense"),
    ({"areas": [{"id": 0, "x": 0, "y": 0}], "k": 1}, "area"),
    ({"areas": [{"id": 0, "x": 0, "y": 0, "activity": 1},
                {"id": 1, "x": 1, "y": 0, "activity": 1}], "k": 2, "travel": [0, 1, 1]}, "travel"),
])
def test_invalid_documents(tmp_path, doc, msg):
    p = tmp_path / "d.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(FormatError, match=msg):
        load_instance(p)


def test_travel_matrix_round_trip(tmp_path):
    d = np.array([[0, 2, 7], [4, 0, 1], [7, 1, 0]], float)
    inst = Instance.from_arrays([0, 1, 2], [0, 0, 0], [1, 1, 1], 2, 0.1, travel=d)
    p = tmp_path / "t.json"
    save_instance(inst, p)
    back = load_instance(p)
    assert back.travel[0, 1] == 3.0  # symmetrised on load
    assert np.array_equal(back.travel, inst.travel) and back.epsilon == 0.1


def test_console_script_exit_code(tmp_path, inst_path):
    exe = shutil.which("territory")
    cmd = [exe] if exe else [sys.executable, "-m", "territory.cli"]
    out = tmp_path / "s.json"
    r = subprocess.run(cmd + ["solve", str(inst_path), "--algo", "bkns", "-o", str(out)],
                       capture_output=True, text=True)
    assert r.returncode == (0 if load_solution(out).feasible else 2)
    r = subprocess.run(cmd + ["solve"], capture_output=True, text=True)
    assert r.returncode == cli.EXIT_USAGE


# ---- bench --------------------------------------------------------------------------------

def test_bench_single_bkns_row(inst_path):
    rep = run_bench([inst_path], ["bkns"], repetitions=1, time_limit=1)
    (row,) = rep.rows
    assert row.reps == 1 and row.stat("min") == row.stat("avg") == row.stat("max")


def test_bench_shape_and_order(tmp_path, inst_path):
    other = tmp_path / "other.json"
    cli.main(["generate", "--n", "40", "--k", "2", "--seed", "9", "-o", str(other)])
    rep = run_bench([inst_path, other], ["kalocalloc", "bkns"], repetitions=3, time_limit=0.5)
    assert len(rep.rows) == 4
    for row in rep.rows:
        assert row.reps == (1 if row.solver == "bkns" else 3)
        assert not row.errors
        assert row.stat("min") <= row.stat("avg") <= row.stat("max")
    rows = list(csv.DictReader(io.StringIO(rep.to_csv())))
    assert tuple(rows[0]) == COLUMNS
    assert len(rep.to_table().splitlines()) == 2 + 4


def test_bench_records_cell_errors(tmp_path, inst_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    rep = run_bench([inst_path, bad], ["bkns"], repetitions=1, time_limit=1)
    assert rep.rows[0].reps == 1 and not rep.rows[0].errors
    assert rep.rows[1].reps == 0 and len(rep.rows[1].errors) == 1


def test_bench_command_writes_csv(tmp_path, inst_path, capsys):
    out = tmp_path / "r.csv"
    code = cli.main(["bench", str(inst_path), "--solvers", "bkns,kated", "--repetitions", "2",
                     "--time-limit", "0.5", "--csv", str(out)])
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["solver"] for r in rows] == ["bkns", "kated"]
    assert rows[1]["reps"] == "2"
    assert "instance" in capsys.readouterr().out
    assert cli.main(["bench", str(inst_path), "--solvers", "nope"]) == cli.EXIT_USAGE


# ---- export / model -------------------------------------------------------------------------

@pytest.fixture
def solved(tmp_path, inst_path):
    out = tmp_path / "sol.json"
    cli.main(["solve", str(inst_path), "--algo", "bkns", "-o", str(out)])
    return out


@pytest.mark.parametrize("fmt", ["geojson", "csv"])
def test_export_round_trip(tmp_path, inst_path, solved, fmt):
    out = tmp_path / f"x.{fmt}"
    assert cli.main(["export", str(solved), str(inst_path), "--format", fmt, "-o", str(out)]) == 0
    assert read_assignment(out).tolist() == load_solution(solved).assignment


def test_geojson_structure(tmp_path):
    inst = Instance.from_arrays([0, 1, 2], [0, 1, 0], [1, 2, 3], 2, 0.1)
    sol = Solution([0, 1, 1], 1.0, 1.0, True, "bkns", 0, None, k=2)
    from territory.export import to_geojson
    doc = to_geojson(inst, sol)
    assert doc["type"] == "FeatureCollection" and len(doc["features"]) == 3
    props = [f["properties"] for f in doc["features"]]
    assert {p["territory"] for p in props} <= {0, 1}
    assert props[2] == {"id": 2, "activity": 3.0, "territory": 1}


def test_export_size_mismatch(tmp_path, inst_path):
    sol = tmp_path / "short.json"
    sol.write_text(json.dumps(Solution([0, 1], 0.0, 0.0, True, "bkns", 0, None).to_dict()))
    code = cli.main(["export", str(sol), str(inst_path), "-o", str(tmp_path / "x.geojson")])
    assert code == cli.EXIT_DATA


def test_model_command_edge_list(tmp_path, inst_path):
    out = tmp_path / "g.txt"
    assert cli.main(["model", str(inst_path), "-o", str(out)]) == 0
    inst = load_instance(inst_path)
    g = build_model(inst)
    back = read_edgelist(out, inst.n)
    assert back.edges == g.edges
    assert np.array_equal(back.mst_flags, g.mst_flags)
