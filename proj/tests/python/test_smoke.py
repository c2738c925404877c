import json
import pathlib

import pytest

import parplan

ASSETS = pathlib.Path(__file__).resolve().parents[2] / "assets" / "prompts"

EXAMPLE = {
    "rules": [
        {"id": 0, "source": ["N1"], "target": ["N2"], "time": 3, "cost": 1},
        {"id": 1, "source": ["N6"], "target": ["N3"], "time": 4, "cost": 1},
        {"id": 2, "source": ["N2", "N3"], "target": ["N4"], "time": 2, "cost": 1},
        {"id": 3, "source": ["N4"], "target": ["N5"], "time": 1, "cost": 1},
        {"id": 4, "source": ["N2"], "target": ["N5"], "time": 5, "cost": 1},
    ],
    "initial_source": ["N1", "N6"],
    "target": "N5",
}


def test_solve_example():
    out = parplan.solve(EXAMPLE, second_best=True)
    assert (out["makespan"], out["cost"]) == (7, 4)
    assert out["rule_ids"] == [0, 1, 2, 3]
    assert (out["second_best"]["makespan"], out["second_best"]["cost"]) == (8, 2)
    assert parplan.brute_force(EXAMPLE)["makespan"] == 7


def test_eft_and_validate():
    eft = parplan.earliest_finish_times(EXAMPLE)
    assert eft == {"N1": 0, "N2": 3, "N3": 4, "N4": 6, "N5": 7, "N6": 0}
    plan = parplan.solve(EXAMPLE)["plan"]
    verdict = parplan.validate(EXAMPLE, plan)
    assert verdict["status"] == "Optimal"
    bad = [{"name": "a", "source": ["N1"], "target": ["N5"], "dependencies": []}]
    assert parplan.validate(EXAMPLE, bad)["errors"] == ["InvalidSubtask"]


def test_generate_is_seeded():
    a = parplan.generate(12, "tree", "linear", seed=3)
    b = parplan.generate(12, "tree", "linear", seed=3)
    assert a == b
    assert a["meta"]["node_count"] == 12
    assert parplan.solve(a["graph"])["exact"]


def test_errors_are_raised():
    with pytest.raises(parplan.ParplanError):
        parplan.generate(2)
    with pytest.raises(parplan.ParplanError):
        parplan.parse_plan("nothing here")


def test_prompts():
    assert parplan.prompt_template("graph_planning") == (ASSETS / "graph_planning.txt").read_text()
    text = parplan.render_prompt("graph_planning", EXAMPLE)
    assert json.dumps(EXAMPLE, indent=4) in text
    reply = "Plan:\n```json\n" + json.dumps(parplan.solve(EXAMPLE)["plan"]) + "\n```"
    assert parplan.parse_plan(reply)[-1]["target"] == ["N5"]


def test_similarity_and_correlation():
    assert parplan.graph_similarity(EXAMPLE, EXAMPLE) == (True, 1.0)
    assert parplan.correlation([1, 2, 3], [2, 4, 6]) == (1.0, 1.0)


def test_build_dataset():
    rows = [{"node_count": 8, "structure": "random", "samples": 3}]
    out = parplan.build_dataset(rows, seed=1)
    assert len(out) == 3
    assert out == parplan.build_dataset(json.dumps(rows), seed=1)
    assert all(inst["optimal"]["makespan"] > 0 for inst in out)
