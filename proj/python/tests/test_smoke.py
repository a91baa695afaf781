import os
from pathlib import Path

import pytest

import asploop

FIXTURES = Path(os.environ.get("ASPLOOP_FIXTURES_DIR", Path(__file__).resolve().parents[2] / "fixtures"))


def test_small_program():
    v = asploop.solve("{a; b}.\n:- a, b.\n")
    assert v["count"] == 3
    assert not (v["error"] or v["unsat"] or v["cap_exceeded"])
    assert v["reward"] == pytest.approx(1 / 3)
    assert v["reward_exact"].startswith("1/3")


def test_flags():
    assert asploop.solve("a.\n:- a.\n")["unsat"]
    assert asploop.solve("a(.\n")["error"]
    over = asploop.solve("{a; b; c}.\n", cap=4)
    assert over["cap_exceeded"]
    assert over["reward"] == -1.0


def test_event_planners_golden():
    program = (FIXTURES / "encodings" / "event_planners" / "full.lp").read_text()
    v = asploop.solve(program)
    assert v["count"] == 1
    assert "assignment(wedding,herbert,50)" in v["models"][0]

    instances, rejected = asploop.load_dataset(FIXTURES / "puzzles" / "puzzles.json")
    assert rejected == 0
    p = next(i for i in instances if i["id"] == "event_planners")
    rows = [a[len("assignment("):-1].split(",") for a in v["models"][0] if a.startswith("assignment(")]
    r = asploop.match_rows(rows, p)
    assert r["matched"] and r["method"] == "exact"


def test_base_counts():
    base = (FIXTURES / "encodings" / "event_planners" / "base.lp").read_text()
    assert asploop.solve(base, keep=0)["count"] == asploop.expected_model_count(3, 4) == 576
    assert asploop.choice_rule_reward(576, 10**6, 576) == 1.0
    assert asploop.choice_rule_reward(575, 10**6, 576) == 0.0


def test_strings():
    assert asploop.normalize_surface("Dr. Golden") == "dr_golden"
    assert asploop.edit_distance("ison_x42", "ISON-X42") == 6


def test_bad_inputs():
    with pytest.raises(asploop.ConfigError):
        asploop.solve("a.", backend="nope")
    with pytest.raises(asploop.DatasetError):
        asploop.load_dataset(FIXTURES / "missing.json")
