import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctopsp.scenario import (
    Branch,
    ScenarioTree,
    project_scenario,
    shared_branches_at,
    single_scenario_tree,
    validate_tree,
)


def two_way(split=3, H=6):
    caps = {"P": ((1,) * (H + 1), (1,) * split + (0,) * (H + 1 - split))}
    br = (Branch(0, split - 1, (0, 1)), Branch(split, H, (0,)), Branch(split, H, (1,)))
    return ScenarioTree((0.5, 0.5), caps, br)


def test_valid_tree():
    assert validate_tree(two_way(), 6, ["P"]) == []
    assert two_way().split_period(0, 1) == 3
    assert two_way().split_period(1, 1) is None


def test_capacity_must_agree_before_split():
    t = two_way(split=3)
    bad = ScenarioTree(t.probabilities, {"P": (t.capacities["P"][0], (0,) * 7)}, t.branches)
    assert any("differ" in p for p in validate_tree(bad, 6))


def test_partition_violation():
    t = two_way()
    bad = ScenarioTree(t.probabilities, t.capacities, t.branches[:2])
    assert validate_tree(bad, 6)


def test_probabilities():
    t = two_way()
    bad = ScenarioTree((0.6, 0.6), t.capacities, t.branches)
    assert any("sum" in p for p in validate_tree(bad, 6))


def test_unknown_pca_reported():
    assert validate_tree(two_way(), 6, ["P", "Q"]) == ["capacity missing for pca Q"]


def test_shared_branches():
    t = two_way()
    assert len(shared_branches_at(t, 0)) == 1
    assert len(shared_branches_at(t, 5)) == 2
    with pytest.raises(ValueError):
        shared_branches_at(t, 99)


def test_single_and_projection(t1):
    s = single_scenario_tree({"P": [2] * 5}, 4)
    assert validate_tree(s, 4, ["P"]) == []
    p = project_scenario(t1, 1)
    assert p.n_scenarios == 1
    assert p.scenarios.capacities["P"][0] == t1.scenarios.capacities["P"][1]


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(1, 5))
def test_two_way_trees_valid_for_any_split(H, split):
    if split > H:
        split = H
    assert validate_tree(two_way(split, H), H) == []
