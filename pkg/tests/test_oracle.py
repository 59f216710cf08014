import dataclasses

import pytest

from ctopsp.gen import synth_instance
from ctopsp.modelgen import DYNAMIC, POLICIES, SEMI_DYNAMIC, TWO_STAGE
from ctopsp.oracle import (
    BudgetExceeded,
    FlightDecision,
    Policy,
    PolicyError,
    enumerate_policies,
    evaluate_policy,
    within_soft_limits,
)

from helpers import one_flight


def test_t1_values(t1):
    got = {p: enumerate_policies(t1, p).cost for p in POLICIES}
    assert got == {TWO_STAGE: 3.0, SEMI_DYNAMIC: 3.0, DYNAMIC: 2.5}


def test_nesting_on_corpus(corpus):
    for inst in corpus:
        c = {p: enumerate_policies(inst, p).cost for p in POLICIES}
        assert c[DYNAMIC] <= c[SEMI_DYNAMIC] + 1e-9 <= c[TWO_STAGE] + 2e-9


def test_returned_policy_evaluates_to_cost(corpus):
    for inst in corpus[:6]:
        for p in POLICIES:
            r = enumerate_policies(inst, p)
            ev = evaluate_policy(inst, r.policy)
            assert ev.feasible
            assert ev.expected == pytest.approx(r.cost, abs=1e-9)


def test_uncongested():
    inst = one_flight(cap=3, costs=(1, 4))
    assert enumerate_policies(inst, TWO_STAGE).cost == 1.0


def _decision(inst, route, dep_delay, air=0):
    rt = inst.flights[0].options[route]
    dep = rt.crossings[0] + dep_delay
    adm = tuple([dep] + [t + dep_delay + (air if k else 0) for k, t in enumerate(rt.crossings[1:], 1)])
    return FlightDecision(route, dep, adm)


def test_evaluate_counts_ground_and_air():
    inst = one_flight(cap=3, costs=(0, 4))
    d = _decision(inst, 0, 1, air=1)
    pc = evaluate_policy(inst, Policy(TWO_STAGE, ((d,),)))
    # ground 1 at cg=1 plus one air period at ca=2 (air is counted at the last resource)
    assert pc.feasible and pc.expected == pytest.approx(3.0)


def test_evaluate_rejects_anticipation():
    inst = one_flight(cap=1, Q=2, drop=[3, 4], H=8)
    a, b = _decision(inst, 0, 0), _decision(inst, 1, 0)
    with pytest.raises(PolicyError):
        evaluate_policy(inst, Policy(TWO_STAGE, ((a, b),)))


def test_capacity_violation_infeasible():
    inst = one_flight(cap=0)
    pc = evaluate_policy(inst, Policy(TWO_STAGE, ((_decision(inst, 0, 0),),)))
    assert not pc.feasible


def test_budget_refusal():
    big = synth_instance(flights=60, periods=12, seed=3)
    assert within_soft_limits(big)
    with pytest.raises(BudgetExceeded):
        enumerate_policies(big, DYNAMIC)


def test_spec_sized_synth_within_budget():
    inst = synth_instance(airports=2, pcas=2, flights=3, tos_mean=1.5, periods=10, scenarios=2,
                          branch_points=1, seed=1)
    r = enumerate_policies(inst, DYNAMIC)
    assert r.policy is not None
