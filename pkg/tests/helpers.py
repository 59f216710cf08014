"""Small hand-built instances shared by the tests."""

from ctopsp.instance import instance_from_doc


def one_flight(cap=5, H=8, costs=(0, 2), Q=1, drop=None):
    """One flight A -> P -> X with ``len(costs)`` parallel routes via P or P2."""
    pcas = ["P", "P2"][: len(costs)]
    caps = {}
    for k in pcas:
        rows = {}
        for q in range(Q):
            row = [cap] * (H + 1)
            if drop and q == Q - 1:
                for t in drop:
                    row[t] = 0
            rows[str(q)] = row
        caps[k] = rows
    if Q == 1:
        branches = [{"start": 0, "end": H, "scenarios": [0]}]
    else:
        s = min(drop) if drop else H
        branches = [{"start": 0, "end": s - 1, "scenarios": list(range(Q))}]
        branches += [{"start": s, "end": H, "scenarios": [q]} for q in range(Q)]
    return instance_from_doc({
        "network": {
            "resources": [{"id": "A", "kind": "airport"}, {"id": "X", "kind": "exit-sink"}]
            + [{"id": k, "kind": "pca"} for k in pcas],
            "arcs": [{"from": "A", "to": k, "travel": 1} for k in pcas]
            + [{"from": k, "to": "X", "travel": 1} for k in pcas],
        },
        "flights": [{"id": "f", "dep": 0, "options": [
            {"id": f"r{j}", "cost": c, "omega": ["A", pcas[j], "X"]} for j, c in enumerate(costs)]}],
        "costs": {"cg": 1, "ca": 2},
        "caps": {"ground": 2, "air": 1},
        "scenarios": {"probabilities": [1.0 / Q] * Q, "capacities": caps, "branches": branches},
        "horizon": H,
    })
