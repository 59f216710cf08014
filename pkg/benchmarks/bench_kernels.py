"""Compiled vs pure-Python oracle kernels.

    python benchmarks/bench_kernels.py [--repeat 5] [--seed 0]

Each kernel gets random inputs of oracle-like shape; results of the two
backends are compared before timing. The last block times a full oracle
pass over the tiny corpus with each backend swapped in.
"""

from __future__ import annotations

import argparse
import itertools
import time

import numpy as np

from ctopsp import _pure, kernels, oracle
from ctopsp.gen import tiny_corpus
from ctopsp.modelgen import POLICIES

try:
    from ctopsp import _speedups
except ImportError:  # extension not built
    _speedups = None


def holding_case(rng, flights=9, cands=5, cells=24, width=3):
    holds, rows, offsets = [], [], [0]
    for _ in range(flights):
        h = np.sort(rng.integers(0, 4, cands))
        holds.extend(h.tolist())
        for _ in range(cands):
            rows.append(rng.choice(cells, width, replace=False).tolist())
        offsets.append(offsets[-1] + cands)
    cap = rng.integers(1, 3, cells)
    return np.array(rows, dtype=np.int64), np.array(holds, dtype=np.int64), np.array(offsets, dtype=np.int64), cap


def joint_case(rng, flights=4, per_flight=12, decisions=6, Q=3):
    strides = np.array([decisions ** f for f in range(flights)], dtype=np.int64)
    cost = rng.integers(0, 20, (Q, decisions ** flights)).astype(np.float64)
    cost[rng.random(cost.shape) < 0.05] = np.inf
    policies = rng.integers(0, decisions, (flights * per_flight, Q)).astype(np.int64)
    offsets = np.arange(0, flights * per_flight + 1, per_flight, dtype=np.int64)
    prob = np.full(Q, 1.0 / Q)
    return cost, policies, offsets, strides, prob


def clock(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def corpus_pass(corpus):
    for inst, pol in itertools.product(corpus, POLICIES):
        oracle.enumerate_policies(inst, pol)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args(argv)
    if _speedups is None:
        print("compiled extension not built; nothing to compare")
        return 1
    rng = np.random.default_rng(a.seed)
    hc = holding_case(rng)
    jc = joint_case(rng)
    pv, pp = _pure.min_total_holding(*hc, True)
    cv, cp = _speedups.min_total_holding(*hc, True)
    assert pv == cv and list(pp) == list(cp), "backends disagree on min_total_holding"
    pb, ps = _pure.joint_min(*jc)
    cb, cs = _speedups.joint_min(*jc)
    assert pb == cb and list(ps) == list(cs), "backends disagree on joint_min"

    print(f"{'kernel':<22}{'pure s':>10}{'compiled s':>12}{'speedup':>9}")
    rows = [
        ("min_total_holding", lambda m: m.min_total_holding(*hc)),
        ("joint_min", lambda m: m.joint_min(*jc)),
    ]
    for name, f in rows:
        tp = clock(lambda: f(_pure), a.repeat)
        tc = clock(lambda: f(_speedups), a.repeat)
        print(f"{name:<22}{tp:>10.4f}{tc:>12.4f}{tp / tc:>8.1f}x")

    corpus = tiny_corpus()
    saved = kernels.min_total_holding, kernels.joint_min
    times = {}
    for label, mod in (("pure", _pure), ("compiled", _speedups)):
        kernels.min_total_holding, kernels.joint_min = mod.min_total_holding, mod.joint_min
        times[label] = clock(lambda: corpus_pass(corpus), max(1, a.repeat // 2))
    kernels.min_total_holding, kernels.joint_min = saved
    tp, tc = times["pure"], times["compiled"]
    print(f"{'oracle tiny corpus':<22}{tp:>10.4f}{tc:>12.4f}{tp / tc:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
