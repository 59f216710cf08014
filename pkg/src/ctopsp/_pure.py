"""Pure Python/numpy versions of the oracle kernels.

Both kernels are exact; the compiled module in ``_speedups`` must return
identical results (the test suite and the benchmark compare the two).
"""

from __future__ import annotations

import itertools

import numpy as np

INF = float("inf")


def min_total_holding(cells, holds, offsets, capacity, want_choice: bool = False):
    """Minimum total air holding for a fixed set of flights in one scenario.

    ``cells[c]`` lists the flattened (pca, period) cells that candidate ``c``
    occupies (-1 padded); candidates of flight ``f`` are
    ``offsets[f]:offsets[f+1]`` sorted by ``holds`` ascending.  ``capacity``
    is the flattened capacity array.  Returns -1 when no assignment fits.
    With ``want_choice`` a (value, chosen candidate per flight) pair is returned.
    """
    cells = np.asarray(cells, dtype=np.int64)
    holds = np.asarray(holds, dtype=np.int64)
    offsets = np.asarray(offsets, dtype=np.int64)
    left = np.array(capacity, dtype=np.int64)
    nf = len(offsets) - 1
    rows = [[c for c in cells[k] if c >= 0] for k in range(len(cells))]
    hl = holds.tolist()
    off = offsets.tolist()
    # suffix sums of each flight's smallest holding give a lower bound
    tail = [0] * (nf + 1)
    for f in range(nf - 1, -1, -1):
        tail[f] = tail[f + 1] + (hl[off[f]] if off[f + 1] > off[f] else 0)
    best = [-1]
    pick = [0] * nf
    best_pick: list[int] = []

    def dfs(f: int, cur: int) -> None:
        if f == nf:
            if best[0] < 0 or cur < best[0]:
                best[0] = cur
                best_pick[:] = pick
            return
        for c in range(off[f], off[f + 1]):
            h = cur + hl[c]
            if best[0] >= 0 and h + tail[f + 1] >= best[0]:
                break  # candidates are sorted, later ones are no better
            row = rows[c]
            if all(left[x] > 0 for x in row):
                for x in row:
                    left[x] -= 1
                pick[f] = c
                dfs(f + 1, h)
                for x in row:
                    left[x] += 1

    if nf == 0:
        return (0, []) if want_choice else 0
    dfs(0, 0)
    if want_choice:
        return best[0], list(best_pick)
    return best[0]


def joint_min(cost, policies, offsets, strides, prob):
    """Minimize sum_q prob[q] * cost[q, joint_q] over one policy per flight.

    ``policies[k]`` gives the decision index per scenario of policy ``k``;
    flight ``f`` owns policies ``offsets[f]:offsets[f+1]``.  The joint
    decision index in scenario ``q`` is ``sum_f policies[k_f, q] * strides[f]``.
    Ties go to the lexicographically first combination.  Returns
    (best value, chosen policy index per flight); value is inf when every
    combination is infeasible somewhere.
    """
    cost = np.asarray(cost, dtype=np.float64)
    policies = np.asarray(policies, dtype=np.int64)
    offsets = np.asarray(offsets, dtype=np.int64)
    strides = np.asarray(strides, dtype=np.int64)
    prob = np.asarray(prob, dtype=np.float64)
    Q = cost.shape[0]
    nf = len(offsets) - 1
    blocks = [policies[offsets[f]:offsets[f + 1]] * strides[f] for f in range(nf)]
    if nf == 0:
        return INF, []
    # vectorize over the last one or two flights, loop over the rest
    nv = min(2, nf)
    head, vec = blocks[:nf - nv], blocks[nf - nv:]
    best, best_sel = INF, None
    for prefix in itertools.product(*[range(len(b)) for b in head]):
        base = np.zeros(Q, dtype=np.int64)
        for f, k in enumerate(prefix):
            base += head[f][k]
        if nv == 2:
            idx = base[:, None, None] + vec[0].T[:, :, None] + vec[1].T[:, None, :]
        else:
            idx = base[:, None] + vec[0].T
        val = np.zeros(idx.shape[1:], dtype=np.float64)
        bad = np.zeros(idx.shape[1:], dtype=bool)
        for q in range(Q):
            cq = cost[q][idx[q]]
            bad |= np.isinf(cq)
            val = val + prob[q] * np.where(np.isinf(cq), 0.0, cq)
        val[bad] = INF
        flat = int(np.argmin(val))
        v = float(val.flat[flat])
        if v < best:
            best = v
            best_sel = list(prefix) + list(np.unravel_index(flat, val.shape))
    if best_sel is None:
        return INF, []
    return best, [int(offsets[f] + k) for f, k in enumerate(best_sel)]
