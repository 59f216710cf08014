# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled oracle kernels; same contracts as ``ctopsp._pure``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY, isinf

cnp.import_array()


def min_total_holding(cnp.int64_t[:, :] cells, cnp.int64_t[:] holds, cnp.int64_t[:] offsets,
                      capacity, bint want_choice=False):
    cdef Py_ssize_t nf = offsets.shape[0] - 1
    cdef Py_ssize_t width = cells.shape[1]
    cdef cnp.int64_t[:] left = np.array(capacity, dtype=np.int64)
    cdef cnp.int64_t[:] tail = np.zeros(nf + 1, dtype=np.int64)
    cdef cnp.int64_t[:] pos = np.zeros(nf + 1, dtype=np.int64)
    cdef cnp.int64_t[:] acc = np.zeros(nf + 1, dtype=np.int64)
    cdef cnp.int64_t[:] pick = np.zeros(max(nf, 1), dtype=np.int64)
    cdef cnp.int64_t[:] best_pick = np.zeros(max(nf, 1), dtype=np.int64)
    cdef Py_ssize_t f, c, k, x
    cdef cnp.int64_t best = -1, h
    cdef bint fits

    if nf == 0:
        return (0, []) if want_choice else 0
    for f in range(nf - 1, -1, -1):
        tail[f] = tail[f + 1] + (holds[offsets[f]] if offsets[f + 1] > offsets[f] else 0)

    # iterative DFS: pos[f] is the next candidate to try for flight f
    f = 0
    pos[0] = offsets[0]
    acc[0] = 0
    while f >= 0:
        if f == nf:
            if best < 0 or acc[f] < best:
                best = acc[f]
                best_pick[:] = pick
            f -= 1
            if f >= 0:
                c = pick[f]
                for k in range(width):
                    x = cells[c, k]
                    if x < 0:
                        break
                    left[x] += 1
            continue
        c = pos[f]
        if c >= offsets[f + 1]:
            f -= 1
            if f >= 0:
                c = pick[f]
                for k in range(width):
                    x = cells[c, k]
                    if x < 0:
                        break
                    left[x] += 1
            continue
        h = acc[f] + holds[c]
        if best >= 0 and h + tail[f + 1] >= best:
            pos[f] = offsets[f + 1]
            continue
        pos[f] = c + 1
        fits = True
        for k in range(width):
            x = cells[c, k]
            if x < 0:
                break
            if left[x] <= 0:
                fits = False
                break
        if not fits:
            continue
        for k in range(width):
            x = cells[c, k]
            if x < 0:
                break
            left[x] -= 1
        pick[f] = c
        acc[f + 1] = h
        f += 1
        if f < nf:
            pos[f] = offsets[f]
    if want_choice:
        return int(best), [int(best_pick[f]) for f in range(nf)] if best >= 0 else []
    return int(best)


def joint_min(double[:, :] cost, cnp.int64_t[:, :] policies, cnp.int64_t[:] offsets,
              cnp.int64_t[:] strides, double[:] prob):
    cdef Py_ssize_t Q = cost.shape[0]
    cdef Py_ssize_t nf = offsets.shape[0] - 1
    cdef Py_ssize_t f, q, g
    cdef double v, cq, best = INFINITY
    cdef bint bad
    if nf == 0:
        return INFINITY, []
    cdef cnp.int64_t[:] sel = np.array(offsets[:nf], dtype=np.int64)
    cdef cnp.int64_t[:] best_sel = np.zeros(nf, dtype=np.int64)
    # part[f, q]: joint index contribution of flights 0..f-1
    cdef cnp.int64_t[:, :] part = np.zeros((nf + 1, Q), dtype=np.int64)
    cdef bint found = False
    for f in range(nf):
        if offsets[f + 1] <= offsets[f]:
            return INFINITY, []
    for f in range(nf):
        for q in range(Q):
            part[f + 1, q] = part[f, q] + policies[sel[f], q] * strides[f]
    while True:
        v = 0.0
        bad = False
        for q in range(Q):
            cq = cost[q, part[nf, q]]
            if isinf(cq):
                bad = True
                break
            v = v + prob[q] * cq
        if not bad and v < best:
            best = v
            best_sel[:] = sel
            found = True
        # odometer, last flight fastest
        f = nf - 1
        while f >= 0:
            sel[f] += 1
            if sel[f] < offsets[f + 1]:
                break
            sel[f] = offsets[f]
            f -= 1
        if f < 0:
            break
        for g in range(f, nf):
            for q in range(Q):
                part[g + 1, q] = part[g, q] + policies[sel[g], q] * strides[g]
    if not found:
        return INFINITY, []
    return best, [int(best_sel[f]) for f in range(nf)]
