"""Compiled inner loops (numba)."""
from __future__ import annotations

import math
import os

import numpy as np
from numba import config as numba_config
from numba import njit, prange, set_num_threads

if not os.environ.get("NUMBA_THREADING_LAYER"):
    numba_config.THREADING_LAYER = "workqueue"

_threads = os.environ.get("RIDGEKIT_THREADS")
if _threads:
    try:
        set_num_threads(max(1, min(int(_threads), numba_config.NUMBA_NUM_THREADS)))
    except ValueError:
        pass


@njit(parallel=True, cache=True)
def winding_numbers(verts, loop_start, loop_end, xs):
    """Winding number of each query point around the closed vertex loops."""
    n = xs.shape[0]
    out = np.zeros(n, dtype=np.int64)
    for q in prange(n):
        x0 = xs[q, 0]
        y0 = xs[q, 1]
        w = 0
        for L in range(loop_start.shape[0]):
            s = loop_start[L]
            e = loop_end[L]
            for i in range(s, e):
                j = i + 1 if i + 1 < e else s
                ax = verts[i, 0]
                ay = verts[i, 1]
                bx = verts[j, 0]
                by = verts[j, 1]
                cross = (bx - ax) * (y0 - ay) - (x0 - ax) * (by - ay)
                if ay <= y0:
                    if by > y0 and cross > 0:
                        w += 1
                elif by <= y0 and cross < 0:
                    w -= 1
        out[q] = w
    return out


@njit(cache=True)
def _dist(P, i, x0, y0):
    dx = P[i, 0] - x0
    dy = P[i, 1] - y0
    return math.sqrt(dx * dx + dy * dy)


@njit(cache=True)
def _nearest(P, bstart, bend, bcen, brad, sstart, send, scen, srad, x0, y0):
    ub = np.inf
    for S in range(sstart.shape[0]):
        dx = scen[S, 0] - x0
        dy = scen[S, 1] - y0
        v = math.sqrt(dx * dx + dy * dy) + srad[S]
        if v < ub:
            ub = v
    best = ub
    for S in range(sstart.shape[0]):
        dx = scen[S, 0] - x0
        dy = scen[S, 1] - y0
        if math.sqrt(dx * dx + dy * dy) - srad[S] > best:
            continue
        for b in range(sstart[S], send[S]):
            dx = bcen[b, 0] - x0
            dy = bcen[b, 1] - y0
            if math.sqrt(dx * dx + dy * dy) - brad[b] > best:
                continue
            for i in range(bstart[b], bend[b]):
                d = _dist(P, i, x0, y0)
                if d < best:
                    best = d
    return best


@njit(parallel=True, cache=True)
def nearest_sample_distance(P, bstart, bend, bcen, brad, sstart, send, scen, srad, xs):
    n = xs.shape[0]
    out = np.empty(n)
    for q in prange(n):
        out[q] = _nearest(P, bstart, bend, bcen, brad, sstart, send, scen, srad, xs[q, 0], xs[q, 1])
    return out


@njit(parallel=True, cache=True)
def local_minima(P, prev_idx, next_idx, bstart, bend, bcen, brad, sstart, send, scen, srad, xs, slack, cap, cand, count, dmin):
    """Discrete local minima of |P_i - x| along the sample chains.

    Keeps minima whose value is within ``slack[q]`` of the sampled global
    minimum.  When more than ``cap`` qualify, an evenly strided subset is
    stored; ``count`` holds the true number.  Samples are grouped in blocks
    and blocks in superblocks, each with a bounding circle.
    """
    n = xs.shape[0]
    for q in prange(n):
        x0 = xs[q, 0]
        y0 = xs[q, 1]
        best = _nearest(P, bstart, bend, bcen, brad, sstart, send, scen, srad, x0, y0)
        dmin[q] = best
        thr = best + slack[q]
        c = 0
        for sweep in range(2):
            stride = 1
            if sweep == 1:
                if c > cap:
                    stride = (c + cap - 1) // cap
                count[q] = c
                c = 0
            k = 0
            for S in range(sstart.shape[0]):
                dx = scen[S, 0] - x0
                dy = scen[S, 1] - y0
                if math.sqrt(dx * dx + dy * dy) - srad[S] > thr:
                    continue
                for b in range(sstart[S], send[S]):
                    dx = bcen[b, 0] - x0
                    dy = bcen[b, 1] - y0
                    if math.sqrt(dx * dx + dy * dy) - brad[b] > thr:
                        continue
                    for i in range(bstart[b], bend[b]):
                        d = _dist(P, i, x0, y0)
                        if d > thr:
                            continue
                        p = prev_idx[i]
                        if p >= 0 and _dist(P, p, x0, y0) < d:
                            continue
                        m = next_idx[i]
                        if m >= 0 and _dist(P, m, x0, y0) < d:
                            continue
                        if sweep == 1:
                            if c % stride == 0 and k < cap:
                                cand[q, k] = i
                                k += 1
                        c += 1
    return 0
