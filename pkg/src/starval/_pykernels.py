"""Pure numpy versions of the compiled kernels in ``_ckernels.pyx``.

Each function returns bit-identical results to its compiled twin: the
summation and comparison order is the same.
"""

import numpy as np


def ladder_argmax(table, first_lo=0, first_hi=-1):
    table = np.ascontiguousarray(table, dtype=np.float64)
    n, m = table.shape
    if first_hi < 0:
        first_hi = m
    if n == 0 or first_lo >= first_hi:
        return -np.inf, np.zeros(n, dtype=np.intp), 0
    scores = table[0, first_lo:first_hi].copy()
    for i in range(1, n):
        scores = np.add.outer(scores, table[i]).ravel()
    flat = int(np.argmax(scores))
    shape = (first_hi - first_lo,) + (m,) * (n - 1)
    levels = np.array(np.unravel_index(flat, shape), dtype=np.intp)
    levels[0] += first_lo
    return float(scores[flat]), levels, int(scores.size)


def running_max_pl(x, y):
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if x.size == 0:
        return x.copy(), y.copy()
    rec = np.maximum.accumulate(y)
    prev = rec[:-1]
    cross = (y[1:] > prev) & (y[:-1] < prev)
    idx = np.nonzero(cross)[0]
    xc = x[idx] + (prev[idx] - y[idx]) / (y[idx + 1] - y[idx]) * (x[idx + 1] - x[idx])
    keep = (xc > x[idx]) & (xc < x[idx + 1])
    idx, xc = idx[keep], xc[keep]
    # crossings sit between node idx and idx+1
    xo = np.insert(x, idx + 1, xc)
    yo = np.insert(rec, idx + 1, prev[idx])
    return xo, yo


def min_chordal_distance(points, targets):
    points = np.ascontiguousarray(points, dtype=np.float64)
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    out = np.empty(points.shape[0])
    # chunk to bound the (points x targets) temporary
    step = max(1, 4_000_000 // max(1, targets.shape[0] * points.shape[1]))
    for lo in range(0, points.shape[0], step):
        diff = points[lo:lo + step, None, :] - targets[None, :, :]
        out[lo:lo + step] = np.sqrt((diff * diff).sum(axis=-1).min(axis=1))
    return out
