"""Compiled inner loops for the NMS methods.

Every kernel works on positions into a float64 ``(n, 4)`` box array plus
integer ranks: ``prank`` (priority, 0 = highest) and ``krank`` (dense rank of
the centroid key). All of them share :func:`box_iou`, so any two methods see
bit-identical IOU values for the same pair.
"""

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def box_iou(boxes, i, j):
    iw = min(boxes[i, 2], boxes[j, 2]) - max(boxes[i, 0], boxes[j, 0])
    ih = min(boxes[i, 3], boxes[j, 3]) - max(boxes[i, 1], boxes[j, 1])
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = (
        (boxes[i, 2] - boxes[i, 0]) * (boxes[i, 3] - boxes[i, 1])
        + (boxes[j, 2] - boxes[j, 0]) * (boxes[j, 3] - boxes[j, 1])
        - inter
    )
    if union <= 0.0:
        return 0.0
    r = inter / union
    if r > 1.0:
        return 1.0
    if r < 0.0:
        return 0.0
    return r


@njit(cache=True)
def original_kernel(boxes, order, thr):
    n = order.shape[0]
    removed = np.zeros(boxes.shape[0], dtype=np.bool_)
    keep = np.zeros(boxes.shape[0], dtype=np.bool_)
    calls = 0
    for a in range(n):
        i = order[a]
        if removed[i]:
            continue
        keep[i] = True
        for b in range(a + 1, n):
            j = order[b]
            if removed[j]:
                continue
            calls += 1
            if box_iou(boxes, i, j) > thr:
                removed[j] = True
    return keep, calls


@njit(cache=True)
def fast_kernel(boxes, order, thr):
    n = order.shape[0]
    keep = np.ones(boxes.shape[0], dtype=np.bool_)
    calls = 0
    for a in range(n):
        i = order[a]
        for b in range(a + 1, n):
            j = order[b]
            calls += 1
            if box_iou(boxes, i, j) > thr:
                keep[j] = False
    return keep, calls


@njit(cache=True)
def arcs_kernel(boxes, order, thr):
    """All arcs (higher priority -> lower priority, IOU above threshold)."""
    n = order.shape[0]
    cap = 16
    src = np.empty(cap, dtype=np.int64)
    dst = np.empty(cap, dtype=np.int64)
    m = 0
    calls = 0
    for a in range(n):
        i = order[a]
        for b in range(a + 1, n):
            j = order[b]
            calls += 1
            if box_iou(boxes, i, j) > thr:
                if m == cap:
                    cap *= 2
                    src2 = np.empty(cap, dtype=np.int64)
                    dst2 = np.empty(cap, dtype=np.int64)
                    src2[:m] = src[:m]
                    dst2[:m] = dst[:m]
                    src = src2
                    dst = dst2
                src[m] = i
                dst[m] = j
                m += 1
    return src[:m].copy(), dst[:m].copy(), calls


@njit(cache=True)
def cluster_iterate(n, src, dst):
    """Fixed point of r = F(diag(r) X) starting from r = 1, over an arc list."""
    prev = np.ones(n, dtype=np.bool_)
    iterations = 0
    while True:
        cur = np.ones(n, dtype=np.bool_)
        for e in range(src.shape[0]):
            if prev[src[e]]:
                cur[dst[e]] = False
        iterations += 1
        same = True
        for k in range(n):
            if cur[k] != prev[k]:
                same = False
                break
        prev = cur
        if same:
            return cur, iterations


@njit(cache=True)
def boe_kernel(boxes, order, prank, thr, scale, use_y_filter):
    n = order.shape[0]
    cx = (boxes[:, 0] + boxes[:, 2]) / 2
    cy = (boxes[:, 1] + boxes[:, 3]) / 2
    # centroid x ascending, ties by index (argsort over a stable key)
    xorder = np.argsort(cx, kind="mergesort")
    xs = cx[xorder]
    removed = np.zeros(boxes.shape[0], dtype=np.bool_)
    keep = np.zeros(boxes.shape[0], dtype=np.bool_)
    calls = 0
    cmps = 0
    for a in range(n):
        i = order[a]
        if removed[i]:
            continue
        keep[i] = True
        ccx = cx[i]
        ccy = cy[i]
        wx_lt = ccx - scale * abs(boxes[i, 0] - ccx)
        wx_rb = ccx + scale * abs(boxes[i, 2] - ccx)
        wy_lt = ccy - scale * abs(boxes[i, 1] - ccy)
        wy_rb = ccy + scale * abs(boxes[i, 3] - ccy)
        lo = np.searchsorted(xs, wx_lt, side="left")
        hi = np.searchsorted(xs, wx_rb, side="right")
        for k in range(lo, hi):
            j = xorder[k]
            cmps += 1
            if removed[j] or prank[j] <= prank[i]:
                continue
            if use_y_filter and (cy[j] < wy_lt or cy[j] > wy_rb):
                continue
            calls += 1
            if box_iou(boxes, i, j) > thr:
                removed[j] = True
    return keep, calls, cmps


@njit(cache=True)
def qsi_kernel(boxes, prank, krank, thr):
    """Divide and conquer with an explicit stack of (lo, hi, parent, side) ranges.

    Returns the keep mask, IOU calls, comparisons (pivot search plus
    partition) and the recursion tree as
    (root, left child, right child) in detection indices (-1 = none).
    """
    n = boxes.shape[0]
    perm = np.arange(n)
    alive = np.ones(n, dtype=np.bool_)
    left = -np.ones(n, dtype=np.int64)
    right = -np.ones(n, dtype=np.int64)
    root = -1
    calls = 0
    cmps = 0
    stack = np.empty((2 * n + 2, 4), dtype=np.int64)
    top = 0
    if n > 0:
        stack[0, 0] = 0
        stack[0, 1] = n - 1
        stack[0, 2] = -1
        stack[0, 3] = 0
        top = 1
    while top > 0:
        top -= 1
        lo = stack[top, 0]
        hi = stack[top, 1]
        parent = stack[top, 2]
        side = stack[top, 3]
        if lo > hi:
            continue
        # pivot: highest priority in range, moved to hi
        m = lo
        cmps += 2 * (hi - lo)
        for t in range(lo + 1, hi + 1):
            if prank[perm[t]] < prank[perm[m]]:
                m = t
        tmp = perm[m]
        perm[m] = perm[hi]
        perm[hi] = tmp
        pv = perm[hi]
        if parent < 0:
            root = pv
        elif side == 0:
            left[parent] = pv
        else:
            right[parent] = pv
        if alive[pv]:
            for t in range(lo, hi):
                j = perm[t]
                calls += 1
                if box_iou(boxes, pv, j) > thr:
                    alive[j] = False
        # keys <= pivot key go left
        p = lo
        pk = krank[pv]
        for t in range(lo, hi):
            if krank[perm[t]] <= pk:
                tmp = perm[p]
                perm[p] = perm[t]
                perm[t] = tmp
                p += 1
        tmp = perm[p]
        perm[p] = perm[hi]
        perm[hi] = tmp
        stack[top, 0] = p + 1
        stack[top, 1] = hi
        stack[top, 2] = pv
        stack[top, 3] = 1
        top += 1
        stack[top, 0] = lo
        stack[top, 1] = p - 1
        stack[top, 2] = pv
        stack[top, 3] = 0
        top += 1
    return alive, calls, cmps, root, left, right


@njit(cache=True)
def _eqsi_pass(boxes, scores, index, thr, alive, gated, step):
    """One nearest-greater stack pass over positions 0..n-1 (or reversed when step < 0).

    Priority is compared directly as (score desc, original index asc).
    """
    n = boxes.shape[0]
    stack = np.empty(n, dtype=np.int64)
    top = 0
    calls = 0
    cmps = 0
    start = 0 if step > 0 else n - 1
    for m in range(n):
        cur = start + step * m
        while top > 0:
            cmps += 1
            below = stack[top - 1]
            if scores[below] > scores[cur] or (
                scores[below] == scores[cur] and index[below] < index[cur]
            ):
                break
            if not gated or alive[cur]:
                calls += 1
                if box_iou(boxes, cur, below) > thr:
                    alive[below] = False
            top -= 1
        stack[top] = cur
        top += 1
    return calls, cmps


@njit(cache=True)
def eqsi_kernel(boxes, scores, index, thr, gated):
    """Both stack passes over boxes already laid out in centroid order."""
    alive = np.ones(boxes.shape[0], dtype=np.bool_)
    c1, k1 = _eqsi_pass(boxes, scores, index, thr, alive, gated, 1)
    c2, k2 = _eqsi_pass(boxes, scores, index, thr, alive, gated, -1)
    return alive, c1 + c2, k1 + k2


@njit(cache=True)
def cartesian_kernel(prank):
    """Stack construction of the max-priority Cartesian tree over positions."""
    n = prank.shape[0]
    left = -np.ones(n, dtype=np.int64)
    right = -np.ones(n, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)
    top = 0
    for i in range(n):
        last = -1
        while top > 0 and prank[stack[top - 1]] > prank[i]:
            last = stack[top - 1]
            top -= 1
        left[i] = last
        if top > 0:
            right[stack[top - 1]] = i
        stack[top] = i
        top += 1
    root = stack[0] if n > 0 else -1
    return root, left, right
