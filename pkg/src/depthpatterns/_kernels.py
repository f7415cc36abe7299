"""Compiled kernels for planar halfspace depth.

Angles are only used to order points around the query; every membership
decision near an angular boundary is re-decided with an exact sign of the
cross product of the (floating point) coordinate differences.
"""
import math

import numpy as np
from numba import njit

# atan2 is accurate to a few ulp, so anything closer than this to a
# boundary is resolved with exact predicates instead.
_FRINGE = 1e-12
_SPLITTER = 134217729.0  # 2**27 + 1
_TWO_PI = 2.0 * math.pi


@njit(cache=True, nogil=True)
def _two_sum(a, b):
    s = a + b
    bv = s - a
    av = s - bv
    return s, (a - av) + (b - bv)


@njit(cache=True, nogil=True)
def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


@njit(cache=True, nogil=True)
def _two_product(a, b):
    p = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    err = alo * blo - (((p - ahi * bhi) - alo * bhi) - ahi * blo)
    return p, err


@njit(cache=True, nogil=True)
def _grow(e0, e1, e2, size, t):
    # add t to a nonoverlapping expansion of up to three components
    if size > 0:
        t, e0 = _two_sum(t, e0)
    if size > 1:
        t, e1 = _two_sum(t, e1)
    if size > 2:
        t, e2 = _two_sum(t, e2)
    return e0, e1, e2, t


@njit(cache=True, nogil=True)
def cross_sign(ax, ay, bx, by):
    """Exact sign of ax*by - ay*bx for finite doubles."""
    p = ax * by
    q = ay * bx
    d = p - q
    if abs(d) > 1e-14 * (abs(p) + abs(q)):
        return 1 if d > 0 else -1
    p, pe = _two_product(ax, by)
    q, qe = _two_product(ay, bx)
    e0 = p
    e0, e1, e2, top = _grow(e0, 0.0, 0.0, 1, -q)
    e1 = top
    e0, e1, e2, top = _grow(e0, e1, 0.0, 2, pe)
    e2 = top
    e0, e1, e2, e3 = _grow(e0, e1, e2, 3, -qe)
    for c in (e3, e2, e1, e0):
        if c > 0:
            return 1
        if c < 0:
            return -1
    return 0


@njit(cache=True, nogil=True)
def _in_semicircle(ax, ay, bx, by):
    """Is b in the half-open angular range [angle(a), angle(a) + pi)?"""
    s = cross_sign(ax, ay, bx, by)
    if s > 0:
        return True
    if s < 0:
        return False
    # exactly parallel: same direction iff component signs agree
    return (ax > 0) == (bx > 0) and (ax < 0) == (bx < 0) and \
        (ay > 0) == (by > 0) and (ay < 0) == (by < 0)


@njit(cache=True, nogil=True)
def _depth_count(qx, qy, rx, ry):
    m = rx.shape[0]
    dx = np.empty(m)
    dy = np.empty(m)
    coincident = 0
    n = 0
    for j in range(m):
        ux = rx[j] - qx
        uy = ry[j] - qy
        if ux == 0.0 and uy == 0.0:
            coincident += 1
        else:
            dx[n] = ux
            dy[n] = uy
            n += 1
    if n == 0:
        return coincident
    ang = np.empty(n)
    for j in range(n):
        ang[j] = math.atan2(dy[j], dx[j])
    order = np.argsort(ang)
    a = ang[order]
    sx = dx[order]
    sy = dy[order]
    # three copies so every window of length 2*pi is contiguous
    a3 = np.empty(3 * n)
    for j in range(n):
        a3[j] = a[j] - _TWO_PI
        a3[n + j] = a[j]
        a3[2 * n + j] = a[j] + _TWO_PI
    best = 0
    # window boundaries only move forward as i advances
    lo = 0
    in_lo = 0
    in_hi = 0
    hi = 0
    for i in range(n):
        ai = a[i]
        while a3[lo] < ai - _FRINGE:
            lo += 1
        if in_lo < lo:
            in_lo = lo
        while a3[in_lo] < ai + _FRINGE:
            in_lo += 1
        if in_hi < in_lo:
            in_hi = in_lo
        while a3[in_hi] < ai + math.pi - _FRINGE:
            in_hi += 1
        if hi < in_hi:
            hi = in_hi
        while hi < 3 * n and a3[hi] <= ai + math.pi + _FRINGE:
            hi += 1
        count = in_hi - in_lo
        for k in range(lo, in_lo):
            j = k % n
            if j == i or _in_semicircle(sx[i], sy[i], sx[j], sy[j]):
                count += 1
        for k in range(in_hi, hi):
            j = k % n
            if _in_semicircle(sx[i], sy[i], sx[j], sy[j]):
                count += 1
        if count > best:
            best = count
    # complement of the fullest open halfplane, plus points at the query
    return coincident + n - best


@njit(cache=True, nogil=True)
def depth_counts(qx, qy, rx, ry):
    """Closed-halfplane minimum counts of each query against the reference."""
    out = np.empty(qx.shape[0], dtype=np.int64)
    for i in range(qx.shape[0]):
        out[i] = _depth_count(qx[i], qy[i], rx, ry)
    return out


@njit(cache=True, nogil=True)
def angle_rows(qx, qy, rx, ry):
    """Angles from each query to every reference point.

    Points coincident with the query get +inf so they sort to the end of
    their row; their number is returned separately.
    """
    k = qx.shape[0]
    m = rx.shape[0]
    out = np.empty((k, m))
    coincident = np.zeros(k, dtype=np.int64)
    for i in range(k):
        for j in range(m):
            ux = rx[j] - qx[i]
            uy = ry[j] - qy[i]
            if ux == 0.0 and uy == 0.0:
                out[i, j] = np.inf
                coincident[i] += 1
            else:
                out[i, j] = math.atan2(uy, ux)
    return out, coincident


@njit(cache=True, nogil=True)
def _sweep_sorted(a, n):
    # returns -1 when some point sits within the fringe of a boundary
    if n == 0:
        return 0
    for j in range(1, n):
        if a[j] - a[j - 1] < _FRINGE:
            return -1
    if a[0] + _TWO_PI - a[n - 1] < _FRINGE:
        return -1
    best = 0
    hi = 0
    for i in range(n):
        target = a[i] + math.pi
        # pointer over the doubled sequence a[0..n) + (a[0..n) + 2pi)
        if hi < i:
            hi = i
        while hi < i + n:
            v = a[hi] if hi < n else a[hi - n] + _TWO_PI
            if v < target - _FRINGE:
                hi += 1
            elif v <= target + _FRINGE:
                return -1
            else:
                break
        count = hi - i
        if count > best:
            best = count
    return n - best


@njit(cache=True, nogil=True)
def sweep_rows(sorted_angles, coincident):
    """Depth counts from row-sorted angles; -1 marks rows needing the exact kernel."""
    k, m = sorted_angles.shape
    out = np.empty(k, dtype=np.int64)
    for i in range(k):
        n = m - coincident[i]
        c = _sweep_sorted(sorted_angles[i], n)
        out[i] = -1 if c < 0 else c + coincident[i]
    return out
