"""Pure-Python geometry kernels.

Reference implementation of the hot loops. ``_core.pyx`` mirrors every
function here expression-for-expression so that the compiled and fallback
backends produce bit-identical doubles; any change to a formula in this file
must be copied verbatim into the Cython source.

Conventions shared by both backends:
  * ``segs`` is a C-contiguous float64 array of shape (E, 4): ax, ay, bx, by.
  * ``eps_u`` is a float64 array of shape (E,): 1e-9 / segment_length, the
    endpoint-inclusion tolerance on the segment parameter (keeps rays from
    slipping through shared vertices of adjacent walls).
  * Ray directions passed in are unit length.
  * A returned distance of -1.0 means "no intersection".
"""

import math

import numpy as np

BACKEND = "pure"

_RAY_T_EPS = 1e-9


def ray_segment(ox, oy, dx, dy, ax, ay, bx, by, eps):
    """Smallest t >= 0 with origin + t*dir on segment [a, b], else -1.0.

    ``eps`` is the u-parameter tolerance (1e-9 / segment length). Collinear
    overlap returns the nearest overlapped point's t.
    """
    ex = bx - ax
    ey = by - ay
    denom = dx * ey - dy * ex
    aox = ax - ox
    aoy = ay - oy
    if denom == 0.0:
        cross_ao = aox * dy - aoy * dx
        if abs(cross_ao) > _RAY_T_EPS:
            return -1.0
        ta = aox * dx + aoy * dy
        tb = ta + (ex * dx + ey * dy)
        if ta < tb:
            lo = ta
            hi = tb
        else:
            lo = tb
            hi = ta
        if hi < -_RAY_T_EPS:
            return -1.0
        if lo > 0.0:
            return lo
        return 0.0
    t_num = aox * ey - aoy * ex
    u_num = aox * dy - aoy * dx
    if denom > 0.0:
        if u_num < -eps * denom or u_num > (1.0 + eps) * denom:
            return -1.0
        if t_num < -_RAY_T_EPS * denom:
            return -1.0
    else:
        if u_num > -eps * denom or u_num < (1.0 + eps) * denom:
            return -1.0
        if t_num > -_RAY_T_EPS * denom:
            return -1.0
    t = t_num / denom
    if t > 0.0:
        return t
    return 0.0


def cast_ray(segs, eps_u, ox, oy, dx, dy, max_range):
    """Nearest edge hit along a unit ray: (distance, edge index or -1)."""
    best = max_range
    best_idx = -1
    for i in range(segs.shape[0]):
        t = ray_segment(
            ox, oy, dx, dy, segs[i, 0], segs[i, 1], segs[i, 2], segs[i, 3], eps_u[i]
        )
        if t >= 0.0 and t < best:
            best = t
            best_idx = i
    return best, best_idx


def depth_sweep(segs, eps_u, ox, oy, dirs, max_range):
    """Cast one ray per row of ``dirs`` (unit direction vectors, shape (K, 2)).

    The caller computes the directions so both kernel backends consume
    exactly the same doubles (compilers may fuse cos/sin into sincos, which
    can differ from separate libm calls by an ulp).
    """
    k = dirs.shape[0]
    dists = np.empty(k, dtype=np.float64)
    idxs = np.empty(k, dtype=np.int32)
    for j in range(k):
        d, idx = cast_ray(segs, eps_u, ox, oy, dirs[j, 0], dirs[j, 1], max_range)
        dists[j] = d
        idxs[j] = idx
    return dists, idxs


def point_segment_distance(px, py, ax, ay, bx, by):
    """Euclidean distance from point p to segment [a, b]."""
    ex = bx - ax
    ey = by - ay
    wx = px - ax
    wy = py - ay
    c1 = wx * ex + wy * ey
    if c1 <= 0.0:
        return math.sqrt(wx * wx + wy * wy)
    c2 = ex * ex + ey * ey
    if c1 >= c2:
        ux = px - bx
        uy = py - by
        return math.sqrt(ux * ux + uy * uy)
    t = c1 / c2
    qx = ax + t * ex
    qy = ay + t * ey
    vx = px - qx
    vy = py - qy
    return math.sqrt(vx * vx + vy * vy)


def min_clearance(segs, px, py):
    """Distance from p to the nearest wall segment (inf on an empty map)."""
    best = math.inf
    for i in range(segs.shape[0]):
        d = point_segment_distance(px, py, segs[i, 0], segs[i, 1], segs[i, 2], segs[i, 3])
        if d < best:
            best = d
    return best


def segment_blocked(segs, eps_u, px, py, qx, qy):
    """True if any wall edge blocks the open segment (p, q).

    Intersections exactly at p or q (within 1e-9 world units) do not block;
    touching a wall within its endpoint tolerance does.
    """
    rx = qx - px
    ry = qy - py
    rlen = math.sqrt(rx * rx + ry * ry)
    eps_t = _RAY_T_EPS / rlen
    for i in range(segs.shape[0]):
        ax = segs[i, 0]
        ay = segs[i, 1]
        ex = segs[i, 2] - ax
        ey = segs[i, 3] - ay
        denom = rx * ey - ry * ex
        apx = ax - px
        apy = ay - py
        if denom == 0.0:
            cross_ap = apx * ry - apy * rx
            if abs(cross_ap) > _RAY_T_EPS * rlen:
                continue
            inv_r2 = 1.0 / (rlen * rlen)
            ta = (apx * rx + apy * ry) * inv_r2
            tb = ta + (ex * rx + ey * ry) * inv_r2
            if ta < tb:
                lo = ta
                hi = tb
            else:
                lo = tb
                hi = ta
            if hi > eps_t and lo < 1.0 - eps_t:
                return True
            continue
        t_num = apx * ey - apy * ex
        u_num = apx * ry - apy * rx
        eps = eps_u[i]
        if denom > 0.0:
            if u_num < -eps * denom or u_num > (1.0 + eps) * denom:
                continue
            if t_num <= eps_t * denom or t_num >= (1.0 - eps_t) * denom:
                continue
        else:
            if u_num > -eps * denom or u_num < (1.0 + eps) * denom:
                continue
            if t_num >= eps_t * denom or t_num <= (1.0 - eps_t) * denom:
                continue
        return True
    return False
