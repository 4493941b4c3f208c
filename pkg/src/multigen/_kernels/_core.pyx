# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled geometry kernels.

Expression-for-expression mirror of ``_pure.py``; both backends must return
bit-identical doubles, so keep the two files in sync. The ray/segment
intersection logic is manually inlined into each hot loop (the compiler
declines to inline the shared helper, costing ~15x).
"""

from libc.math cimport fabs, sqrt

import numpy as np

BACKEND = "compiled"

cdef double _RAY_T_EPS = 1e-9
cdef double _INF = float("inf")


cdef inline double _ray_segment(double ox, double oy, double dx, double dy,
                                double ax, double ay, double bx, double by,
                                double eps) nogil:
    # Scalar reference; the loops below inline the same expressions.
    cdef double ex, ey, denom, aox, aoy, cross_ao, ta, tb, lo, hi, t_num, u_num, t
    ex = bx - ax
    ey = by - ay
    denom = dx * ey - dy * ex
    aox = ax - ox
    aoy = ay - oy
    if denom == 0.0:
        cross_ao = aox * dy - aoy * dx
        if fabs(cross_ao) > _RAY_T_EPS:
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


def ray_segment(double ox, double oy, double dx, double dy,
                double ax, double ay, double bx, double by, double eps):
    return _ray_segment(ox, oy, dx, dy, ax, ay, bx, by, eps)


cdef inline double _cast_ray_ptr(const double* sp, const double* ep, Py_ssize_t n_edges,
                                 double ox, double oy, double dx, double dy,
                                 double max_range, int* out_i) nogil:
    cdef double best = max_range
    cdef int best_idx = -1
    cdef Py_ssize_t i
    cdef double ax, ay, ex, ey, denom, aox, aoy, cross_ao, ta, tb, lo, hi
    cdef double t_num, u_num, eps, t
    for i in range(n_edges):
        ax = sp[4 * i]
        ay = sp[4 * i + 1]
        ex = sp[4 * i + 2] - ax
        ey = sp[4 * i + 3] - ay
        denom = dx * ey - dy * ex
        aox = ax - ox
        aoy = ay - oy
        if denom == 0.0:
            cross_ao = aox * dy - aoy * dx
            if fabs(cross_ao) > _RAY_T_EPS:
                continue
            ta = aox * dx + aoy * dy
            tb = ta + (ex * dx + ey * dy)
            if ta < tb:
                lo = ta
                hi = tb
            else:
                lo = tb
                hi = ta
            if hi < -_RAY_T_EPS:
                continue
            if lo > 0.0:
                t = lo
            else:
                t = 0.0
        else:
            t_num = aox * ey - aoy * ex
            u_num = aox * dy - aoy * dx
            eps = ep[i]
            if denom > 0.0:
                if u_num < -eps * denom or u_num > (1.0 + eps) * denom:
                    continue
                if t_num < -_RAY_T_EPS * denom:
                    continue
            else:
                if u_num > -eps * denom or u_num < (1.0 + eps) * denom:
                    continue
                if t_num > -_RAY_T_EPS * denom:
                    continue
            t = t_num / denom
            if t <= 0.0:
                t = 0.0
        if t < best:
            best = t
            best_idx = <int>i
    out_i[0] = best_idx
    return best


def cast_ray(const double[:, ::1] segs, const double[::1] eps_u,
             double ox, double oy, double dx, double dy, double max_range):
    cdef Py_ssize_t n_edges = segs.shape[0]
    cdef int idx = -1
    cdef double d = max_range
    if n_edges > 0:
        d = _cast_ray_ptr(&segs[0, 0], &eps_u[0], n_edges, ox, oy, dx, dy, max_range, &idx)
    return d, idx


def depth_sweep(const double[:, ::1] segs, const double[::1] eps_u,
                double ox, double oy, const double[:, ::1] dirs, double max_range):
    # The caller supplies unit directions; see the note in _pure.depth_sweep.
    cdef Py_ssize_t k = dirs.shape[0]
    dists_arr = np.empty(k, dtype=np.float64)
    idxs_arr = np.empty(k, dtype=np.int32)
    cdef double[::1] dists = dists_arr
    cdef int[::1] idxs = idxs_arr
    cdef Py_ssize_t n_edges = segs.shape[0]
    cdef const double* sp = NULL
    cdef const double* ep = NULL
    if n_edges > 0:
        sp = &segs[0, 0]
        ep = &eps_u[0]
    cdef Py_ssize_t j
    cdef int idx
    with nogil:
        for j in range(k):
            idx = -1
            if n_edges > 0:
                dists[j] = _cast_ray_ptr(sp, ep, n_edges, ox, oy, dirs[j, 0], dirs[j, 1], max_range, &idx)
            else:
                dists[j] = max_range
            idxs[j] = idx
    return dists_arr, idxs_arr


cdef inline double _point_segment_distance(double px, double py, double ax, double ay,
                                           double bx, double by) nogil:
    cdef double ex, ey, wx, wy, c1, c2, t, qx, qy, vx, vy, ux, uy
    ex = bx - ax
    ey = by - ay
    wx = px - ax
    wy = py - ay
    c1 = wx * ex + wy * ey
    if c1 <= 0.0:
        return sqrt(wx * wx + wy * wy)
    c2 = ex * ex + ey * ey
    if c1 >= c2:
        ux = px - bx
        uy = py - by
        return sqrt(ux * ux + uy * uy)
    t = c1 / c2
    qx = ax + t * ex
    qy = ay + t * ey
    vx = px - qx
    vy = py - qy
    return sqrt(vx * vx + vy * vy)


def point_segment_distance(double px, double py, double ax, double ay,
                           double bx, double by):
    return _point_segment_distance(px, py, ax, ay, bx, by)


def min_clearance(const double[:, ::1] segs, double px, double py):
    cdef double best = _INF
    cdef Py_ssize_t n_edges = segs.shape[0]
    if n_edges == 0:
        return best
    cdef const double* sp = &segs[0, 0]
    cdef Py_ssize_t i
    # Inlined point-segment distance; keep in sync with the scalar above.
    cdef double ax, ay, bx, by, ex, ey, wx, wy, c1, c2, t, qx, qy, vx, vy, ux, uy, d
    with nogil:
        for i in range(n_edges):
            ax = sp[4 * i]
            ay = sp[4 * i + 1]
            bx = sp[4 * i + 2]
            by = sp[4 * i + 3]
            ex = bx - ax
            ey = by - ay
            wx = px - ax
            wy = py - ay
            c1 = wx * ex + wy * ey
            if c1 <= 0.0:
                d = sqrt(wx * wx + wy * wy)
            else:
                c2 = ex * ex + ey * ey
                if c1 >= c2:
                    ux = px - bx
                    uy = py - by
                    d = sqrt(ux * ux + uy * uy)
                else:
                    t = c1 / c2
                    qx = ax + t * ex
                    qy = ay + t * ey
                    vx = px - qx
                    vy = py - qy
                    d = sqrt(vx * vx + vy * vy)
            if d < best:
                best = d
    return best


def segment_blocked(const double[:, ::1] segs, const double[::1] eps_u,
                    double px, double py, double qx, double qy):
    cdef Py_ssize_t n_edges = segs.shape[0]
    if n_edges == 0:
        return False
    cdef const double* sp = &segs[0, 0]
    cdef const double* ep = &eps_u[0]
    cdef double rx, ry, rlen, eps_t
    cdef double ax, ay, ex, ey, denom, apx, apy, cross_ap, inv_r2, ta, tb, lo, hi
    cdef double t_num, u_num, eps
    cdef Py_ssize_t i
    cdef bint hit = False
    rx = qx - px
    ry = qy - py
    rlen = sqrt(rx * rx + ry * ry)
    eps_t = _RAY_T_EPS / rlen
    with nogil:
        for i in range(n_edges):
            ax = sp[4 * i]
            ay = sp[4 * i + 1]
            ex = sp[4 * i + 2] - ax
            ey = sp[4 * i + 3] - ay
            denom = rx * ey - ry * ex
            apx = ax - px
            apy = ay - py
            if denom == 0.0:
                cross_ap = apx * ry - apy * rx
                if fabs(cross_ap) > _RAY_T_EPS * rlen:
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
                    hit = True
                    break
                continue
            t_num = apx * ey - apy * ex
            u_num = apx * ry - apy * rx
            eps = ep[i]
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
            hit = True
            break
    return hit
