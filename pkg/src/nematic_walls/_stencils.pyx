# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled stencil kernels: signature-identical twins of _stencils_py.

Single-pass C loops over the node arrays; the pure-numpy module remains
the behavioural reference (equivalence is tested to roundoff.)
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()

ctypedef cnp.float64_t f64


def rect_node_weights(int n1, int n2, double hx, double hy, bint periodic_x):
    W = np.full((n1, n2), hx * hy)
    W[:, 0] *= 0.5
    W[:, n2 - 1] *= 0.5
    if not periodic_x:
        W[0, :] *= 0.5
        W[n1 - 1, :] *= 0.5
    return W


def rect_grad_form(cnp.ndarray[f64, ndim=3] u, double hx, double hy,
                   bint periodic_x):
    cdef int n1 = u.shape[0], n2 = u.shape[1]
    cdef int i, j, c, ip
    cdef double total = 0.0, cx, cy, d
    cdef double base_cx = hy / hx, base_cy = hx / hy
    for i in range(n1):
        ip = i + 1
        if ip == n1:
            if not periodic_x:
                break
            ip = 0
        for j in range(n2):
            cx = base_cx if 0 < j < n2 - 1 else 0.5 * base_cx
            for c in range(2):
                d = u[ip, j, c] - u[i, j, c]
                total += cx * d * d
    for i in range(n1):
        cy = base_cy
        if not periodic_x and (i == 0 or i == n1 - 1):
            cy = 0.5 * base_cy
        for j in range(n2 - 1):
            for c in range(2):
                d = u[i, j + 1, c] - u[i, j, c]
                total += cy * d * d
    return total


def rect_grad_op(cnp.ndarray[f64, ndim=3] u, double hx, double hy,
                 bint periodic_x):
    cdef int n1 = u.shape[0], n2 = u.shape[1]
    cdef cnp.ndarray[f64, ndim=3] out = np.zeros((n1, n2, 2))
    cdef int i, j, c, ip
    cdef double cx, cy, d
    cdef double base_cx = hy / hx, base_cy = hx / hy
    for i in range(n1):
        ip = i + 1
        if ip == n1:
            if not periodic_x:
                break
            ip = 0
        for j in range(n2):
            cx = base_cx if 0 < j < n2 - 1 else 0.5 * base_cx
            for c in range(2):
                d = cx * (u[ip, j, c] - u[i, j, c])
                out[i, j, c] -= d
                out[ip, j, c] += d
    for i in range(n1):
        cy = base_cy
        if not periodic_x and (i == 0 or i == n1 - 1):
            cy = 0.5 * base_cy
        for j in range(n2 - 1):
            for c in range(2):
                d = cy * (u[i, j + 1, c] - u[i, j, c])
                out[i, j, c] -= d
                out[i, j + 1, c] += d
    return out


def rect_div_form(cnp.ndarray[f64, ndim=3] u, double hx, double hy,
                  bint periodic_x):
    cdef int n1 = u.shape[0], n2 = u.shape[1]
    cdef int i, j, ip
    cdef double total = 0.0, div, m = hx * hy
    for i in range(n1):
        ip = i + 1
        if ip == n1:
            if not periodic_x:
                break
            ip = 0
        for j in range(n2 - 1):
            div = ((u[ip, j, 0] + u[ip, j + 1, 0]
                    - u[i, j, 0] - u[i, j + 1, 0]) / (2.0 * hx)
                   + (u[i, j + 1, 1] + u[ip, j + 1, 1]
                      - u[i, j, 1] - u[ip, j, 1]) / (2.0 * hy))
            total += m * div * div
    return total


def rect_div_op(cnp.ndarray[f64, ndim=3] u, double hx, double hy,
                bint periodic_x):
    cdef int n1 = u.shape[0], n2 = u.shape[1]
    cdef cnp.ndarray[f64, ndim=3] out = np.zeros((n1, n2, 2))
    cdef int i, j, ip
    cdef double div, g, gx, gy, m = hx * hy
    for i in range(n1):
        ip = i + 1
        if ip == n1:
            if not periodic_x:
                break
            ip = 0
        for j in range(n2 - 1):
            div = ((u[ip, j, 0] + u[ip, j + 1, 0]
                    - u[i, j, 0] - u[i, j + 1, 0]) / (2.0 * hx)
                   + (u[i, j + 1, 1] + u[ip, j + 1, 1]
                      - u[i, j, 1] - u[ip, j, 1]) / (2.0 * hy))
            g = m * div
            gx = g / (2.0 * hx)
            gy = g / (2.0 * hy)
            out[ip, j, 0] += gx
            out[ip, j + 1, 0] += gx
            out[i, j, 0] -= gx
            out[i, j + 1, 0] -= gx
            out[i, j + 1, 1] += gy
            out[ip, j + 1, 1] += gy
            out[i, j, 1] -= gy
            out[ip, j, 1] -= gy
    return out


def polar_node_weights(cnp.ndarray[f64, ndim=1] rs, double dr, double dt):
    cdef int n1 = rs.shape[0]
    wr = np.ones(n1)
    wr[0] = wr[n1 - 1] = 0.5
    return (dr * dt) * (np.asarray(rs) * wr)[:, None]


def polar_grad_form(cnp.ndarray[f64, ndim=3] u, cnp.ndarray[f64, ndim=1] rs,
                    double dr, double dt):
    cdef int n1 = u.shape[0], n2 = u.shape[1]
    cdef int i, j, c, jp
    cdef double total = 0.0, ce, d, wr
    for i in range(n1 - 1):
        ce = 0.5 * (rs[i] + rs[i + 1]) * dt / dr
        for j in range(n2):
            for c in range(2):
                d = u[i + 1, j, c] - u[i, j, c]
                total += ce * d * d
    for i in range(n1):
        wr = 0.5 if (i == 0 or i == n1 - 1) else 1.0
        ce = wr * dr / (rs[i] * dt)
        for j in range(n2):
            jp = j + 1 if j + 1 < n2 else 0
            for c in range(2):
                d = u[i, jp, c] - u[i, j, c]
                total += ce * d * d
    return total


def polar_grad_op(cnp.ndarray[f64, ndim=3] u, cnp.ndarray[f64, ndim=1] rs,
                  double dr, double dt):
    cdef int n1 = u.shape[0], n2 = u.shape[1]
    cdef cnp.ndarray[f64, ndim=3] out = np.zeros((n1, n2, 2))
    cdef int i, j, c, jp
    cdef double ce, d, wr
    for i in range(n1 - 1):
        ce = 0.5 * (rs[i] + rs[i + 1]) * dt / dr
        for j in range(n2):
            for c in range(2):
                d = ce * (u[i + 1, j, c] - u[i, j, c])
                out[i, j, c] -= d
                out[i + 1, j, c] += d
    for i in range(n1):
        wr = 0.5 if (i == 0 or i == n1 - 1) else 1.0
        ce = wr * dr / (rs[i] * dt)
        for j in range(n2):
            jp = j + 1 if j + 1 < n2 else 0
            for c in range(2):
                d = ce * (u[i, jp, c] - u[i, j, c])
                out[i, j, c] -= d
                out[i, jp, c] += d
    return out


def polar_div_form(cnp.ndarray[f64, ndim=3] u, cnp.ndarray[f64, ndim=1] rs,
                   cnp.ndarray[f64, ndim=1] ts, double dr, double dt):
    cdef int n1 = u.shape[0], n2 = u.shape[1]
    cdef int i, j, jp
    cdef double total = 0.0, rc, ct, st, dr1, dr2, dt1, dt2, div, m
    cdef cnp.ndarray[f64, ndim=1] cts = np.cos(np.asarray(ts) + 0.5 * dt)
    cdef cnp.ndarray[f64, ndim=1] sts = np.sin(np.asarray(ts) + 0.5 * dt)
    for i in range(n1 - 1):
        rc = 0.5 * (rs[i] + rs[i + 1])
        m = rc * dr * dt
        for j in range(n2):
            jp = j + 1 if j + 1 < n2 else 0
            ct = cts[j]
            st = sts[j]
            dr1 = (u[i + 1, j, 0] + u[i + 1, jp, 0]
                   - u[i, j, 0] - u[i, jp, 0]) / (2.0 * dr)
            dr2 = (u[i + 1, j, 1] + u[i + 1, jp, 1]
                   - u[i, j, 1] - u[i, jp, 1]) / (2.0 * dr)
            dt1 = (u[i, jp, 0] + u[i + 1, jp, 0]
                   - u[i, j, 0] - u[i + 1, j, 0]) / (2.0 * dt)
            dt2 = (u[i, jp, 1] + u[i + 1, jp, 1]
                   - u[i, j, 1] - u[i + 1, j, 1]) / (2.0 * dt)
            div = ct * dr1 + st * dr2 + (-st * dt1 + ct * dt2) / rc
            total += m * div * div
    return total


def polar_div_op(cnp.ndarray[f64, ndim=3] u, cnp.ndarray[f64, ndim=1] rs,
                 cnp.ndarray[f64, ndim=1] ts, double dr, double dt):
    cdef int n1 = u.shape[0], n2 = u.shape[1]
    cdef cnp.ndarray[f64, ndim=3] out = np.zeros((n1, n2, 2))
    cdef int i, j, jp
    cdef double rc, ct, st, dr1, dr2, dt1, dt2, div, g
    cdef double gr1, gr2, gt1, gt2
    cdef cnp.ndarray[f64, ndim=1] cts = np.cos(np.asarray(ts) + 0.5 * dt)
    cdef cnp.ndarray[f64, ndim=1] sts = np.sin(np.asarray(ts) + 0.5 * dt)
    for i in range(n1 - 1):
        rc = 0.5 * (rs[i] + rs[i + 1])
        for j in range(n2):
            jp = j + 1 if j + 1 < n2 else 0
            ct = cts[j]
            st = sts[j]
            dr1 = (u[i + 1, j, 0] + u[i + 1, jp, 0]
                   - u[i, j, 0] - u[i, jp, 0]) / (2.0 * dr)
            dr2 = (u[i + 1, j, 1] + u[i + 1, jp, 1]
                   - u[i, j, 1] - u[i, jp, 1]) / (2.0 * dr)
            dt1 = (u[i, jp, 0] + u[i + 1, jp, 0]
                   - u[i, j, 0] - u[i + 1, j, 0]) / (2.0 * dt)
            dt2 = (u[i, jp, 1] + u[i + 1, jp, 1]
                   - u[i, j, 1] - u[i + 1, j, 1]) / (2.0 * dt)
            div = ct * dr1 + st * dr2 + (-st * dt1 + ct * dt2) / rc
            g = (dr * dt) * rc * div
            gr1 = g * ct / (2.0 * dr)
            gr2 = g * st / (2.0 * dr)
            gt1 = g * (-st) / (2.0 * dt * rc)
            gt2 = g * ct / (2.0 * dt * rc)
            out[i, j, 0] += -gr1 - gt1
            out[i, j, 1] += -gr2 - gt2
            out[i + 1, j, 0] += gr1 - gt1
            out[i + 1, j, 1] += gr2 - gt2
            out[i, jp, 0] += -gr1 + gt1
            out[i, jp, 1] += -gr2 + gt2
            out[i + 1, jp, 0] += gr1 + gt1
            out[i + 1, jp, 1] += gr2 + gt2
    return out
