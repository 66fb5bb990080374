# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the `_fallback` kernels (same contracts)."""

import numpy as np

from libc.math cimport INFINITY, log


def rate_logsum(double u_re, double u_im, double s_re, double s_im,
                double[::1] c_re, double[::1] c_im):
    cdef Py_ssize_t t, T = c_re.shape[0]
    cdef double acc = 0.0, xr, xi
    for t in range(T):
        xr = u_re + c_re[t] * s_re - c_im[t] * s_im
        xi = u_im + c_re[t] * s_im + c_im[t] * s_re
        acc += log(1.0 + xr * xr + xi * xi)
    return acc


def barrier_fgh(double[::1] x, double[::1] gobj, double[:, ::1] A,
                double[::1] e, double klog, double q, double r0,
                double eps_dom, int ball_kind, double r2, double t,
                int rate_active, int mode, double[::1] grad,
                double[:, ::1] hess):
    cdef Py_ssize_t n = x.shape[0], T = A.shape[0]
    cdef Py_ssize_t i, j, k, h
    cdef double psi, xx, s0, slack, rv, st, sd, w, coef, c1, c2, cross
    cdef double[::1] s_arr, grad_rv
    cdef double inv_sd, inv_s

    xx = 0.0
    for i in range(n):
        xx += x[i] * x[i]
    psi = 0.0
    for i in range(n):
        psi -= gobj[i] * x[i]
    psi *= t

    s0 = 0.0
    h = n // 2
    if ball_kind == 0:
        s0 = r2 - xx
        if s0 <= 0.0:
            return INFINITY, 0
        psi -= log(s0)
    else:
        for i in range(h):
            slack = r2 - x[i] * x[i] - x[i + h] * x[i + h]
            if slack <= 0.0:
                return INFINITY, 0
            psi -= log(slack)

    s_arr = np.empty(T)
    rv = 0.0
    if rate_active:
        rv = -q * xx - r0
        for k in range(T):
            st = e[k]
            for i in range(n):
                st += A[k, i] * x[i]
            if st - eps_dom <= 0.0:
                return INFINITY, 0
            s_arr[k] = st
            rv += klog * log(st)
            psi -= log(st - eps_dom)
        if rv <= 0.0:
            return INFINITY, 0
        psi -= log(rv)

    if mode == 0:
        return psi, 1

    for i in range(n):
        grad[i] = -t * gobj[i]
        for j in range(n):
            hess[i, j] = 0.0

    if ball_kind == 0:
        c1 = 2.0 / s0
        c2 = 4.0 / (s0 * s0)
        for i in range(n):
            grad[i] += c1 * x[i]
            hess[i, i] += c1
            for j in range(n):
                hess[i, j] += c2 * x[i] * x[j]
    else:
        for i in range(h):
            slack = r2 - x[i] * x[i] - x[i + h] * x[i + h]
            c1 = 2.0 / slack
            c2 = 4.0 / (slack * slack)
            grad[i] += c1 * x[i]
            grad[i + h] += c1 * x[i + h]
            hess[i, i] += c1 + c2 * x[i] * x[i]
            hess[i + h, i + h] += c1 + c2 * x[i + h] * x[i + h]
            cross = c2 * x[i] * x[i + h]
            hess[i, i + h] += cross
            hess[i + h, i] += cross

    if rate_active:
        grad_rv = np.empty(n)
        for i in range(n):
            grad_rv[i] = -2.0 * q * x[i]
        for k in range(T):
            inv_s = 1.0 / s_arr[k]
            coef = klog * inv_s
            for i in range(n):
                grad_rv[i] += coef * A[k, i]
        for k in range(T):
            inv_sd = 1.0 / (s_arr[k] - eps_dom)
            inv_s = 1.0 / s_arr[k]
            # domain barrier gradient plus fused Hessian row weight
            w = inv_sd * inv_sd + (klog * inv_s * inv_s) / rv
            for i in range(n):
                grad[i] -= inv_sd * A[k, i]
                coef = w * A[k, i]
                for j in range(i, n):
                    hess[i, j] += coef * A[k, j]
        for i in range(n):
            grad[i] -= grad_rv[i] / rv
            coef = grad_rv[i] / (rv * rv)
            for j in range(i, n):
                hess[i, j] += coef * grad_rv[j]
            if q != 0.0:
                hess[i, i] += 2.0 * q / rv
        # symmetrize the upper-triangular accumulation
        for i in range(n):
            for j in range(i + 1, n):
                hess[j, i] = hess[i, j]

    return psi, 1
