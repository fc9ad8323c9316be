# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled SGD epochs. Same contract as ``_kernels_py``."""

import numpy as np
from libc.math cimport exp, INFINITY


def glvq_epoch(const double[:, ::1] X, const long[::1] y, const long[::1] order,
               double[:, ::1] W, const long[::1] wlabels,
               double[:, :, ::1] omegas, const long[::1] omega_idx,
               double lr_w, double lr_m, bint learn_metric):
    cdef Py_ssize_t J = W.shape[0], n = W.shape[1]
    cdef double[:, ::1] diff = np.empty((J, n))
    cdef double[:, ::1] z = np.empty((J, n))
    cdef double[::1] d = np.empty(J)
    cdef double[::1] step_p = np.empty(n)
    cdef double[::1] step_m = np.empty(n)
    cdef double[:, ::1] grad_p = np.empty((n, n))
    cdef double[:, ::1] grad_m = np.empty((n, n))
    cdef Py_ssize_t t, i, j, a, b, jp, jm, op, om
    cdef long c
    cdef double acc, dp, dm, s, xi_p, xi_m

    for t in range(order.shape[0]):
        i = order[t]
        c = y[i]
        for j in range(J):
            for a in range(n):
                diff[j, a] = X[i, a] - W[j, a]
            d[j] = 0.0
            for a in range(n):
                acc = 0.0
                for b in range(n):
                    acc += omegas[omega_idx[j], a, b] * diff[j, b]
                z[j, a] = acc
                d[j] += acc * acc
        jp = -1
        jm = -1
        for j in range(J):
            if wlabels[j] == c:
                if jp < 0 or d[j] < d[jp]:
                    jp = j
            elif jm < 0 or d[j] < d[jm]:
                jm = j
        dp = d[jp]
        dm = d[jm]
        s = dp + dm
        if s <= 0.0:
            continue
        xi_p = 2.0 * dm / (s * s)
        xi_m = 2.0 * dp / (s * s)
        op = omega_idx[jp]
        om = omega_idx[jm]
        for b in range(n):
            step_p[b] = 0.0
            step_m[b] = 0.0
            for a in range(n):
                step_p[b] += omegas[op, a, b] * z[jp, a]
                step_m[b] += omegas[om, a, b] * z[jm, a]
            step_p[b] *= 2.0 * xi_p
            step_m[b] *= 2.0 * xi_m
        if learn_metric:
            for a in range(n):
                for b in range(n):
                    grad_p[a, b] = 2.0 * xi_p * z[jp, a] * diff[jp, b]
                    grad_m[a, b] = -2.0 * xi_m * z[jm, a] * diff[jm, b]
        for b in range(n):
            W[jp, b] += lr_w * step_p[b]
            W[jm, b] -= lr_w * step_m[b]
        if learn_metric:
            for a in range(n):
                for b in range(n):
                    omegas[op, a, b] -= lr_m * grad_p[a, b]
            for a in range(n):
                for b in range(n):
                    omegas[om, a, b] -= lr_m * grad_m[a, b]


def rslvq_epoch(const double[:, ::1] X, const long[::1] y, const long[::1] order,
                double[:, ::1] W, const long[::1] wlabels, double sigma, double lr):
    cdef Py_ssize_t J = W.shape[0], n = W.shape[1]
    cdef double[:, ::1] diff = np.empty((J, n))
    cdef double[::1] act = np.empty(J)
    cdef double[::1] p = np.empty(J)
    cdef double[::1] py = np.empty(J)
    cdef Py_ssize_t t, i, j, b
    cdef long c
    cdef double s2 = sigma * sigma, amax, aymax, tot, toty, g

    for t in range(order.shape[0]):
        i = order[t]
        c = y[i]
        amax = -INFINITY
        aymax = -INFINITY
        for j in range(J):
            act[j] = 0.0
            for b in range(n):
                diff[j, b] = X[i, b] - W[j, b]
                act[j] += diff[j, b] * diff[j, b]
            act[j] = -act[j] / (2.0 * s2)
            if act[j] > amax:
                amax = act[j]
            if wlabels[j] == c and act[j] > aymax:
                aymax = act[j]
        tot = 0.0
        toty = 0.0
        for j in range(J):
            p[j] = exp(act[j] - amax)
            tot += p[j]
            if wlabels[j] == c:
                py[j] = exp(act[j] - aymax)
                toty += py[j]
            else:
                py[j] = 0.0
        for j in range(J):
            g = (lr / s2) * (py[j] / toty - p[j] / tot)
            for b in range(n):
                W[j, b] += g * diff[j, b]
