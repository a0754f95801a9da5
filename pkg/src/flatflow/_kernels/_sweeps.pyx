# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled sweep kernels for the primal-dual solvers.

Arithmetic mirrors numpy_backend.py operation-for-operation; together with
-ffp-contract=off this keeps the two backends bit-identical.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def dual_sweep(double[:, :, ::1] p, double[:, ::1] ubar, double sigma,
               double[::1] betas, Py_ssize_t[:, ::1] offsets):
    cdef Py_ssize_t ndir = p.shape[0]
    cdef Py_ssize_t n = p.shape[1]
    cdef Py_ssize_t m = p.shape[2]
    cdef Py_ssize_t d, i, j, a, b, ia, jb
    cdef double t, pd, beta
    for d in range(ndir):
        a = offsets[d, 0]
        b = offsets[d, 1]
        beta = betas[d]
        for i in range(n):
            ia = i + a
            if ia >= n:
                ia -= n
            elif ia < 0:
                ia += n
            for j in range(m):
                jb = j + b
                if jb >= m:
                    jb -= m
                elif jb < 0:
                    jb += m
                t = ubar[ia, jb] - ubar[i, j]
                pd = p[d, i, j] + sigma * t
                if pd > beta:
                    pd = beta
                elif pd < -beta:
                    pd = -beta
                p[d, i, j] = pd


def adjoint_sum(double[:, :, ::1] p, Py_ssize_t[:, ::1] offsets,
                double[:, ::1] out):
    cdef Py_ssize_t ndir = p.shape[0]
    cdef Py_ssize_t n = p.shape[1]
    cdef Py_ssize_t m = p.shape[2]
    cdef Py_ssize_t d, i, j, a, b, im, jm
    cdef double t
    for i in range(n):
        for j in range(m):
            out[i, j] = 0.0
    for d in range(ndir):
        a = offsets[d, 0]
        b = offsets[d, 1]
        for i in range(n):
            im = i - a
            if im < 0:
                im += n
            elif im >= n:
                im -= n
            for j in range(m):
                jm = j - b
                if jm < 0:
                    jm += m
                elif jm >= m:
                    jm -= m
                t = p[d, im, jm] - p[d, i, j]
                out[i, j] = out[i, j] + t


def primal_prox_quadratic(double[:, ::1] v, double[:, ::1] div,
                          double[:, ::1] w, double tau, double theta,
                          double[:, ::1] vbar):
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t m = v.shape[1]
    cdef Py_ssize_t i, j
    cdef double vn, vold, denom
    denom = 1.0 + tau
    for i in range(n):
        for j in range(m):
            vold = v[i, j]
            vn = (vold - tau * div[i, j] + tau * w[i, j]) / denom
            vbar[i, j] = theta * (vn - vold) + vn
            v[i, j] = vn


def primal_prox_box(double[:, ::1] u, double[:, ::1] div, double[:, ::1] g,
                    double lam, double tau, double theta, double[:, ::1] ubar):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t m = u.shape[1]
    cdef Py_ssize_t i, j
    cdef double s, un, uold
    for i in range(n):
        for j in range(m):
            uold = u[i, j]
            s = div[i, j] + g[i, j] + lam
            un = uold - tau * s
            if un < 0.0:
                un = 0.0
            elif un > 1.0:
                un = 1.0
            ubar[i, j] = theta * (un - uold) + un
            u[i, j] = un
