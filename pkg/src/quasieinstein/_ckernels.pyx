# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pointwise curvature kernels (node axis last, C-contiguous)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt
from libc.stdlib cimport malloc, free

from quasieinstein._pykernels import NotPositiveDefinite

cnp.import_array()


def metric_inverse(double[:, :, ::1] g):
    cdef Py_ssize_t n = g.shape[0], P = g.shape[2]
    cdef Py_ssize_t p, i, j, k
    cdef double s, piv, det
    out = np.empty((n, n, P))
    sq = np.empty(P)
    cdef double[:, :, ::1] ginv = out
    cdef double[::1] sdet = sq
    cdef double *L = <double *> malloc(n * n * sizeof(double))
    cdef double *Li = <double *> malloc(n * n * sizeof(double))
    if L == NULL or Li == NULL:
        free(L)
        free(Li)
        raise MemoryError()
    try:
        for p in range(P):
            # Cholesky g = L L^T
            det = 1.0
            for i in range(n):
                for j in range(i + 1):
                    s = g[i, j, p]
                    for k in range(j):
                        s -= L[i * n + k] * L[j * n + k]
                    if i == j:
                        if s <= 0.0:
                            raise NotPositiveDefinite(p, s)
                        piv = sqrt(s)
                        L[i * n + i] = piv
                        det *= piv
                    else:
                        L[i * n + j] = s / L[j * n + j]
            sdet[p] = det
            # Li = L^{-1} (lower triangular)
            for i in range(n):
                for j in range(n):
                    Li[i * n + j] = 0.0
            for j in range(n):
                Li[j * n + j] = 1.0 / L[j * n + j]
                for i in range(j + 1, n):
                    s = 0.0
                    for k in range(j, i):
                        s -= L[i * n + k] * Li[k * n + j]
                    Li[i * n + j] = s / L[i * n + i]
            # g^{-1} = Li^T Li
            for i in range(n):
                for j in range(i, n):
                    s = 0.0
                    for k in range(j, n):
                        s += Li[k * n + i] * Li[k * n + j]
                    ginv[i, j, p] = s
                    ginv[j, i, p] = s
    finally:
        free(L)
        free(Li)
    return out, sq


def christoffel(double[:, :, ::1] ginv, double[:, :, :, ::1] dg):
    cdef Py_ssize_t n = ginv.shape[0], P = ginv.shape[2]
    cdef Py_ssize_t k, i, j, l, p
    cdef double a
    out = np.zeros((n, n, n, P))
    cdef double[:, :, :, ::1] gam = out
    for k in range(n):
        for i in range(n):
            for j in range(i, n):
                for l in range(n):
                    for p in range(P):
                        a = dg[i, l, j, p] + dg[j, l, i, p] - dg[l, i, j, p]
                        gam[k, i, j, p] += 0.5 * ginv[k, l, p] * a
                if j != i:
                    for p in range(P):
                        gam[k, j, i, p] = gam[k, i, j, p]
    return out


def ricci(double[:, :, :, ::1] gam, double[:, :, :, :, ::1] dgam):
    cdef Py_ssize_t n = gam.shape[0], P = gam.shape[3]
    cdef Py_ssize_t i, j, k, l, p
    out = np.zeros((n, n, P))
    cdef double[:, :, ::1] ric = out
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for p in range(P):
                    ric[i, j, p] += dgam[k, k, i, j, p] - dgam[j, k, i, k, p]
                for l in range(n):
                    for p in range(P):
                        ric[i, j, p] += (gam[k, k, l, p] * gam[l, i, j, p]
                                         - gam[k, j, l, p] * gam[l, i, k, p])
    return out
