# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Toeplitz-block-Toeplitz kernels.

Same contracts as ``_kernels_py``; loops run directly over the block/lag
structure so no ``(NL)^2`` index arrays are built.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def materialize(grid, Py_ssize_t N, Py_ssize_t L):
    cdef double complex[:, ::1] g = np.ascontiguousarray(grid, dtype=np.complex128)
    out = np.empty((N * L, N * L), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    cdef Py_ssize_t i, j, p, q, r, c
    for i in range(L):
        for j in range(L):
            for p in range(N):
                r = i * N + p
                for q in range(N):
                    o[r, j * N + q] = g[i - j + L - 1, p - q + N - 1]
    return out


def class_sum(M, Py_ssize_t N, Py_ssize_t L):
    cdef double complex[:, ::1] m = np.ascontiguousarray(M, dtype=np.complex128)
    out = np.zeros((2 * L - 1, 2 * N - 1), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    cdef Py_ssize_t i, j, p, q, r, d
    for i in range(L):
        for j in range(L):
            d = i - j + L - 1
            for p in range(N):
                r = i * N + p
                for q in range(N):
                    o[d, p - q + N - 1] += m[r, j * N + q]
    return out


def selected_materialize(grid, cols, Py_ssize_t N, Py_ssize_t L):
    cdef double complex[:, ::1] g = np.ascontiguousarray(grid, dtype=np.complex128)
    cdef Py_ssize_t[::1] cc = np.ascontiguousarray(cols, dtype=np.intp)
    cdef Py_ssize_t M = cc.shape[0]
    out = np.empty((M * L, M * L), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    cdef Py_ssize_t i, j, a, b, r
    for i in range(L):
        for j in range(L):
            for a in range(M):
                r = i * M + a
                for b in range(M):
                    o[r, j * M + b] = g[i - j + L - 1, cc[a] - cc[b] + N - 1]
    return out


def selected_class_sum(Mo, cols, Py_ssize_t N, Py_ssize_t L):
    cdef double complex[:, ::1] m = np.ascontiguousarray(Mo, dtype=np.complex128)
    cdef Py_ssize_t[::1] cc = np.ascontiguousarray(cols, dtype=np.intp)
    cdef Py_ssize_t M = cc.shape[0]
    out = np.zeros((2 * L - 1, 2 * N - 1), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    cdef Py_ssize_t i, j, a, b, r, d
    for i in range(L):
        for j in range(L):
            d = i - j + L - 1
            for a in range(M):
                r = i * M + a
                for b in range(M):
                    o[d, cc[a] - cc[b] + N - 1] += m[r, j * M + b]
    return out
