# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled sum-tree kernels.

Mirrors kernels.pytree exactly: same layout, same descent rule, same
floating-point operation order, so both backends return identical samples
from identical uniforms.
"""

import numpy as np

cimport numpy as cnp


def rebuild(double[::1] tree, Py_ssize_t cap):
    cdef Py_ssize_t t
    for t in range(cap - 1, 0, -1):
        tree[t] = tree[2 * t] + tree[2 * t + 1]


def update(double[::1] tree, Py_ssize_t cap, Py_ssize_t i, double weight):
    cdef Py_ssize_t t = cap + i
    cdef int visits = 1
    tree[t] = weight
    t >>= 1
    while t >= 1:
        tree[t] = tree[2 * t] + tree[2 * t + 1]
        visits += 1
        t >>= 1
    return visits


cdef inline Py_ssize_t _descend(const double* tree, Py_ssize_t cap, double target) nogil:
    cdef Py_ssize_t t = 1
    cdef double left
    while t < cap:
        left = tree[2 * t]
        if target >= left and tree[2 * t + 1] > 0.0:
            target -= left
            t = 2 * t + 1
        else:
            t = 2 * t
    return t - cap


def sample_one(double[::1] tree, Py_ssize_t cap, double u):
    cdef double target = u * tree[1]
    cdef Py_ssize_t t = 1
    cdef int visits = 1
    cdef double left
    while t < cap:
        left = tree[2 * t]
        visits += 2
        if target >= left and tree[2 * t + 1] > 0.0:
            target -= left
            t = 2 * t + 1
        else:
            t = 2 * t
    return t - cap, visits


def sample_many(double[::1] tree, Py_ssize_t cap, double[::1] us, cnp.int64_t[::1] out):
    cdef Py_ssize_t n = us.shape[0]
    cdef Py_ssize_t s
    cdef double root = tree[1]
    with nogil:
        for s in range(n):
            out[s] = _descend(&tree[0], cap, us[s] * root)


def sample_rows_many(
    double[:, ::1] trees,
    Py_ssize_t cap,
    cnp.int64_t[::1] rows,
    double[::1] us,
    cnp.int64_t[::1] out,
):
    cdef Py_ssize_t n = us.shape[0]
    cdef Py_ssize_t s, r
    with nogil:
        for s in range(n):
            r = rows[s]
            out[s] = _descend(&trees[r, 0], cap, us[s] * trees[r, 1])
