# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport atan2

cnp.import_array()


def triangle_energies(const double[:, ::1] n, const cnp.int64_t[:, ::1] triangles,
                      const double[:, ::1] cot):
    cdef Py_ssize_t nf = triangles.shape[0]
    out_arr = np.empty(nf)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t f, k, c, a, b
    cdef double s, d, e
    for f in range(nf):
        s = 0.0
        for k in range(3):
            a = triangles[f, (k + 1) % 3]
            b = triangles[f, (k + 2) % 3]
            e = 0.0
            for c in range(3):
                d = n[a, c] - n[b, c]
                e += d * d
            s += cot[f, k] * e
        out[f] = s / 16.0
    return out_arr


def energy_gradient(const double[:, ::1] n, const cnp.int64_t[:, ::1] triangles,
                    const double[:, ::1] cot):
    cdef Py_ssize_t nf = triangles.shape[0]
    grad_arr = np.zeros((n.shape[0], 3))
    cdef double[:, ::1] grad = grad_arr
    cdef Py_ssize_t f, k, c, a, b
    cdef double w, g
    for f in range(nf):
        for k in range(3):
            a = triangles[f, (k + 1) % 3]
            b = triangles[f, (k + 2) % 3]
            w = cot[f, k] / 8.0
            for c in range(3):
                g = w * (n[a, c] - n[b, c])
                grad[a, c] += g
                grad[b, c] -= g
    return grad_arr


def signed_solid_angles(const double[:, ::1] n, const cnp.int64_t[:, ::1] triangles):
    cdef Py_ssize_t nf = triangles.shape[0]
    out_arr = np.empty(nf)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t f, i, j, k
    cdef double num, den
    for f in range(nf):
        i = triangles[f, 0]
        j = triangles[f, 1]
        k = triangles[f, 2]
        num = (n[i, 0] * (n[j, 1] * n[k, 2] - n[j, 2] * n[k, 1])
               + n[i, 1] * (n[j, 2] * n[k, 0] - n[j, 0] * n[k, 2])
               + n[i, 2] * (n[j, 0] * n[k, 1] - n[j, 1] * n[k, 0]))
        den = 1.0
        for c in range(3):
            den += n[i, c] * n[j, c] + n[j, c] * n[k, c] + n[k, c] * n[i, c]
        out[f] = 2.0 * atan2(num, den)
    return out_arr
