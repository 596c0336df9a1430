# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled phase-space evaluation kernels (same contract as _kernels_py)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, pow, INFINITY

cnp.import_array()


cdef inline void _powers(double complex x, Py_ssize_t top, double complex* pw, double complex* pwc) noexcept nogil:
    # pw[p] = x^p, pwc[p] = conj(x)^p
    cdef Py_ssize_t p
    cdef double complex xc = x.conjugate()
    pw[0] = 1.0
    pwc[0] = 1.0
    for p in range(1, top + 1):
        pw[p] = pw[p - 1] * x
        pwc[p] = pwc[p - 1] * xc


cdef inline double complex _monomial(const long long* e, const double complex* pw, const double complex* pwc,
                                     Py_ssize_t m, Py_ssize_t stride) noexcept nogil:
    cdef double complex val = 1.0
    cdef Py_ssize_t i
    for i in range(m):
        val = val * pw[i * stride + e[2 * i]] * pwc[i * stride + e[2 * i + 1]]
    return val


def poly_eval(const long long[:, ::1] exps, const double complex[::1] coeffs, const double complex[:, ::1] u):
    cdef Py_ssize_t n = u.shape[0], m = u.shape[1], nc = coeffs.shape[0]
    out = np.zeros(n, dtype=np.complex128)
    if nc == 0:
        return out
    cdef Py_ssize_t top = int(np.asarray(exps).max()), stride = top + 1
    cdef double complex[::1] res = out
    cdef double complex[::1] pw = np.empty(m * stride, dtype=np.complex128)
    cdef double complex[::1] pwc = np.empty(m * stride, dtype=np.complex128)
    cdef Py_ssize_t a, c, i
    cdef double complex acc
    with nogil:
        for a in range(n):
            for i in range(m):
                _powers(u[a, i], top, &pw[i * stride], &pwc[i * stride])
            acc = 0
            for c in range(nc):
                acc = acc + coeffs[c] * _monomial(&exps[c, 0], &pw[0], &pwc[0], m, stride)
            res[a] = acc
    return out


def packed_eval(const long long[:, ::1] exps, const double complex[::1] coeffs, const long long[::1] owner,
                const double[:, ::1] widths, const double complex[:, ::1] centers, const double[::1] logpref,
                const double[::1] degree, const double complex[:, ::1] z, bint normalized):
    cdef Py_ssize_t n = z.shape[0], m = z.shape[1], nt = logpref.shape[0], nc = coeffs.shape[0]
    out = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] res = out
    cdef Py_ssize_t top = int(np.asarray(exps).max()) if nc else 0
    cdef Py_ssize_t stride = top + 1, block = m * (top + 1)
    cdef double[::1] logs = np.empty(nt)
    cdef double complex[::1] polys = np.empty(nt, dtype=np.complex128)
    # per-term power tables of the shifted coordinates
    cdef double complex[::1] pw = np.empty(max(nt * block, 1), dtype=np.complex128)
    cdef double complex[::1] pwc = np.empty(max(nt * block, 1), dtype=np.complex128)
    cdef Py_ssize_t a, t, i, c
    cdef double best, r2, d  # r2: normalization prod_i (1+|z_i|^2)^(deg_i/2)
    cdef double complex acc, x
    with nogil:
        for a in range(n):
            best = -INFINITY
            r2 = 1.0
            for i in range(m):
                r2 = r2 * pow(1.0 + z[a, i].real * z[a, i].real + z[a, i].imag * z[a, i].imag, 0.5 * degree[i])
            for t in range(nt):
                logs[t] = logpref[t]
                polys[t] = 0
                for i in range(m):
                    x = z[a, i] - centers[t, i]
                    d = x.real * x.real + x.imag * x.imag
                    logs[t] = logs[t] - d / widths[t, i]
                    _powers(x, top, &pw[t * block + i * stride], &pwc[t * block + i * stride])
                if logs[t] > best:
                    best = logs[t]
            for c in range(nc):
                t = owner[c]
                polys[t] = polys[t] + coeffs[c] * _monomial(&exps[c, 0], &pw[t * block], &pwc[t * block], m, stride)
            acc = 0
            if normalized:
                for t in range(nt):
                    acc = acc + exp(logs[t] - best) * polys[t]
                acc = acc / r2
            else:
                for t in range(nt):
                    acc = acc + exp(logs[t]) * polys[t]
            res[a] = acc
    return out
