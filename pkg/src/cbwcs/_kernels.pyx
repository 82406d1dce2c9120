# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sequential kernels. Same signatures as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport tanh
from libc.string cimport memcpy

cnp.import_array()


cdef inline void _csr_matvec(Py_ssize_t n, const cnp.int64_t[::1] indptr,
                             const cnp.int64_t[::1] indices, const double[::1] data,
                             const double* x, double* out) noexcept nogil:
    cdef Py_ssize_t row, k
    cdef double acc
    for row in range(n):
        acc = 0.0
        for k in range(indptr[row], indptr[row + 1]):
            acc = acc + data[k] * x[indices[k]]
        out[row] = acc


def esn_teacher_states(const double[:, ::1] w_in, const cnp.int64_t[::1] indptr,
                       const cnp.int64_t[::1] indices, const double[::1] data,
                       const double[::1] w_fb, const double[:, ::1] inputs,
                       const double[::1] teachers, r0, double theta0):
    cdef Py_ssize_t n_res = w_in.shape[0], k_in = w_in.shape[1]
    cdef Py_ssize_t n_steps = inputs.shape[0], n, i, j
    cdef cnp.ndarray[double, ndim=2, mode="c"] states = np.empty((n_steps, n_res))
    cdef double[::1] r = np.array(r0, dtype=np.float64)
    cdef double[::1] tmp = np.empty(n_res)
    cdef double fb = theta0, acc
    with nogil:
        for n in range(n_steps):
            _csr_matvec(n_res, indptr, indices, data, &r[0], &tmp[0])
            for i in range(n_res):
                acc = tmp[i] + w_fb[i] * fb
                for j in range(k_in):
                    acc = acc + w_in[i, j] * inputs[n, j]
                r[i] = tanh(acc)
                states[n, i] = r[i]
            fb = teachers[n]
    return states


def esn_predict(const double[:, ::1] w_in, const cnp.int64_t[::1] indptr,
                const cnp.int64_t[::1] indices, const double[::1] data,
                const double[::1] w_fb, const double[::1] w_out,
                const double[:, ::1] inputs, r0, double theta0):
    cdef Py_ssize_t n_res = w_in.shape[0], k_in = w_in.shape[1]
    cdef Py_ssize_t n_steps = inputs.shape[0], n, i, j
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n_steps)
    cdef double[::1] r = np.array(r0, dtype=np.float64)
    cdef double[::1] tmp = np.empty(n_res)
    cdef double fb = theta0, acc, y
    with nogil:
        for n in range(n_steps):
            _csr_matvec(n_res, indptr, indices, data, &r[0], &tmp[0])
            y = 0.0
            for i in range(n_res):
                acc = tmp[i] + w_fb[i] * fb
                for j in range(k_in):
                    acc = acc + w_in[i, j] * inputs[n, j]
                r[i] = tanh(acc)
                y = y + w_out[i] * r[i]
            for j in range(k_in):
                y = y + w_out[n_res + j] * inputs[n, j]
            out[n] = y
            fb = y
    return out, np.asarray(r)


def feedback_decode(const double[::1] y_dec, const double[::1] past_coefs, history):
    cdef Py_ssize_t P = past_coefs.shape[0], n_dec = y_dec.shape[0], n, k
    cdef cnp.ndarray[double, ndim=1] buf = np.concatenate(
        [np.asarray(history, dtype=np.float64), np.zeros(n_dec)])
    cdef double[::1] b = buf
    cdef double theta
    with nogil:
        for n in range(n_dec):
            theta = 0.0
            for k in range(1, P + 1):
                theta = theta + past_coefs[k - 1] * b[P + n - k]
            b[P + n] = 1.0 if y_dec[n] >= theta else -1.0
    return buf[P:].copy()


def method1_decode(const double[:, ::1] w_in, const cnp.int64_t[::1] indptr,
                   const cnp.int64_t[::1] indices, const double[::1] data,
                   const double[::1] w_fb, const double[::1] w_out,
                   const double[::1] stream, Py_ssize_t ns, Py_ssize_t decision_index,
                   Py_ssize_t first, history, const double[::1] past_coefs,
                   double fut_coef, Py_ssize_t horizon):
    cdef Py_ssize_t n_res = w_in.shape[0]
    cdef Py_ssize_t n_sym = stream.shape[0] // ns
    cdef Py_ssize_t P = past_coefs.shape[0], n_dec = n_sym - first
    cdef Py_ssize_t n, j, i, k, h, m, base
    cdef cnp.ndarray[double, ndim=1] buf = np.concatenate(
        [np.asarray(history, dtype=np.float64), np.zeros(n_dec)])
    cdef cnp.ndarray[double, ndim=1] fut = np.empty(n_dec)
    cdef double[::1] b = buf
    cdef double[::1] fv = fut
    cdef double[::1] r = np.zeros(n_res)
    cdef double[::1] rp = np.empty(n_res)
    cdef double[::1] tmp = np.empty(n_res)
    cdef double[::1] w_obs = np.empty(n_res)
    cdef double w_u = w_out[n_res], u, v, theta, bit, acc
    for i in range(n_res):
        w_obs[i] = w_in[i, 0] + w_fb[i]
    with nogil:
        for n in range(n_sym):
            base = n * ns
            for j in range(ns):
                u = stream[base + j]
                _csr_matvec(n_res, indptr, indices, data, &r[0], &tmp[0])
                for i in range(n_res):
                    r[i] = tanh(w_obs[i] * u + tmp[i])
            if n < first:
                continue
            v = w_u * stream[base + ns - 1]
            for i in range(n_res):
                v = v + w_out[i] * r[i]
            memcpy(&rp[0], &r[0], n_res * sizeof(double))
            for h in range(horizon - 1):
                _csr_matvec(n_res, indptr, indices, data, &rp[0], &tmp[0])
                acc = w_u * v
                for i in range(n_res):
                    rp[i] = tanh(w_obs[i] * v + tmp[i])
                    acc = acc + w_out[i] * rp[i]
                v = acc
            bit = 1.0 if v >= 0.0 else -1.0
            m = n - first
            theta = fut_coef * bit
            for k in range(1, P + 1):
                theta = theta + past_coefs[k - 1] * b[P + m - k]
            b[P + m] = 1.0 if stream[base + decision_index - 1] >= theta else -1.0
            fv[m] = bit
    return buf[P:].copy(), fut
