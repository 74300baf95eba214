# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: skipgram-negative-sampling updates and
matrix-factorization SGD.  Semantics match recsel._kernels_py exactly
(all gradients evaluated at pre-update parameters); only floating-point
rounding may differ from the numpy fallback."""

import numpy as np

from libc.math cimport exp, log1p
from libc.stdint cimport int64_t


cdef inline double _sigmoid(double x) noexcept nogil:
    cdef double e
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


cdef inline double _softplus(double x) noexcept nogil:
    if x > 0.0:
        return x + log1p(exp(-x))
    return log1p(exp(x))


def sgns_epoch(double[:, ::1] E, double[:, ::1] C,
               int64_t[::1] graphs, int64_t[::1] tokens,
               int64_t[:, ::1] negatives, double[::1] rates):
    """One pass of SGNS updates over pre-drawn samples.

    Returns the summed loss evaluated at pre-update parameters.
    """
    cdef Py_ssize_t n_updates = graphs.shape[0]
    cdef Py_ssize_t k = negatives.shape[1]
    cdef Py_ssize_t sigma = E.shape[1]
    cdef Py_ssize_t i, j, d
    cdef int64_t g, row
    cdef double dot, lr
    cdef double loss = 0.0

    gsc_buf = np.zeros(k + 1, dtype=np.float64)
    vgrad_buf = np.zeros(sigma, dtype=np.float64)
    cdef double[::1] gsc = gsc_buf
    cdef double[::1] vgrad = vgrad_buf

    with nogil:
        for i in range(n_updates):
            g = graphs[i]
            lr = rates[i]
            for d in range(sigma):
                vgrad[d] = 0.0
            # pass 1: dots, losses and v-gradient from pre-update rows
            for j in range(k + 1):
                row = tokens[i] if j == 0 else negatives[i, j - 1]
                dot = 0.0
                for d in range(sigma):
                    dot += E[g, d] * C[row, d]
                if j == 0:
                    loss += _softplus(-dot)
                    gsc[j] = (1.0 - _sigmoid(dot)) * lr
                else:
                    loss += _softplus(dot)
                    gsc[j] = -_sigmoid(dot) * lr
                for d in range(sigma):
                    vgrad[d] += gsc[j] * C[row, d]
            # pass 2: context updates against the pre-update graph row
            for j in range(k + 1):
                row = tokens[i] if j == 0 else negatives[i, j - 1]
                for d in range(sigma):
                    C[row, d] += gsc[j] * E[g, d]
            for d in range(sigma):
                E[g, d] += vgrad[d]
    return loss


def mf_epoch(double[::1] user_bias, double[::1] item_bias,
             double[:, ::1] P, double[:, ::1] Q,
             int64_t[::1] users, int64_t[::1] items, double[::1] values,
             double mu, double lr, double reg):
    """One SGD epoch of biased matrix factorization; returns the sum of
    squared prediction errors at pre-update parameters."""
    cdef Py_ssize_t n = users.shape[0]
    cdef Py_ssize_t n_factors = P.shape[1]
    cdef Py_ssize_t idx, d
    cdef int64_t u, i
    cdef double pred, err, pu, qi
    cdef double sse = 0.0

    with nogil:
        for idx in range(n):
            u = users[idx]
            i = items[idx]
            pred = mu + user_bias[u] + item_bias[i]
            for d in range(n_factors):
                pred += P[u, d] * Q[i, d]
            err = values[idx] - pred
            sse += err * err
            user_bias[u] += lr * (err - reg * user_bias[u])
            item_bias[i] += lr * (err - reg * item_bias[i])
            for d in range(n_factors):
                pu = P[u, d]
                qi = Q[i, d]
                P[u, d] += lr * (err * qi - reg * pu)
                Q[i, d] += lr * (err * pu - reg * qi)
    return sse
