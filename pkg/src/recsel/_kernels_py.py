"""Pure-numpy fallback for the compiled kernels.

Same update semantics as recsel._kernels (gradients at pre-update
parameters, duplicate context rows accumulate); floating-point rounding
may differ because numpy reductions reorder sums.  Used automatically
when the extension is unavailable, and directly by the kernel benchmark.
"""

from __future__ import annotations

import numpy as np


def _log1p_exp(x):
    # softplus, overflow-safe
    return np.logaddexp(0.0, x)


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def sgns_epoch(E, C, graphs, tokens, negatives, rates):
    """One pass of SGNS updates over pre-drawn samples; returns summed loss."""
    n_updates = graphs.shape[0]
    labels = np.zeros(negatives.shape[1] + 1)
    labels[0] = 1.0
    loss = 0.0
    for i in range(n_updates):
        g = graphs[i]
        rows = np.concatenate(([tokens[i]], negatives[i]))
        v = E[g]
        crows = C[rows]
        dots = crows @ v
        loss += _log1p_exp(-dots[0]) + _log1p_exp(dots[1:]).sum()
        gsc = (labels - _sigmoid(dots)) * rates[i]
        vgrad = gsc @ crows
        np.add.at(C, rows, gsc[:, None] * v)
        E[g] += vgrad
    return float(loss)


def mf_epoch(user_bias, item_bias, P, Q, users, items, values, mu, lr, reg):
    """One SGD epoch of biased matrix factorization; returns the SSE."""
    sse = 0.0
    for idx in range(users.shape[0]):
        u = users[idx]
        i = items[idx]
        pu = P[u].copy()
        qi = Q[i].copy()
        err = values[idx] - (mu + user_bias[u] + item_bias[i] + pu @ qi)
        sse += err * err
        user_bias[u] += lr * (err - reg * user_bias[u])
        item_bias[i] += lr * (err - reg * item_bias[i])
        P[u] = pu + lr * (err * qi - reg * pu)
        Q[i] = qi + lr * (err * pu - reg * qi)
    return float(sse)
