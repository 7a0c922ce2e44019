"""Compiled inner loop for per-sample gradient descent.

Parameters travel as one flat float64 vector per kind (weights, biases)
plus offset tables, so a single jitted function serves every topology.
Arithmetic mirrors ``mlp.backprop`` followed by ``mlp.gd_step`` applied
sample by sample.
"""

import numpy as np
from numba import njit

# activation codes shared with mlp.ACTIVATION_CODES
LOGSIG, TANSIG, IDENTITY = 0, 1, 2


@njit(cache=True, nogil=True)
def _activate(z, kind):
    if kind == LOGSIG:
        return 1.0 / (1.0 + np.exp(-z))
    if kind == TANSIG:
        return 2.0 / (1.0 + np.exp(-2.0 * z)) - 1.0
    return z


@njit(cache=True, nogil=True)
def _slope(y, kind):
    if kind == LOGSIG:
        return y * (1.0 - y)
    if kind == TANSIG:
        return 1.0 - y * y
    return 1.0


@njit(cache=True, nogil=True)
def per_sample_epoch(X, T, W, B, w_off, b_off, units, kinds, lr):
    """One epoch of sequential updates, in place on W and B."""
    n_layers = units.shape[0]
    a_off = np.zeros(n_layers + 1, np.int64)
    for l in range(n_layers):
        a_off[l + 1] = a_off[l] + units[l]
    A = np.empty(a_off[n_layers])
    D = np.empty(a_off[n_layers])
    last = n_layers - 1
    for s in range(X.shape[0]):
        for i in range(units[0]):
            A[i] = X[s, i]
        for l in range(1, n_layers):
            rows = units[l]
            cols = units[l - 1]
            wo = w_off[l - 1]
            for r in range(rows):
                acc = 0.0
                for c in range(cols):
                    acc += W[wo + r * cols + c] * A[a_off[l - 1] + c]
                A[a_off[l] + r] = _activate(acc + B[b_off[l - 1] + r], kinds[l])
        for r in range(units[last]):
            y = A[a_off[last] + r]
            D[a_off[last] + r] = (y - T[s, r]) * _slope(y, kinds[last])
        for l in range(last, 0, -1):
            rows = units[l]
            cols = units[l - 1]
            wo = w_off[l - 1]
            if l > 1:
                for c in range(cols):
                    acc = 0.0
                    for r in range(rows):
                        acc += W[wo + r * cols + c] * D[a_off[l] + r]
                    D[a_off[l - 1] + c] = acc * _slope(A[a_off[l - 1] + c], kinds[l - 1])
            for r in range(rows):
                d = D[a_off[l] + r]
                for c in range(cols):
                    W[wo + r * cols + c] -= lr * (d * A[a_off[l - 1] + c])
                B[b_off[l - 1] + r] -= lr * d
