"""Numba-compiled matching kernels. Same contracts as kernels._numpy."""

import numpy as np
from numba import njit


@njit(cache=True)
def sum_sq_diff(a, b):
    h, w = a.shape
    s = 0.0
    for i in range(h):
        for j in range(w):
            d = a[i, j] - b[i, j]
            s += d * d
    return s


@njit(cache=True)
def batch_sum_sq_diff(stack, q):
    n, p = stack.shape
    flat = q.ravel()
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        s = 0.0
        for j in range(p):
            d = stack[i, j] - flat[j]
            s += d * d
        out[i] = s
    return out


@njit(cache=True)
def ridf_sum_sq(current, snapshot, step):
    h, w = current.shape
    n_shifts = (w + step - 1) // step
    out = np.empty(n_shifts, dtype=np.float64)
    for k in range(n_shifts):
        shift = k * step
        s = 0.0
        for i in range(h):
            for j in range(w):
                # column j of the shifted view comes from column (j - shift) mod w
                src = j - shift
                if src < 0:
                    src += w
                d = current[i, src] - snapshot[i, j]
                s += d * d
        out[k] = s
    return out
