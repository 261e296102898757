"""Pure-numpy matching kernels, used when numba is disabled or unavailable."""

import numpy as np

# Chunk size keeps the (chunk, P) difference temporary inside the cache
# instead of streaming a full N x P array through memory twice.
_CHUNK = 256


def sum_sq_diff(a: np.ndarray, b: np.ndarray) -> float:
    d = (a - b).ravel()
    return float(np.dot(d, d))


def batch_sum_sq_diff(stack: np.ndarray, q: np.ndarray) -> np.ndarray:
    n = stack.shape[0]
    out = np.empty(n, dtype=np.float64)
    flat = q.ravel()
    for i0 in range(0, n, _CHUNK):
        d = stack[i0:i0 + _CHUNK] - flat
        out[i0:i0 + _CHUNK] = np.einsum("np,np->n", d, d)
    return out


def ridf_sum_sq(current: np.ndarray, snapshot: np.ndarray, step: int) -> np.ndarray:
    width = current.shape[1]
    shifts = range(0, width, step)
    out = np.empty(len(shifts), dtype=np.float64)
    for k, s in enumerate(shifts):
        d = (np.roll(current, s, axis=1) - snapshot).ravel()
        out[k] = np.dot(d, d)
    return out
