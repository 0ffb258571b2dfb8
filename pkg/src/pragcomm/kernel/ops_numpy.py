"""Numpy implementations of the primitive kernels.

This is the always-available fallback backend. The compiled backend in
``_fastops`` mirrors this module function-for-function; the autodiff tape
calls whichever one is active through :mod:`pragcomm.kernel.backend`.

All arrays are C-contiguous float64 2-D matrices.
"""

import numpy as np


def matmul_nn(a, b):
    return a @ b


def matmul_tn(a, b):
    # a.T @ b
    return a.T @ b


def matmul_nt(a, b):
    # a @ b.T
    return a @ b.T


def ew_add(a, b):
    return np.add(a, b)


def ew_sub(a, b):
    return np.subtract(a, b)


def ew_mul(a, b):
    return np.multiply(a, b)


def ew_div(a, b):
    return np.divide(a, b)


def reduce_to_shape(g, rows, cols):
    """Sum-reduce a gradient over axes that were broadcast in the forward op."""
    if g.shape == (rows, cols):
        return g
    out = g
    if rows == 1 and g.shape[0] != 1:
        out = out.sum(axis=0, keepdims=True)
    if cols == 1 and g.shape[1] != 1:
        out = out.sum(axis=1, keepdims=True)
    return np.ascontiguousarray(out)


def sigmoid_fwd(x):
    # Split by sign so exp never overflows.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid_bwd(y, g):
    return g * y * (1.0 - y)


def softmax_rows_fwd(x, beta):
    z = beta * x
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_rows_bwd(y, g, beta):
    dot = (g * y).sum(axis=1, keepdims=True)
    return beta * y * (g - dot)


def log_clamped_fwd(x, lo):
    return np.log(np.clip(x, lo, 1.0))


def log_clamped_bwd(x, g, lo):
    inside = (x >= lo) & (x <= 1.0)
    out = np.zeros_like(x)
    np.divide(g, x, out=out, where=inside)
    return out


def block_sum_rows(x, k):
    """Sum each consecutive block of k rows: (b*k, c) -> (b, c)."""
    b = x.shape[0] // k
    return x.reshape(b, k, x.shape[1]).sum(axis=1)


def block_repeat_rows(x, k):
    """Repeat each row k times: (b, c) -> (b*k, c)."""
    return np.repeat(x, k, axis=0)


def gather_cols(x, idx):
    """Pick one column per row: (r, c), idx (r,) -> (r, 1)."""
    return np.ascontiguousarray(x[np.arange(x.shape[0]), idx].reshape(-1, 1))


def scatter_cols_add(rows, cols, idx, g):
    """Adjoint of gather_cols: spread (r, 1) gradient back into (r, c) zeros."""
    out = np.zeros((rows, cols))
    out[np.arange(rows), idx] = g[:, 0]
    return out
