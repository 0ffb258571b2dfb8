"""Differentiable computation kernel: autodiff tape plus swappable numeric backends."""

from . import backend
from .tape import (
    LOG_EPS,
    ParamStore,
    Tensor,
    add,
    add_linear,
    block_repeat_rows,
    block_sum_rows,
    concat_cols,
    constant,
    cross_entropy,
    div,
    gather_cols,
    linear_shared,
    log_clamped,
    matmul,
    mean_all,
    mse,
    mul,
    scale,
    sigmoid,
    softmax,
    sort_rows_desc,
    sub,
    sum_all,
    transpose,
)

__all__ = [
    "LOG_EPS",
    "ParamStore",
    "Tensor",
    "add",
    "add_linear",
    "backend",
    "block_repeat_rows",
    "block_sum_rows",
    "concat_cols",
    "constant",
    "cross_entropy",
    "div",
    "gather_cols",
    "linear_shared",
    "log_clamped",
    "matmul",
    "mean_all",
    "mse",
    "mul",
    "scale",
    "sigmoid",
    "softmax",
    "sort_rows_desc",
    "sub",
    "sum_all",
    "transpose",
]
