"""Central finite-difference checking for tape-built scalar functions."""

import numpy as np


def numeric_grad(fn, values, step=1e-5):
    """Central-difference gradient of fn (ndarray -> float) at values."""
    flat = values.reshape(-1)
    grad = np.zeros_like(flat)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        hi = fn(values)
        flat[i] = orig - step
        lo = fn(values)
        flat[i] = orig
        grad[i] = (hi - lo) / (2.0 * step)
    return grad.reshape(values.shape)


def max_rel_error(analytic, numeric):
    """Elementwise |a - n| / max(1, |a|, |n|), reduced to the worst entry."""
    denom = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(numeric)))
    return float(np.max(np.abs(analytic - numeric) / denom))


def check_param_grads(build_loss, store, step=1e-5):
    """Compare tape gradients of every store parameter against finite differences.

    build_loss() must rebuild the scalar loss tensor from the store's current
    values. Returns {param_name: rel_error}.
    """
    store.zero_grad()
    loss = build_loss()
    loss.backward()
    analytic = {n: (t.grad.copy() if t.grad is not None else np.zeros(t.data.shape))
                for n, t in ((n, store[n]) for n in store.names())}
    errors = {}
    for name in store.names():
        tensor = store[name]

        def fn(_values, _t=tensor):
            return build_loss().item()

        num = numeric_grad(fn, tensor.data, step=step)
        errors[name] = max_rel_error(analytic[name], num)
    store.zero_grad()
    return errors


def check_input_grad(build_loss, tensor, step=1e-5):
    """Finite-difference check for a single non-parameter input tensor."""
    tensor.grad = None
    loss = build_loss()
    loss.backward()
    analytic = tensor.grad.copy() if tensor.grad is not None else np.zeros(tensor.data.shape)

    def fn(_values):
        return build_loss().item()

    num = numeric_grad(fn, tensor.data, step=step)
    tensor.grad = None
    return max_rel_error(analytic, num)
