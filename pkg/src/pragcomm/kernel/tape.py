"""Reverse-mode autodiff over 2-D float64 matrices.

Provides exactly the layer vocabulary the agents need: shared per-candidate
linear maps, sigmoid, temperature softmax, dot products (as matmul),
cross-entropy, MSE, plus the block/gather ops that let a whole batch of
games run through one graph. Numeric inner loops are delegated to the
active backend (numpy or the compiled extension).
"""

import numpy as np

from ..errors import DimensionError, NumericError
from . import backend


def _as_matrix(x):
    a = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2:
        raise DimensionError(f"expected 2-D data, got shape {a.shape}")
    return a


class Tensor:
    """A node in the computation graph: float64 matrix plus gradient slot."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_bwd")

    def __init__(self, data, requires_grad=False, _parents=(), _bwd=None):
        self.data = _as_matrix(data)
        self.grad = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in _parents)
        self._parents = _parents if self.requires_grad else ()
        self._bwd = _bwd if self.requires_grad else None

    @property
    def shape(self):
        return self.data.shape

    def item(self):
        if self.data.size != 1:
            raise DimensionError(f"item() on non-scalar tensor of shape {self.shape}")
        return float(self.data[0, 0])

    def backward(self):
        """Backpropagate from this scalar through the graph."""
        if self.data.size != 1:
            raise DimensionError("backward() requires a scalar tensor")
        topo, seen = [], set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in seen:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._bwd is not None and node.grad is not None:
                node._bwd(node.grad)

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __truediv__(self, other):
        return div(self, other)

    def __matmul__(self, other):
        return matmul(self, other)

    def __neg__(self):
        return scale(self, -1.0)

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


def constant(data):
    """Wrap raw data as a graph leaf without gradient tracking."""
    return Tensor(data)


def _accum(t, g):
    if not t.requires_grad:
        return
    if t.grad is None:
        t.grad = g.copy()  # never alias: g may be shared with another node
    else:
        t.grad += g


def _ew(op_fwd, a, b, da, db):
    a = a if isinstance(a, Tensor) else constant(a)
    b = b if isinstance(b, Tensor) else constant(b)
    out_data = op_fwd(a.data, b.data)

    def bwd(g):
        _accum(a, backend.active.reduce_to_shape(da(g, a.data, b.data), *a.data.shape))
        _accum(b, backend.active.reduce_to_shape(db(g, a.data, b.data), *b.data.shape))

    return Tensor(out_data, _parents=(a, b), _bwd=bwd)


def add(a, b):
    return _ew(lambda x, y: backend.active.ew_add(x, y), a, b,
               lambda g, x, y: g, lambda g, x, y: g)


def sub(a, b):
    return _ew(lambda x, y: backend.active.ew_sub(x, y), a, b,
               lambda g, x, y: g, lambda g, x, y: -g)


def mul(a, b):
    return _ew(lambda x, y: backend.active.ew_mul(x, y), a, b,
               lambda g, x, y: backend.active.ew_mul(g, y),
               lambda g, x, y: backend.active.ew_mul(g, x))


def div(a, b):
    return _ew(lambda x, y: backend.active.ew_div(x, y), a, b,
               lambda g, x, y: backend.active.ew_div(g, y),
               lambda g, x, y: backend.active.ew_div(backend.active.ew_mul(-g, x),
                                                     backend.active.ew_mul(y, y)))


def scale(a, c):
    c = float(c)

    def bwd(g):
        _accum(a, g * c)

    return Tensor(a.data * c, _parents=(a,), _bwd=bwd)


def matmul(a, b):
    if a.data.shape[1] != b.data.shape[0]:
        raise DimensionError(f"matmul shapes {a.data.shape} x {b.data.shape}")
    out_data = backend.active.matmul_nn(a.data, b.data)

    def bwd(g):
        _accum(a, backend.active.matmul_nt(g, b.data))
        _accum(b, backend.active.matmul_tn(a.data, g))

    return Tensor(out_data, _parents=(a, b), _bwd=bwd)


def sigmoid(a):
    y = backend.active.sigmoid_fwd(a.data)

    def bwd(g):
        _accum(a, backend.active.sigmoid_bwd(y, g))

    return Tensor(y, _parents=(a,), _bwd=bwd)


def softmax(a, beta=1.0):
    """Row-wise stable softmax of beta * a."""
    if a.data.size == 0:
        raise DimensionError("softmax of empty tensor")
    if beta <= 0:
        raise DimensionError(f"softmax temperature must be positive, got {beta}")
    beta = float(beta)
    y = backend.active.softmax_rows_fwd(a.data, beta)

    def bwd(g):
        _accum(a, backend.active.softmax_rows_bwd(y, g, beta))

    return Tensor(y, _parents=(a,), _bwd=bwd)


LOG_EPS = 1e-9


def log_clamped(a, lo=LOG_EPS):
    """log of a clamped into [lo, 1]; zero gradient outside the clamp window."""
    y = backend.active.log_clamped_fwd(a.data, lo)

    def bwd(g):
        _accum(a, backend.active.log_clamped_bwd(a.data, g, lo))

    return Tensor(y, _parents=(a,), _bwd=bwd)


def concat_cols(a, b):
    if a.data.shape[0] != b.data.shape[0]:
        raise DimensionError(f"concat rows {a.data.shape} vs {b.data.shape}")
    na = a.data.shape[1]
    out_data = np.concatenate([a.data, b.data], axis=1)

    def bwd(g):
        _accum(a, np.ascontiguousarray(g[:, :na]))
        _accum(b, np.ascontiguousarray(g[:, na:]))

    return Tensor(out_data, _parents=(a, b), _bwd=bwd)


def block_sum_rows(a, k):
    """Sum each consecutive block of k rows."""
    if a.data.shape[0] % k != 0:
        raise DimensionError(f"rows {a.data.shape[0]} not divisible by block {k}")
    out_data = backend.active.block_sum_rows(a.data, k)

    def bwd(g):
        _accum(a, backend.active.block_repeat_rows(g, k))

    return Tensor(out_data, _parents=(a,), _bwd=bwd)


def block_repeat_rows(a, k):
    """Repeat every row k times (adjoint of block_sum_rows)."""
    out_data = backend.active.block_repeat_rows(a.data, k)

    def bwd(g):
        _accum(a, backend.active.block_sum_rows(g, k))

    return Tensor(out_data, _parents=(a,), _bwd=bwd)


def gather_cols(a, idx):
    """Pick column idx[i] from row i, returning a column vector."""
    idx = np.asarray(idx, dtype=np.intp)
    if idx.shape != (a.data.shape[0],):
        raise DimensionError(f"gather index shape {idx.shape} for {a.data.shape}")
    out_data = backend.active.gather_cols(a.data, idx)
    rows, cols = a.data.shape

    def bwd(g):
        _accum(a, backend.active.scatter_cols_add(rows, cols, idx, g))

    return Tensor(out_data, _parents=(a,), _bwd=bwd)


def transpose(a):
    out_data = np.ascontiguousarray(a.data.T)

    def bwd(g):
        _accum(a, np.ascontiguousarray(g.T))

    return Tensor(out_data, _parents=(a,), _bwd=bwd)


def sort_rows_desc(a):
    """Sort each row descending; gradients flow back through the permutation."""
    order = np.argsort(-a.data, axis=1, kind="stable")
    out_data = np.take_along_axis(a.data, order, axis=1)

    def bwd(g):
        back = np.empty_like(g)
        np.put_along_axis(back, order, g, axis=1)
        _accum(a, back)

    return Tensor(out_data, _parents=(a,), _bwd=bwd)


def sum_all(a):
    out_data = np.array([[a.data.sum()]])

    def bwd(g):
        _accum(a, np.full_like(a.data, g[0, 0]))

    return Tensor(out_data, _parents=(a,), _bwd=bwd)


def mean_all(a):
    n = a.data.size
    out_data = np.array([[a.data.sum() / n]])

    def bwd(g):
        _accum(a, np.full_like(a.data, g[0, 0] / n))

    return Tensor(out_data, _parents=(a,), _bwd=bwd)


def cross_entropy(target, predicted):
    """H(p, q) = -sum(p * log q) with q clamped to [1e-9, 1] before the log."""
    if target.data.shape != predicted.data.shape:
        raise DimensionError(
            f"cross_entropy shapes {target.data.shape} vs {predicted.data.shape}")
    return scale(sum_all(mul(target, log_clamped(predicted))), -1.0)


def mse(a, b):
    """Mean squared error over all entries."""
    if a.data.shape != b.data.shape:
        raise DimensionError(f"mse shapes {a.data.shape} vs {b.data.shape}")
    d = sub(a, b)
    return mean_all(mul(d, d))


class ParamStore:
    """Named parameters with paired gradient slots and momentum state.

    One training thread owns a store; read-only snapshots are cheap dict
    copies. Parameter order is insertion order, which fixes the checkpoint
    layout.
    """

    def __init__(self):
        self._params = {}
        self._velocity = {}

    def add(self, name, shape, rng, fan_in=None):
        """Register a parameter initialized uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)]."""
        if name in self._params:
            raise ValueError(f"duplicate parameter {name!r}")
        fan = fan_in if fan_in is not None else shape[0]
        bound = 1.0 / np.sqrt(max(fan, 1))
        data = rng.uniform(-bound, bound, size=shape)
        t = Tensor(data, requires_grad=True)
        self._params[name] = t
        self._velocity[name] = np.zeros(t.data.shape)
        return t

    def __getitem__(self, name):
        return self._params[name]

    def __contains__(self, name):
        return name in self._params

    def names(self):
        return list(self._params)

    def items(self):
        """Ordered (name, shape, values) enumeration for serialization."""
        return [(n, t.data.shape, t.data) for n, t in self._params.items()]

    def zero_grad(self):
        for t in self._params.values():
            t.grad = None

    def sgd_step(self, lr, momentum=0.0):
        """One first-order update opposite the gradient; gradients are cleared."""
        for name, t in self._params.items():
            if t.grad is None:
                continue
            if not np.all(np.isfinite(t.grad)):
                raise NumericError(f"non-finite gradient for parameter {name!r}")
            if momentum > 0.0:
                v = self._velocity[name]
                v *= momentum
                v += t.grad
                t.data -= lr * v
            else:
                t.data -= lr * t.grad
        self.zero_grad()

    def snapshot(self):
        """Deep copy of parameter values (momentum state excluded)."""
        return {n: t.data.copy() for n, t in self._params.items()}

    def velocity_snapshot(self):
        """Deep copy of per-parameter momentum state."""
        return {n: v.copy() for n, v in self._velocity.items()}

    def load_velocity(self, state):
        for name, values in state.items():
            if name not in self._velocity:
                raise ValueError(f"unknown parameter {name!r}")
            self._velocity[name] = np.ascontiguousarray(np.asarray(values, dtype=np.float64))

    def load(self, state):
        for name, values in state.items():
            if name not in self._params:
                raise ValueError(f"unknown parameter {name!r}")
            t = self._params[name]
            if t.data.shape != values.shape:
                raise DimensionError(
                    f"parameter {name!r} shape {values.shape} != {t.data.shape}")
            t.data = np.ascontiguousarray(np.asarray(values, dtype=np.float64))


def linear_shared(store, name, x):
    """Apply one weight matrix (plus bias) to every row of x.

    Equivalent to a 1x1 convolution over the candidate axis: row i of the
    output is row i of the input times ``<name>.w`` plus ``<name>.b``.
    """
    w = store[f"{name}.w"]
    b = store[f"{name}.b"]
    if x.data.shape[1] != w.data.shape[0]:
        raise DimensionError(
            f"linear_shared {name!r}: input width {x.data.shape[1]} != {w.data.shape[0]}")
    return add(matmul(x, w), b)


def add_linear(store, name, d_in, d_out, rng):
    """Register weight and bias for a shared linear layer."""
    store.add(f"{name}.w", (d_in, d_out), rng)
    store.add(f"{name}.b", (1, d_out), rng, fan_in=d_in)
