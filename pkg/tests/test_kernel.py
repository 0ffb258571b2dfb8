"""Differentiable kernel: op contracts, gradients, and backend parity."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pragcomm import kernel
from pragcomm.errors import DimensionError, NumericError
from pragcomm.kernel import backend, gradcheck


def make_store(rng, d_in=3, d_out=4):
    store = kernel.ParamStore()
    kernel.add_linear(store, "lin", d_in, d_out, rng)
    return store


class TestLinearShared:
    def test_identity_weight_passes_rows_through(self, rng):
        store = kernel.ParamStore()
        kernel.add_linear(store, "lin", 2, 2, rng)
        store["lin.w"].data = np.eye(2)
        store["lin.b"].data = np.zeros((1, 2))
        out = kernel.linear_shared(store, "lin", kernel.constant([[1, 2], [3, 4]]))
        np.testing.assert_allclose(out.data, [[1, 2], [3, 4]])

    def test_zero_weight_broadcasts_bias(self, rng):
        store = kernel.ParamStore()
        kernel.add_linear(store, "lin", 2, 2, rng)
        store["lin.w"].data = np.zeros((2, 2))
        store["lin.b"].data = np.array([[5.0, 5.0]])
        out = kernel.linear_shared(store, "lin", kernel.constant(rng.normal(size=(2, 2))))
        np.testing.assert_allclose(out.data, [[5, 5], [5, 5]])

    def test_gradient_matches_finite_differences(self, rng):
        store = make_store(rng)
        x = kernel.constant(rng.normal(size=(5, 3)))

        def build():
            return kernel.sum_all(kernel.linear_shared(store, "lin", x))

        errors = gradcheck.check_param_grads(build, store)
        assert max(errors.values()) < 1e-4

    def test_shape_mismatch_raises(self, rng):
        store = make_store(rng, d_in=3)
        with pytest.raises(DimensionError):
            kernel.linear_shared(store, "lin", kernel.constant(np.ones((2, 7))))


class TestSoftmax:
    def test_symmetric_logits_uniform(self):
        out = kernel.softmax(kernel.constant([[0.0, 0.0, 0.0]]), beta=1.0)
        np.testing.assert_allclose(out.data, [[1 / 3] * 3])

    def test_hot_limit_concentrates(self):
        out = kernel.softmax(kernel.constant([[10.0, 0.0]]), beta=100.0)
        assert out.data[0, 0] > 1 - 1e-9

    def test_matches_direct_formula(self):
        logits = np.array([[1.0, 2.0, 3.0]])
        out = kernel.softmax(kernel.constant(logits), beta=1.0)
        direct = np.exp(logits) / np.exp(logits).sum()
        np.testing.assert_allclose(out.data, direct, rtol=1e-12)

    def test_empty_raises(self):
        with pytest.raises(DimensionError):
            kernel.softmax(kernel.constant(np.zeros((1, 0))), beta=1.0)

    # beta * spread stays below ~700 so exp() cannot underflow to exact zero
    @given(st.lists(st.floats(-30, 30), min_size=1, max_size=8),
           st.floats(0.01, 10.0))
    @settings(max_examples=60, deadline=None)
    def test_sums_to_one_and_shift_invariant(self, logits, beta):
        row = np.array([logits])
        out = kernel.softmax(kernel.constant(row), beta=beta).data
        assert abs(out.sum() - 1.0) <= 1e-9
        assert np.all(out > 0)
        shifted = kernel.softmax(kernel.constant(row + 13.7), beta=beta).data
        np.testing.assert_allclose(out, shifted, atol=1e-12)

    def test_gradient(self, rng):
        x = kernel.Tensor(rng.normal(size=(2, 5)), requires_grad=True)
        w = kernel.constant(rng.normal(size=(2, 5)))

        def build():
            return kernel.sum_all(kernel.mul(w, kernel.softmax(x, beta=2.0)))

        assert gradcheck.check_input_grad(build, x) < 1e-4


class TestCrossEntropy:
    def test_matching_one_hot_is_zero(self):
        p = kernel.constant([[1.0, 0.0]])
        assert kernel.cross_entropy(p, p).item() == pytest.approx(0.0, abs=1e-8)

    def test_uniform_pair_is_log2(self):
        p = kernel.constant([[0.5, 0.5]])
        assert kernel.cross_entropy(p, p).item() == pytest.approx(np.log(2), rel=1e-12)

    @given(st.integers(2, 8), st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_matches_brute_force(self, n, seed):
        r = np.random.default_rng(seed)
        p = r.dirichlet(np.ones(n)).reshape(1, -1)
        q = r.dirichlet(np.ones(n)).reshape(1, -1)
        got = kernel.cross_entropy(kernel.constant(p), kernel.constant(q)).item()
        expected = -sum(p[0, i] * np.log(max(q[0, i], 1e-9)) for i in range(n))
        assert got == pytest.approx(expected, rel=1e-10)

    def test_length_mismatch_raises(self):
        with pytest.raises(DimensionError):
            kernel.cross_entropy(kernel.constant([[0.5, 0.5]]),
                                 kernel.constant([[1.0, 0.0, 0.0]]))

    def test_entropy_at_equality(self, rng):
        p = rng.dirichlet(np.ones(5)).reshape(1, -1)
        h = kernel.cross_entropy(kernel.constant(p), kernel.constant(p)).item()
        assert h == pytest.approx(float(-(p * np.log(p)).sum()), rel=1e-9)


class TestSgdStep:
    def test_single_scalar_update(self, rng):
        store = kernel.ParamStore()
        w = store.add("w", (1, 1), rng)
        w.data[:] = 1.0
        w.grad = np.array([[2.0]])
        store.sgd_step(0.1)
        assert w.data[0, 0] == pytest.approx(0.8)
        assert w.grad is None

    def test_zero_gradient_keeps_parameters(self, rng):
        store = kernel.ParamStore()
        w = store.add("w", (2, 2), rng)
        before = w.data.copy()
        w.grad = np.zeros((2, 2))
        store.sgd_step(0.5)
        np.testing.assert_array_equal(w.data, before)

    def test_quadratic_converges_to_optimum(self, rng):
        store = kernel.ParamStore()
        w = store.add("w", (1, 1), rng)
        w.data[:] = 10.0
        for _ in range(200):
            diff = kernel.sub(store["w"], kernel.constant([[3.0]]))
            loss = kernel.mul(diff, diff)
            loss.backward()
            store.sgd_step(0.1)
        assert abs(w.data[0, 0] - 3.0) < 1e-3

    def test_nan_gradient_raises_with_name(self, rng):
        store = kernel.ParamStore()
        w = store.add("bad_param", (1, 1), rng)
        w.grad = np.array([[np.nan]])
        with pytest.raises(NumericError, match="bad_param"):
            store.sgd_step(0.1)

    def test_momentum_accumulates(self, rng):
        store = kernel.ParamStore()
        w = store.add("w", (1, 1), rng)
        w.data[:] = 0.0
        for _ in range(2):
            w.grad = np.array([[1.0]])
            store.sgd_step(0.1, momentum=0.5)
        # velocities: 1.0 then 1.5 -> total displacement 0.25
        assert w.data[0, 0] == pytest.approx(-0.25)


class TestParamStore:
    def test_init_bounds_follow_fan_in(self, rng):
        store = kernel.ParamStore()
        w = store.add("w", (100, 50), rng)
        bound = 1 / np.sqrt(100)
        assert np.all(np.abs(w.data) <= bound)
        assert np.max(np.abs(w.data)) > 0.5 * bound  # actually spread out

    def test_snapshot_is_deep(self, rng):
        store = kernel.ParamStore()
        store.add("w", (2, 2), rng)
        snap = store.snapshot()
        store["w"].data[:] = 99.0
        assert not np.array_equal(snap["w"], store["w"].data)

    def test_items_are_ordered(self, rng):
        store = kernel.ParamStore()
        for name in ("z", "a", "m"):
            store.add(name, (1, 1), rng)
        assert [n for n, _s, _v in store.items()] == ["z", "a", "m"]


OPS = {
    "matmul": lambda x, r: kernel.matmul(x, kernel.constant(r.normal(size=(x.shape[1], 3)))),
    "add": lambda x, r: kernel.add(x, kernel.constant(r.normal(size=x.shape))),
    "add_bias": lambda x, r: kernel.add(x, kernel.constant(r.normal(size=(1, x.shape[1])))),
    "sub": lambda x, r: kernel.sub(kernel.constant(r.normal(size=x.shape)), x),
    "mul": lambda x, r: kernel.mul(x, kernel.constant(r.normal(size=x.shape))),
    "mul_col": lambda x, r: kernel.mul(x, kernel.constant(r.normal(size=(x.shape[0], 1)))),
    "div": lambda x, r: kernel.div(x, kernel.constant(2 + r.random(size=(x.shape[0], 1)))),
    "sigmoid": lambda x, r: kernel.sigmoid(x),
    "softmax": lambda x, r: kernel.softmax(x, beta=1.7),
    "log_clamped": lambda x, r: kernel.log_clamped(kernel.sigmoid(x)),
    "concat": lambda x, r: kernel.concat_cols(x, kernel.sigmoid(x)),
    "block_sum": lambda x, r: kernel.block_sum_rows(x, 2),
    "block_repeat": lambda x, r: kernel.block_repeat_rows(x, 3),
    "gather": lambda x, r: kernel.gather_cols(x, r.integers(x.shape[1], size=x.shape[0])),
    "transpose": lambda x, r: kernel.transpose(x),
    "sort_desc": lambda x, r: kernel.sort_rows_desc(x),
    "scale": lambda x, r: kernel.scale(x, -2.5),
    "mean": lambda x, r: kernel.mean_all(x),
}


@pytest.mark.parametrize("name", sorted(OPS))
def test_every_op_passes_gradient_check(name):
    r = np.random.default_rng(hash(name) % 2**32)
    failures = []
    for trial in range(20):
        x = kernel.Tensor(r.normal(size=(4, 6)), requires_grad=True)
        weights = kernel.constant(r.normal(size=(1, 1)))

        def build():
            out = OPS[name](x, np.random.default_rng(trial))
            return kernel.mul(kernel.sum_all(out), weights)

        err = gradcheck.check_input_grad(build, x)
        if err > 1e-4:
            failures.append((trial, err))
    assert not failures, f"{name}: {failures}"


def test_finite_inputs_never_produce_non_finite(rng):
    for _ in range(50):
        x = kernel.constant(rng.normal(size=(4, 6)) * 40)
        outs = [
            kernel.sigmoid(x),
            kernel.softmax(x, beta=3.0),
            kernel.log_clamped(kernel.sigmoid(x)),
            kernel.block_repeat_rows(kernel.block_sum_rows(x, 2), 2),
        ]
        for out in outs:
            assert np.all(np.isfinite(out.data))


def test_reused_tensor_accumulates_both_paths(rng):
    a = kernel.Tensor(rng.normal(size=(2, 2)), requires_grad=True)
    b = kernel.Tensor(rng.normal(size=(2, 2)), requires_grad=True)
    loss = kernel.sum_all(kernel.add(kernel.mul(a, b), kernel.mul(a, a)))
    loss.backward()
    np.testing.assert_allclose(a.grad, b.data + 2 * a.data, rtol=1e-12)
    np.testing.assert_allclose(b.grad, a.data, rtol=1e-12)


@pytest.mark.skipif("compiled" not in backend.available(),
                    reason="compiled backend unavailable")
class TestBackendParity:
    def test_forward_paths_agree(self, rng):
        from pragcomm.kernel import _fastops, ops_numpy

        a = rng.normal(size=(6, 4))
        b = rng.normal(size=(4, 8))
        idx = rng.integers(4, size=6).astype(np.intp)
        pairs = [
            (ops_numpy.matmul_nn(a, b), _fastops.matmul_nn(a, b)),
            (ops_numpy.sigmoid_fwd(a), _fastops.sigmoid_fwd(a)),
            (ops_numpy.softmax_rows_fwd(a, 3.0), _fastops.softmax_rows_fwd(a, 3.0)),
            (ops_numpy.block_sum_rows(a, 2), _fastops.block_sum_rows(a, 2)),
            (ops_numpy.gather_cols(a, idx), _fastops.gather_cols(a, idx)),
            (ops_numpy.ew_mul(a, a[:, :1]),
             _fastops.ew_mul(a, np.ascontiguousarray(a[:, :1]))),
        ]
        for x, y in pairs:
            np.testing.assert_allclose(np.asarray(x), np.asarray(y), atol=1e-14)

    def test_gradcheck_on_compiled_backend(self, rng):
        previous = backend.name()
        try:
            backend.use("compiled")
            store = make_store(rng)
            x = kernel.constant(rng.normal(size=(4, 3)))

            def build():
                h = kernel.sigmoid(kernel.linear_shared(store, "lin", x))
                return kernel.mean_all(h)

            errors = gradcheck.check_param_grads(build, store)
            assert max(errors.values()) < 1e-4
        finally:
            backend.use(previous)
