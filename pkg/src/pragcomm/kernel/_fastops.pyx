# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel backend: BLAS matmuls plus tight C loops for the
elementwise and block primitives. Mirrors ops_numpy function-for-function."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()

ctypedef cnp.float64_t f64


cdef inline void _gemm_nn(double* a, double* b, double* c, int m, int n, int k) noexcept nogil:
    # row-major C(m,n) = A(m,k) @ B(k,n)
    cdef double one = 1.0, zero = 0.0
    cdef char tn = b'N'
    dgemm(&tn, &tn, &n, &m, &k, &one, b, &n, a, &k, &zero, c, &n)


def matmul_nn(cnp.ndarray[f64, ndim=2] a, cnp.ndarray[f64, ndim=2] b):
    cdef int m = a.shape[0], k = a.shape[1], n = b.shape[1]
    cdef cnp.ndarray[f64, ndim=2] c = np.empty((m, n))
    if m == 0 or n == 0 or k == 0:
        c[:] = 0.0
        return c
    _gemm_nn(<double*> a.data, <double*> b.data, <double*> c.data, m, n, k)
    return c


def matmul_tn(cnp.ndarray[f64, ndim=2] a, cnp.ndarray[f64, ndim=2] b):
    # a.T @ b with a stored (k, m), b stored (k, n)
    cdef int k = a.shape[0], m = a.shape[1], n = b.shape[1]
    cdef cnp.ndarray[f64, ndim=2] c = np.empty((m, n))
    cdef double one = 1.0, zero = 0.0
    cdef char tn = b'N', tt = b'T'
    if m == 0 or n == 0 or k == 0:
        c[:] = 0.0
        return c
    dgemm(&tn, &tt, &n, &m, &k, &one, <double*> b.data, &n,
          <double*> a.data, &m, &zero, <double*> c.data, &n)
    return c


def matmul_nt(cnp.ndarray[f64, ndim=2] a, cnp.ndarray[f64, ndim=2] b):
    # a @ b.T with a stored (m, k), b stored (n, k)
    cdef int m = a.shape[0], k = a.shape[1], n = b.shape[0]
    cdef cnp.ndarray[f64, ndim=2] c = np.empty((m, n))
    cdef double one = 1.0, zero = 0.0
    cdef char tn = b'N', tt = b'T'
    if m == 0 or n == 0 or k == 0:
        c[:] = 0.0
        return c
    dgemm(&tt, &tn, &n, &m, &k, &one, <double*> b.data, &k,
          <double*> a.data, &k, &zero, <double*> c.data, &n)
    return c


cdef inline cnp.ndarray _ew(cnp.ndarray[f64, ndim=2] a, cnp.ndarray[f64, ndim=2] b, int op):
    cdef Py_ssize_t rows = a.shape[0] if a.shape[0] >= b.shape[0] else b.shape[0]
    cdef Py_ssize_t cols = a.shape[1] if a.shape[1] >= b.shape[1] else b.shape[1]
    cdef cnp.ndarray[f64, ndim=2] out = np.empty((rows, cols))
    cdef Py_ssize_t ar = 0 if a.shape[0] == 1 else a.shape[1]
    cdef Py_ssize_t ac = 0 if a.shape[1] == 1 else 1
    cdef Py_ssize_t br = 0 if b.shape[0] == 1 else b.shape[1]
    cdef Py_ssize_t bc = 0 if b.shape[1] == 1 else 1
    cdef double* pa = <double*> a.data
    cdef double* pb = <double*> b.data
    cdef double* po = <double*> out.data
    cdef Py_ssize_t i, j
    cdef double x, y
    with nogil:
        for i in range(rows):
            for j in range(cols):
                x = pa[i * ar + j * ac]
                y = pb[i * br + j * bc]
                if op == 0:
                    po[i * cols + j] = x + y
                elif op == 1:
                    po[i * cols + j] = x - y
                elif op == 2:
                    po[i * cols + j] = x * y
                else:
                    po[i * cols + j] = x / y
    return out


cdef inline bint _broadcastable(cnp.ndarray a, cnp.ndarray b):
    return (a.shape[0] == b.shape[0] or a.shape[0] == 1 or b.shape[0] == 1) and \
           (a.shape[1] == b.shape[1] or a.shape[1] == 1 or b.shape[1] == 1)


def ew_add(a, b):
    if not _broadcastable(a, b):
        return np.add(a, b)
    return _ew(a, b, 0)


def ew_sub(a, b):
    if not _broadcastable(a, b):
        return np.subtract(a, b)
    return _ew(a, b, 1)


def ew_mul(a, b):
    if not _broadcastable(a, b):
        return np.multiply(a, b)
    return _ew(a, b, 2)


def ew_div(a, b):
    if not _broadcastable(a, b):
        return np.divide(a, b)
    return _ew(a, b, 3)


def reduce_to_shape(cnp.ndarray[f64, ndim=2] g, Py_ssize_t rows, Py_ssize_t cols):
    cdef Py_ssize_t gr = g.shape[0], gc = g.shape[1]
    if gr == rows and gc == cols:
        return g
    cdef cnp.ndarray[f64, ndim=2] out = np.zeros((rows, cols))
    cdef double* pg = <double*> g.data
    cdef double* po = <double*> out.data
    cdef Py_ssize_t i, j, oi, oj
    with nogil:
        for i in range(gr):
            oi = 0 if rows == 1 else i
            for j in range(gc):
                oj = 0 if cols == 1 else j
                po[oi * cols + oj] += pg[i * gc + j]
    return out


def sigmoid_fwd(cnp.ndarray[f64, ndim=2] x):
    cdef cnp.ndarray[f64, ndim=2] out = np.empty((x.shape[0], x.shape[1]))
    cdef double* px = <double*> x.data
    cdef double* po = <double*> out.data
    cdef Py_ssize_t i, n = x.shape[0] * x.shape[1]
    cdef double v, e
    with nogil:
        for i in range(n):
            v = px[i]
            if v >= 0:
                po[i] = 1.0 / (1.0 + exp(-v))
            else:
                e = exp(v)
                po[i] = e / (1.0 + e)
    return out


def sigmoid_bwd(cnp.ndarray[f64, ndim=2] y, cnp.ndarray[f64, ndim=2] g):
    cdef cnp.ndarray[f64, ndim=2] out = np.empty((y.shape[0], y.shape[1]))
    cdef double* py = <double*> y.data
    cdef double* pg = <double*> g.data
    cdef double* po = <double*> out.data
    cdef Py_ssize_t i, n = y.shape[0] * y.shape[1]
    with nogil:
        for i in range(n):
            po[i] = pg[i] * py[i] * (1.0 - py[i])
    return out


def softmax_rows_fwd(cnp.ndarray[f64, ndim=2] x, double beta):
    cdef Py_ssize_t rows = x.shape[0], cols = x.shape[1]
    cdef cnp.ndarray[f64, ndim=2] out = np.empty((rows, cols))
    cdef double* px = <double*> x.data
    cdef double* po = <double*> out.data
    cdef Py_ssize_t i, j
    cdef double hi, s, v
    with nogil:
        for i in range(rows):
            hi = beta * px[i * cols]
            for j in range(1, cols):
                v = beta * px[i * cols + j]
                if v > hi:
                    hi = v
            s = 0.0
            for j in range(cols):
                v = exp(beta * px[i * cols + j] - hi)
                po[i * cols + j] = v
                s += v
            for j in range(cols):
                po[i * cols + j] /= s
    return out


def softmax_rows_bwd(cnp.ndarray[f64, ndim=2] y, cnp.ndarray[f64, ndim=2] g, double beta):
    cdef Py_ssize_t rows = y.shape[0], cols = y.shape[1]
    cdef cnp.ndarray[f64, ndim=2] out = np.empty((rows, cols))
    cdef double* py = <double*> y.data
    cdef double* pg = <double*> g.data
    cdef double* po = <double*> out.data
    cdef Py_ssize_t i, j
    cdef double dot
    with nogil:
        for i in range(rows):
            dot = 0.0
            for j in range(cols):
                dot += pg[i * cols + j] * py[i * cols + j]
            for j in range(cols):
                po[i * cols + j] = beta * py[i * cols + j] * (pg[i * cols + j] - dot)
    return out


def log_clamped_fwd(cnp.ndarray[f64, ndim=2] x, double lo):
    cdef cnp.ndarray[f64, ndim=2] out = np.empty((x.shape[0], x.shape[1]))
    cdef double* px = <double*> x.data
    cdef double* po = <double*> out.data
    cdef Py_ssize_t i, n = x.shape[0] * x.shape[1]
    cdef double v
    with nogil:
        for i in range(n):
            v = px[i]
            if v < lo:
                v = lo
            elif v > 1.0:
                v = 1.0
            po[i] = log(v)
    return out


def log_clamped_bwd(cnp.ndarray[f64, ndim=2] x, cnp.ndarray[f64, ndim=2] g, double lo):
    cdef cnp.ndarray[f64, ndim=2] out = np.zeros((x.shape[0], x.shape[1]))
    cdef double* px = <double*> x.data
    cdef double* pg = <double*> g.data
    cdef double* po = <double*> out.data
    cdef Py_ssize_t i, n = x.shape[0] * x.shape[1]
    with nogil:
        for i in range(n):
            if lo <= px[i] <= 1.0:
                po[i] = pg[i] / px[i]
    return out


def block_sum_rows(cnp.ndarray[f64, ndim=2] x, Py_ssize_t k):
    cdef Py_ssize_t blocks = x.shape[0] // k, cols = x.shape[1]
    cdef cnp.ndarray[f64, ndim=2] out = np.zeros((blocks, cols))
    cdef double* px = <double*> x.data
    cdef double* po = <double*> out.data
    cdef Py_ssize_t b, r, j
    with nogil:
        for b in range(blocks):
            for r in range(k):
                for j in range(cols):
                    po[b * cols + j] += px[(b * k + r) * cols + j]
    return out


def block_repeat_rows(cnp.ndarray[f64, ndim=2] x, Py_ssize_t k):
    cdef Py_ssize_t blocks = x.shape[0], cols = x.shape[1]
    cdef cnp.ndarray[f64, ndim=2] out = np.empty((blocks * k, cols))
    cdef double* px = <double*> x.data
    cdef double* po = <double*> out.data
    cdef Py_ssize_t b, r, j
    with nogil:
        for b in range(blocks):
            for r in range(k):
                for j in range(cols):
                    po[(b * k + r) * cols + j] = px[b * cols + j]
    return out


def gather_cols(cnp.ndarray[f64, ndim=2] x, cnp.ndarray[cnp.intp_t, ndim=1] idx):
    cdef Py_ssize_t rows = x.shape[0], cols = x.shape[1]
    cdef cnp.ndarray[f64, ndim=2] out = np.empty((rows, 1))
    cdef double* px = <double*> x.data
    cdef double* po = <double*> out.data
    cdef cnp.intp_t* pi = <cnp.intp_t*> idx.data
    cdef Py_ssize_t i
    with nogil:
        for i in range(rows):
            po[i] = px[i * cols + pi[i]]
    return out


def scatter_cols_add(Py_ssize_t rows, Py_ssize_t cols,
                     cnp.ndarray[cnp.intp_t, ndim=1] idx,
                     cnp.ndarray[f64, ndim=2] g):
    cdef cnp.ndarray[f64, ndim=2] out = np.zeros((rows, cols))
    cdef double* po = <double*> out.data
    cdef double* pg = <double*> g.data
    cdef cnp.intp_t* pi = <cnp.intp_t*> idx.data
    cdef Py_ssize_t i
    with nogil:
        for i in range(rows):
            po[i * cols + pi[i]] = pg[i]
    return out
