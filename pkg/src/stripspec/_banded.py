"""Kernels for symmetric banded matrices in lower LAPACK-style storage.

A symmetric matrix with half bandwidth p is stored as an array ``ab`` of
shape (p+1, n) where ``ab[i, j]`` holds entry A[j+i, j].  Positions that
fall past the matrix edge are zero.  All kernels are compiled with numba
and operate on float64 arrays.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def ldlt_factor(ab, tiny):
    """Factor A = L D L^T in place, without pivoting.

    On entry ``ab`` holds the lower bands of a symmetric matrix.  On
    successful exit row 0 holds D and rows 1..p hold the strictly lower
    bands of the unit triangular L.  Returns -1 on success, otherwise the
    column index at which the pivot magnitude dropped to ``tiny`` or
    below (the factorization is then unusable).
    """
    p = ab.shape[0] - 1
    n = ab.shape[1]
    for j in range(n):
        dj = ab[0, j]
        kmin = j - p
        if kmin < 0:
            kmin = 0
        for k in range(kmin, j):
            ljk = ab[j - k, k]
            dj -= ljk * ljk * ab[0, k]
        if abs(dj) <= tiny:
            return j
        ab[0, j] = dj
        imax = p
        if j + imax > n - 1:
            imax = n - 1 - j
        for i in range(1, imax + 1):
            # l[j+i, j]; summation limited to columns where both rows are in band
            acc = ab[i, j]
            kmin = j + i - p
            if kmin < 0:
                kmin = 0
            for k in range(kmin, j):
                acc -= ab[j + i - k, k] * ab[j - k, k] * ab[0, k]
            ab[i, j] = acc / dj
    return -1


@njit(cache=True)
def ldlt_solve(fact, b):
    """Solve L D L^T x = b given a factored band array.  Returns x."""
    p = fact.shape[0] - 1
    n = fact.shape[1]
    x = b.copy()
    for j in range(n):
        xj = x[j]
        imax = p
        if j + imax > n - 1:
            imax = n - 1 - j
        for i in range(1, imax + 1):
            x[j + i] -= fact[i, j] * xj
    for j in range(n):
        x[j] /= fact[0, j]
    for j in range(n - 1, -1, -1):
        acc = x[j]
        imax = p
        if j + imax > n - 1:
            imax = n - 1 - j
        for i in range(1, imax + 1):
            acc -= fact[i, j] * x[j + i]
        x[j] = acc
    return x


@njit(cache=True)
def ldlt_apply(fact, x):
    """Apply the factored matrix: returns L D L^T x."""
    p = fact.shape[0] - 1
    n = fact.shape[1]
    y = x.copy()
    # y = L^T x
    for j in range(n):
        acc = y[j]
        imax = p
        if j + imax > n - 1:
            imax = n - 1 - j
        for i in range(1, imax + 1):
            acc += fact[i, j] * x[j + i]
        y[j] = acc
    for j in range(n):
        y[j] *= fact[0, j]
    # y <- L y, in place from the bottom up
    for j in range(n - 1, -1, -1):
        yj = y[j]
        imax = p
        if j + imax > n - 1:
            imax = n - 1 - j
        for i in range(1, imax + 1):
            y[j + i] += fact[i, j] * yj
    return y


@njit(cache=True)
def sym_matvec(ab, x):
    """y = A x for a symmetric matrix in lower banded storage."""
    p = ab.shape[0] - 1
    n = ab.shape[1]
    y = np.zeros(n)
    for j in range(n):
        xj = x[j]
        y[j] += ab[0, j] * xj
        imax = p
        if j + imax > n - 1:
            imax = n - 1 - j
        for i in range(1, imax + 1):
            a = ab[i, j]
            y[j + i] += a * xj
            y[j] += a * x[j + i]
    return y


def to_dense(ab):
    """Expand lower banded storage to a dense symmetric matrix (tests, export)."""
    p, n = ab.shape[0] - 1, ab.shape[1]
    out = np.zeros((n, n))
    for i in range(p + 1):
        idx = np.arange(n - i)
        out[idx + i, idx] = ab[i, : n - i]
        if i:
            out[idx, idx + i] = ab[i, : n - i]
    return out


def from_dense(a, p):
    """Compress a dense symmetric matrix to lower banded storage."""
    n = a.shape[0]
    ab = np.zeros((p + 1, n))
    for i in range(p + 1):
        ab[i, : n - i] = np.diagonal(a, -i)
    return ab


def warmup():
    """Trigger JIT compilation of all kernels on a tiny problem."""
    ab = from_dense(np.array([[4.0, 1.0, 0.0], [1.0, 4.0, 1.0], [0.0, 1.0, 4.0]]), 1)
    fact = ab.copy()
    ldlt_factor(fact, 1e-300)
    ldlt_solve(fact, np.ones(3))
    ldlt_apply(fact, np.ones(3))
    sym_matvec(ab, np.ones(3))
