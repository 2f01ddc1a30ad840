"""Compiled inner loops.

Every kernel updates its first argument in place and touches one sample at a
time, so memory stays O(d) (O(d^2) for explicit operator products) no matter
how long the chunk is.  Kernels that normalize return the index of the first
step whose iterate collapsed to zero, or -1.
"""

import math

import numpy as np
from numba import njit

TINY = 1e-300


@njit(cache=True)
def _normalize_inplace(w):
    nrm = 0.0
    for k in range(w.shape[0]):
        nrm += w[k] * w[k]
    nrm = math.sqrt(nrm)
    if nrm <= TINY:
        return False
    for k in range(w.shape[0]):
        w[k] /= nrm
    return True


@njit(cache=True)
def oja_basis(w, idx, scale, etas):
    """Samples x = scale[t] * e_{idx[t]}: only one coordinate moves."""
    for t in range(idx.shape[0]):
        j = idx[t]
        c = scale[t]
        w[j] += etas[t] * c * c * w[j]
        if not _normalize_inplace(w):
            return t
    return -1


@njit(cache=True)
def oja_rank_one(w, xs, etas):
    d = w.shape[0]
    for t in range(xs.shape[0]):
        p = 0.0
        for k in range(d):
            p += xs[t, k] * w[k]
        s = etas[t] * p
        for k in range(d):
            w[k] += s * xs[t, k]
        if not _normalize_inplace(w):
            return t
    return -1


@njit(cache=True)
def oja_dense(w, mats, etas):
    d = w.shape[0]
    aw = np.empty(d)
    for t in range(mats.shape[0]):
        for i in range(d):
            s = 0.0
            for k in range(d):
                s += mats[t, i, k] * w[k]
            aw[i] = s
        for i in range(d):
            w[i] += etas[t] * aw[i]
        if not _normalize_inplace(w):
            return t
    return -1


@njit(cache=True)
def power_accumulate_rank_one(acc, w, xs):
    """acc += sum_t x_t (x_t . w)"""
    d = w.shape[0]
    for t in range(xs.shape[0]):
        p = 0.0
        for k in range(d):
            p += xs[t, k] * w[k]
        for k in range(d):
            acc[k] += p * xs[t, k]


@njit(cache=True)
def power_accumulate_basis(acc, w, idx, scale):
    for t in range(idx.shape[0]):
        j = idx[t]
        c = scale[t]
        acc[j] += c * c * w[j]


@njit(cache=True)
def power_accumulate_dense(acc, w, mats):
    d = w.shape[0]
    for t in range(mats.shape[0]):
        for i in range(d):
            s = 0.0
            for k in range(d):
                s += mats[t, i, k] * w[k]
            acc[i] += s


@njit(cache=True)
def product_basis(b, idx, scale, etas):
    """B <- (I + eta x x^T) B with x = scale * e_idx: scales one row."""
    for t in range(idx.shape[0]):
        j = idx[t]
        c = scale[t]
        f = 1.0 + etas[t] * c * c
        for k in range(b.shape[1]):
            b[j, k] *= f


@njit(cache=True)
def product_rank_one(b, xs, etas):
    d = b.shape[0]
    row = np.empty(d)
    for t in range(xs.shape[0]):
        for k in range(d):
            s = 0.0
            for i in range(d):
                s += xs[t, i] * b[i, k]
            row[k] = etas[t] * s
        for i in range(d):
            xi = xs[t, i]
            for k in range(d):
                b[i, k] += xi * row[k]


@njit(cache=True)
def product_dense(b, mats, etas):
    d = b.shape[0]
    ab = np.empty((d, d))
    for t in range(mats.shape[0]):
        for i in range(d):
            for k in range(d):
                s = 0.0
                for m in range(d):
                    s += mats[t, i, m] * b[m, k]
                ab[i, k] = s
        for i in range(d):
            for k in range(d):
                b[i, k] += etas[t] * ab[i, k]


@njit(cache=True)
def jacobi_sweeps(a, v, tol, max_sweeps):
    """Cyclic Jacobi on symmetric ``a`` (destroyed); eigenvectors accumulate in ``v``.

    Stops once the off-diagonal Frobenius norm falls to ``tol``.  Returns the
    number of sweeps used, or -1 if ``max_sweeps`` ran out first.
    """
    n = a.shape[0]
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += 2.0 * a[p, q] * a[p, q]
        if math.sqrt(off) <= tol:
            return sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + math.sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    return -1
