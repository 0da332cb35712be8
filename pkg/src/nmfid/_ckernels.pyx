# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Signatures mirror ``nmfid._kernels_py``."""

import numpy as np

from libc.math cimport sqrt

from nmfid._kernels_py import int_rank as _py_int_rank


cdef extern from *:
    """
    static int nmfid_mul_ovf(long long a, long long b, long long *r) {
        return __builtin_mul_overflow(a, b, r);
    }
    static int nmfid_sub_ovf(long long a, long long b, long long *r) {
        return __builtin_sub_overflow(a, b, r);
    }
    """
    int nmfid_mul_ovf(long long a, long long b, long long *r) nogil
    int nmfid_sub_ovf(long long a, long long b, long long *r) nogil


cdef Py_ssize_t _bareiss_i64(long long[:, ::1] m) noexcept nogil:
    # -1 signals int64 overflow; the caller retries with Python ints.
    cdef Py_ssize_t nr = m.shape[0]
    cdef Py_ssize_t nc = m.shape[1]
    cdef Py_ssize_t rank = 0, c, i, j, piv
    cdef long long prev = 1, p, f, a, b, d, tmp
    for c in range(nc):
        if rank == nr:
            break
        piv = -1
        for i in range(rank, nr):
            if m[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != rank:
            for j in range(nc):
                tmp = m[piv, j]
                m[piv, j] = m[rank, j]
                m[rank, j] = tmp
        p = m[rank, c]
        for i in range(rank + 1, nr):
            f = m[i, c]
            for j in range(c + 1, nc):
                if nmfid_mul_ovf(p, m[i, j], &a):
                    return -1
                if nmfid_mul_ovf(f, m[rank, j], &b):
                    return -1
                if nmfid_sub_ovf(a, b, &d):
                    return -1
                m[i, j] = d // prev
            m[i, c] = 0
        prev = p
        rank += 1
    return rank


def int_rank(rows):
    """Rank of an integer matrix; int64 fast path with bigint fallback."""
    try:
        arr = np.array(rows, dtype=np.int64, order="C")
    except (OverflowError, TypeError, ValueError):
        return _py_int_rank(rows)
    if arr.ndim != 2 or arr.size == 0:
        return _py_int_rank(rows)
    cdef long long[:, ::1] view = arr
    cdef Py_ssize_t r
    with nogil:
        r = _bareiss_i64(view)
    if r < 0:
        return _py_int_rank(rows)
    return int(r)


cdef double _residual(const double[:, ::1] S, double[:, ::1] W,
                      double[:, ::1] H, double[::1] row) noexcept nogil:
    cdef Py_ssize_t M = S.shape[0], N = S.shape[1], R = W.shape[1]
    cdef Py_ssize_t m, n, r
    cdef double w, diff, total = 0.0
    for m in range(M):
        for n in range(N):
            row[n] = S[m, n]
        for r in range(R):
            w = W[m, r]
            for n in range(N):
                row[n] -= w * H[r, n]
        for n in range(N):
            diff = row[n]
            total += diff * diff
    return sqrt(total)


cdef void _mu_step(const double[:, ::1] S, double[:, ::1] W, double[:, ::1] H,
                   double[:, ::1] num_h, double[:, ::1] den_h, double[:, ::1] gram,
                   double[:, ::1] num_w, double eps) noexcept nogil:
    # inner loops run along contiguous rows so they vectorise
    cdef Py_ssize_t M = S.shape[0], N = S.shape[1], R = W.shape[1]
    cdef Py_ssize_t m, n, r, q
    cdef double acc, w, g
    # H <- H * (W^T S) / (W^T W H + eps)
    num_h[:, :] = 0.0
    gram[:, :] = 0.0
    for m in range(M):
        for r in range(R):
            w = W[m, r]
            for n in range(N):
                num_h[r, n] += w * S[m, n]
            for q in range(R):
                gram[r, q] += w * W[m, q]
    den_h[:, :] = eps
    for r in range(R):
        for q in range(R):
            g = gram[r, q]
            for n in range(N):
                den_h[r, n] += g * H[q, n]
    for r in range(R):
        for n in range(N):
            H[r, n] *= num_h[r, n] / den_h[r, n]
    # W <- W * (S H^T) / (W H H^T + eps)
    for r in range(R):
        for q in range(r, R):
            acc = 0.0
            for n in range(N):
                acc += H[r, n] * H[q, n]
            gram[r, q] = acc
            gram[q, r] = acc
    for m in range(M):
        for r in range(R):
            acc = 0.0
            for n in range(N):
                acc += S[m, n] * H[r, n]
            num_w[m, r] = acc
    for m in range(M):
        for r in range(R):
            acc = eps
            for q in range(R):
                acc += W[m, q] * gram[q, r]
            num_w[m, r] = num_w[m, r] / acc
        for r in range(R):
            W[m, r] *= num_w[m, r]


def mu_run(S, W, H, Py_ssize_t max_iters, double eps, double stop_tol):
    """Frobenius multiplicative updates; see ``nmfid._kernels_py.mu_run``."""
    S_arr = np.ascontiguousarray(S, dtype=np.float64)
    W_arr = np.array(W, dtype=np.float64, order="C")
    H_arr = np.array(H, dtype=np.float64, order="C")
    M, N = S_arr.shape
    R = W_arr.shape[1]
    W_best = W_arr.copy()
    H_best = H_arr.copy()
    history = np.empty(max_iters, dtype=np.float64)
    num_h = np.empty((R, N))
    num_w = np.empty((M, R))
    den_h = np.empty((R, N))
    gram = np.empty((R, R))
    row = np.empty(N)

    cdef const double[:, ::1] s = S_arr
    cdef double[:, ::1] w = W_arr
    cdef double[:, ::1] h = H_arr
    cdef double[:, ::1] wb = W_best
    cdef double[:, ::1] hb = H_best
    cdef double[::1] hist = history
    cdef double[:, ::1] nh = num_h
    cdef double[:, ::1] nw = num_w
    cdef double[:, ::1] dh = den_h
    cdef double[:, ::1] g = gram
    cdef double[::1] rb = row
    cdef Py_ssize_t it = 0
    cdef double loss, best

    with nogil:
        best = _residual(s, w, h, rb)
        while it < max_iters and best > stop_tol:
            _mu_step(s, w, h, nh, dh, g, nw, eps)
            loss = _residual(s, w, h, rb)
            hist[it] = loss
            it += 1
            if loss < best:
                best = loss
                wb[...] = w
                hb[...] = h
    return W_best, H_best, float(best), int(it), history[:it].copy()
