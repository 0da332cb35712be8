"""Pure-Python reference versions of the hot kernels.

The compiled module ``nmfid._ckernels`` exposes the same functions with the
same signatures; :mod:`nmfid.kernels` picks one at import time.
"""

import numpy as np


def int_rank(rows):
    """Rank of an integer matrix by fraction-free (Bareiss) elimination.

    ``rows`` is a sequence of equal-length sequences of Python ints. Every
    division performed is exact, so intermediate values stay integral.
    """
    m = [list(r) for r in rows]
    nr = len(m)
    if nr == 0:
        return 0
    nc = len(m[0])
    rank = 0
    prev = 1
    for c in range(nc):
        if rank == nr:
            break
        piv = -1
        for i in range(rank, nr):
            if m[i][c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != rank:
            m[piv], m[rank] = m[rank], m[piv]
        prow = m[rank]
        p = prow[c]
        for i in range(rank + 1, nr):
            row = m[i]
            f = row[c]
            if f == 0:
                for j in range(c + 1, nc):
                    if row[j]:
                        row[j] = (p * row[j]) // prev
            else:
                for j in range(c + 1, nc):
                    row[j] = (p * row[j] - f * prow[j]) // prev
            row[c] = 0
        prev = p
        rank += 1
    return rank


def mu_run(S, W, H, max_iters, eps, stop_tol):
    """Frobenius multiplicative updates starting from ``(W, H)``.

    Returns ``(W_best, H_best, best_loss, iterations, history)`` where
    ``history[k]`` is the residual norm after iteration ``k``.
    """
    S = np.ascontiguousarray(S, dtype=np.float64)
    W = np.array(W, dtype=np.float64)
    H = np.array(H, dtype=np.float64)
    history = np.empty(max_iters, dtype=np.float64)
    best = np.linalg.norm(S - W @ H)
    W_best, H_best = W.copy(), H.copy()
    it = 0
    while it < max_iters and best > stop_tol:
        H *= (W.T @ S) / ((W.T @ W) @ H + eps)
        W *= (S @ H.T) / (W @ (H @ H.T) + eps)
        loss = np.linalg.norm(S - W @ H)
        history[it] = loss
        it += 1
        if loss < best:
            best = loss
            W_best[...] = W
            H_best[...] = H
    return W_best, H_best, float(best), it, history[:it].copy()
