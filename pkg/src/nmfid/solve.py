"""Candidate factorizations, exactness checks and nonnegative-rank bounds."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from . import linalg as la
from .errors import DimensionError


@dataclass(frozen=True, eq=False)
class Factorization:
    """A nonnegative pair ``(W, H)`` with ``W.shape[1] == H.shape[0]``."""

    W: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        W = la.nonneg(self.W)
        H = la.nonneg(self.H)
        if W.shape[1] != H.shape[0]:
            raise DimensionError(
                f"inner dimensions differ: W is {W.shape}, H is {H.shape}")
        W, H = la.common(W, H)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "H", H)

    @property
    def inner_rank(self):
        return self.W.shape[1]

    @property
    def exact(self):
        return la.is_exact(self.W)

    def product(self):
        return la.matmul(self.W, self.H)

    def permuted(self, perm, scale=None):
        """``(W P D, D^-1 P^T H)`` for a permutation ``perm`` and positive ``scale``."""
        perm = list(perm)
        W = self.W[:, perm].copy()
        H = self.H[perm, :].copy()
        if scale is not None:
            for j, d in enumerate(scale):
                W[:, j] = W[:, j] * d
                H[j, :] = H[j, :] / d
        return Factorization(W, H)


@dataclass(frozen=True)
class SolveConfig:
    """Settings for :func:`nmf_solve`.

    ``max_iters`` bounds the multiplicative-update warm start and
    ``polish_iters`` the alternating NNLS sweeps that follow it.
    """

    target_rank: int
    max_iters: int = 2000
    seed: int = 0
    loss: str = "frobenius"
    stop_tol: float = 1e-6
    polish_iters: int = 200
    eps: float = 1e-12

    def __post_init__(self):
        if self.target_rank < 1:
            raise ValueError("target_rank must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.stop_tol < 0:
            raise ValueError("stop_tol must be >= 0")
        if self.polish_iters < 0:
            raise ValueError("polish_iters must be >= 0")
        if self.loss != "frobenius":
            raise ValueError(f"unsupported loss {self.loss!r}")

    def with_(self, **changes):
        values = {**self.__dict__, **changes}
        return SolveConfig(**values)


@dataclass
class SolveResult:
    factorization: Factorization
    residual: float
    seed: int
    history: np.ndarray = field(repr=False)


@dataclass
class RankBounds:
    lower: int
    upper: int
    upper_witness: Factorization | None = None
    witness_residual: float | None = None

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")


def verify_exact(S, f, tol=None):
    """Frobenius residual ``||S - W H||``.

    In exact mode the residual is ``0.0`` exactly when ``S == W H``. The
    ``tol`` argument is accepted for interface symmetry; callers compare.
    """
    if S.shape != (f.W.shape[0], f.H.shape[1]):
        raise DimensionError(
            f"S is {S.shape} but W H is {(f.W.shape[0], f.H.shape[1])}")
    S, W, H = la.common(S, f.W, f.H)
    return la.frobenius(S - la.matmul(W, H))


def is_exact_factorization(S, f, tol=0.0):
    return verify_exact(S, f) <= tol


def _initial_factors(shape, rank, seed):
    # PCG64 via numpy's default_rng; entries i.i.d. uniform on (0, 1]
    rng = np.random.default_rng(seed)
    M, N = shape
    W = 1.0 - rng.random((M, rank))
    H = 1.0 - rng.random((rank, N))
    return W, H


def _polish(S, W, H, sweeps, stop_tol, history):
    # alternating exact NNLS blocks; each block solve cannot raise the loss
    best = history[-1] if history else la.frobenius(S - W @ H)
    W_best, H_best = W.copy(), H.copy()
    for _ in range(sweeps):
        if best <= stop_tol:
            break
        H = np.column_stack([la.nnls(W, S[:, n])[0] for n in range(S.shape[1])])
        W = np.vstack([la.nnls(H.T, S[m, :])[0] for m in range(S.shape[0])])
        loss = la.frobenius(S - W @ H)
        history.append(loss)
        improved = best - loss
        if loss < best:
            best = loss
            W_best, H_best = W.copy(), H.copy()
        if improved <= 1e-12 * max(best, 1e-300):
            break
    return W_best, H_best, best


def nmf_trace(S, cfg, backend=None):
    """Run one seeded solve and return the best iterate with its loss history."""
    S = la.to_float(S)
    W0, H0 = _initial_factors(S.shape, cfg.target_rank, cfg.seed)
    kern = kernels.get_backend(backend)
    W, H, best, _, hist = kern.mu_run(S, W0, H0, cfg.max_iters, cfg.eps, cfg.stop_tol)
    history = list(hist)
    if cfg.polish_iters and best > cfg.stop_tol:
        W, H, best = _polish(S, W, H, cfg.polish_iters, cfg.stop_tol, history)
    return SolveResult(Factorization(W, H), float(best), cfg.seed, np.array(history))


def nmf_solve(S, cfg):
    """Seeded multiplicative-update NMF followed by an alternating NNLS polish."""
    return nmf_trace(S, cfg).factorization


def _map_restarts(S, cfg, seeds):
    threads = min(kernels.thread_cap(), len(seeds))
    run = lambda s: nmf_trace(S, cfg.with_(seed=s))  # noqa: E731
    if threads <= 1:
        return [run(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, seeds))


def best_of_restarts(S, cfg, restarts):
    """Lowest-residual result over seeds ``cfg.seed .. cfg.seed + restarts - 1``.

    Ties go to the lowest seed.
    """
    seeds = [cfg.seed + i for i in range(max(1, restarts))]
    results = _map_restarts(S, cfg, seeds)
    return min(results, key=lambda r: (r.residual, r.seed))


def first_success(S, cfg, restarts):
    """Result for the lowest seed whose residual reaches ``cfg.stop_tol``, else None.

    Seeds run in chunks of ``NMFID_THREADS``; the answer does not depend on
    the chunk size.
    """
    seeds = [cfg.seed + i for i in range(max(1, restarts))]
    chunk = kernels.thread_cap()
    for start in range(0, len(seeds), chunk):
        results = _map_restarts(S, cfg, seeds[start:start + chunk])
        hits = [r for r in results if r.residual <= cfg.stop_tol]
        if hits:
            return min(hits, key=lambda r: r.seed)
    return None


def trivial_factorization(S):
    """``I S`` when ``M <= N``, else ``S I``; inner rank ``min(M, N)``."""
    M, N = S.shape
    exact = la.is_exact(S)
    if M <= N:
        return Factorization(la.identity(M, exact), S.copy())
    return Factorization(S.copy(), la.identity(N, exact))


def nonneg_rank_bounds(S, cfg=None, restarts=20, known=(), tol=la.DEFAULT_TOL):
    """Bracket ``rank_+(S)`` between ``rank(S)`` and a witnessed inner rank.

    The upper bound starts at ``min(M, N)`` (trivial factorization) or the
    smallest inner rank among ``known`` exact factorizations, then scans
    downward, stopping at the first rank where no restart reaches
    ``cfg.stop_tol``. With ``restarts=0`` no solver runs.
    """
    lower = la.rank(S, tol)
    witness = trivial_factorization(S)
    residual = 0.0
    for f in known:
        if f.inner_rank < witness.inner_rank and verify_exact(S, f) <= (0.0 if f.exact else tol):
            witness, residual = f, verify_exact(S, f)
    upper = witness.inner_rank
    if cfg is None:
        cfg = SolveConfig(target_rank=max(1, upper))
    r = upper - 1
    while restarts > 0 and r >= max(lower, 1):
        hit = first_success(S, cfg.with_(target_rank=r), restarts)
        if hit is None:
            break
        witness, residual, upper = hit.factorization, hit.residual, r
        r -= 1
    return RankBounds(lower, upper, witness, residual)
