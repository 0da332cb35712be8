"""Block-diagonal models ``S = G W H`` and their direct-sum decomposition.

The finest simultaneous block structure of ``(W, H)`` is read off the
connected components of the tripartite incidence graph on rows of W,
inner indices and columns of H, with an edge for every nonzero entry.
When G has full column rank, ``S`` is identifiable iff every block is.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import certify, kernels
from . import linalg as la
from . import sfa
from .classify import alternative_from_violation, subspace_alternative
from .errors import DimensionError, InconsistentDecompositionError, RankDeficientError
from .solve import Factorization

UNIQUE = "unique"
NON_IDENTIFIABLE = "non-identifiable"
UNKNOWN = "unknown"


@dataclass(frozen=True, eq=False)
class BlockModel:
    """``S = G W H`` with nonnegative G (M x T), W (T x R) and H (R x N)."""

    G: np.ndarray
    W: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        G, W, H = la.common(la.nonneg(self.G), la.nonneg(self.W), la.nonneg(self.H))
        if G.shape[1] != W.shape[0]:
            raise DimensionError(f"G is {G.shape} but W is {W.shape}")
        if W.shape[1] != H.shape[0]:
            raise DimensionError(f"W is {W.shape} but H is {H.shape}")
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "H", H)

    @classmethod
    def plain(cls, W, H):
        """Model with ``G = I``."""
        W = la.nonneg(W)
        return cls(la.identity(W.shape[0], la.is_exact(W)), W, H)

    def full_rank_G(self, tol=la.DEFAULT_TOL):
        return la.rank(self.G, tol) == self.G.shape[1]

    def product(self):
        return la.matmul(self.G, la.matmul(self.W, self.H))

    @property
    def factorization(self):
        return Factorization(self.W, self.H)


@dataclass
class Block:
    rows: list       # row indices of W (= columns of G)
    inner: list      # inner indices
    cols: list       # columns of H (= columns of S)

    @property
    def degenerate(self):
        return not self.rows or not self.cols


@dataclass
class BlockDecomposition:
    """Blocks in order of their smallest inner index (all indices 0-based).

    ``zero_rows`` / ``zero_cols`` are rows of W and columns of H with no
    nonzero entry; they belong to no block. ``clause_checks`` has one
    entry per H-only block recording the compatibility clauses (a)/(b).
    """

    inner_permutation: list
    blocks: list
    zero_rows: list = field(default_factory=list)
    zero_cols: list = field(default_factory=list)
    clause_checks: list = field(default_factory=list)

    @property
    def K(self):
        return len(self.blocks)


def _components(n_left, n_right, pairs):
    n = n_left + n_right
    if pairs:
        i, j = zip(*pairs)
        g = coo_matrix((np.ones(len(pairs)), (i, j)), shape=(n, n))
    else:
        g = coo_matrix((n, n))
    _, labels = connected_components(g, directed=False)
    return labels


def _inner_groups(supp, axis_len, inner_axis):
    # components of a single bipartite factor, restricted to inner indices
    R = supp.shape[inner_axis]
    nz = np.argwhere(supp)
    if inner_axis == 1:
        pairs = [(int(a), axis_len + int(b)) for a, b in nz]
    else:
        pairs = [(axis_len + int(a), int(b)) for a, b in nz]
    labels = _components(axis_len, R, pairs)
    groups = {}
    for r in range(R):
        groups.setdefault(labels[axis_len + r], []).append(r)
    return [frozenset(g) for g in groups.values()]


def _clause_checks(sw, sh):
    T, _ = sw.shape
    N = sh.shape[1]
    w_blocks = _inner_groups(sw, T, 1)
    h_blocks = _inner_groups(sh.T, N, 1)
    checks = []
    for J in sorted(h_blocks, key=min):
        a = all(Jw <= J or not (Jw & J) for Jw in w_blocks)
        b = any(J <= Jw and all(Jh <= Jw or not (Jh & Jw) for Jh in h_blocks)
                for Jw in w_blocks)
        checks.append({"inner": sorted(J), "a": a, "b": b, "ok": a or b})
    return checks


def find_block_structure(W, H, tol=la.DEFAULT_TOL):
    """Finest simultaneous block structure of ``(W, H)``."""
    W, H = la.matrix(W), la.matrix(H)
    if W.shape[1] != H.shape[0]:
        raise DimensionError(f"W has {W.shape[1]} columns, H has {H.shape[0]} rows")
    T, R = W.shape
    N = H.shape[1]
    sw, sh = la.support(W, tol), la.support(H, tol)
    pairs = [(int(i), T + int(j)) for i, j in np.argwhere(sw)]
    pairs += [(T + int(j), T + R + int(l)) for j, l in np.argwhere(sh)]
    labels = _components(T, R + N, pairs)
    by_label = {}
    for r in range(R):
        by_label.setdefault(labels[T + r], Block([], [], []))
    for r in range(R):
        by_label[labels[T + r]].inner.append(r)
    zero_rows, zero_cols = [], []
    for i in range(T):
        blk = by_label.get(labels[i])
        (blk.rows if blk is not None else zero_rows).append(i)
    for l in range(N):
        blk = by_label.get(labels[T + R + l])
        (blk.cols if blk is not None else zero_cols).append(l)
    blocks = sorted(by_label.values(), key=lambda b: b.inner[0])
    perm = [r for b in blocks for r in b.inner]
    return BlockDecomposition(perm, blocks, zero_rows, zero_cols, _clause_checks(sw, sh))


def _check_decomposition(m, d):
    T, R = m.W.shape
    N = m.H.shape[1]
    rows = sorted(i for b in d.blocks for i in b.rows) + list(d.zero_rows)
    inner = sorted(r for b in d.blocks for r in b.inner)
    cols = sorted(l for b in d.blocks for l in b.cols) + list(d.zero_cols)
    if sorted(rows) != list(range(T)) or inner != list(range(R)) or sorted(cols) != list(range(N)):
        raise InconsistentDecompositionError("index sets do not partition the model")
    for b in d.blocks:
        others_r = [r for r in range(R) if r not in set(b.inner)]
        if b.rows and others_r and la.support(m.W[np.ix_(b.rows, others_r)]).any():
            raise InconsistentDecompositionError("W has entries outside its blocks")
        if b.cols and others_r and la.support(m.H[np.ix_(others_r, b.cols)]).any():
            raise InconsistentDecompositionError("H has entries outside its blocks")


def direct_sum_decompose(m, d):
    """Sub-models ``(G[:, rows], W[rows, inner], H[inner, cols])`` per block.

    Degenerate blocks (no W rows or no H columns) give None.
    """
    _check_decomposition(m, d)
    subs = []
    for b in d.blocks:
        if b.degenerate:
            subs.append(None)
            continue
        subs.append(BlockModel(m.G[:, b.rows], m.W[np.ix_(b.rows, b.inner)],
                               m.H[np.ix_(b.inner, b.cols)]))
    return subs


def reassemble(m, d, subs):
    """Scatter sub-model products back into the columns of S."""
    M, N = m.G.shape[0], m.H.shape[1]
    S = la.zeros((M, N), la.is_exact(m.G))
    for b, sub in zip(d.blocks, subs):
        if sub is not None:
            S[:, b.cols] = sub.product()
    return S


@dataclass
class BlockVerdict:
    block: int
    verdict: str
    reason: str
    reports: list = field(default_factory=list)
    alternative: Factorization | None = None


def _huang_alternative(f, rep, tol):
    for r1, r2, kind in rep.witnesses.get("violations", []):
        alt = alternative_from_violation(f, r1, r2, kind, tol)
        if alt is not None:
            return alt
    return None


def analyze_block(k, sub, tol=la.DEFAULT_TOL, parts=None, arts=None):
    """Identifiability verdict for one sub-model."""
    if sub is None:
        return BlockVerdict(k, NON_IDENTIFIABLE,
                            "inner indices with an empty W column or H row are free")
    f = sub.factorization
    X = f.product()
    R = f.inner_rank
    if R == 1:
        return BlockVerdict(k, UNIQUE, "rank-one block is unique up to scaling")
    huang = certify.check_huang(f.W, f.H, tol)
    reports = [huang, certify.check_boundary_close(f.W, tol)]
    if not huang.holds:
        alt = _huang_alternative(f, huang, tol)
        if alt is not None:
            return BlockVerdict(k, NON_IDENTIFIABLE, "support containment", reports, alt)
    laur = certify.check_laurberg(X, f, tol)
    reports.append(laur)
    if laur.holds:
        return BlockVerdict(k, UNIQUE, "sufficiently spread and strongly boundary close",
                            reports)
    if parts and arts and parts * arts == R:
        cert = sfa.detect_sfa(f, parts, arts, tol)
        if cert is not None:
            flag, records = sfa.is_type2_nonidentifiable(f, cert, tol)
            if flag:
                fam = sfa.build_family(f, cert, tol)
                rec = records[0]
                target = (rec.part + 1) % parts
                thetas = [sfa.vertex(parts, target if r is rec else r.part, f.exact)
                          for r in records]
                return BlockVerdict(k, NON_IDENTIFIABLE, "invariant row in an SFA",
                                    reports, fam.member(thetas))
            if arts > 2 and cert.part_balanced and not records:
                return BlockVerdict(k, UNIQUE, "SFA without invariant rows", reports)
    alt = subspace_alternative(f, tol)
    if alt is not None:
        return BlockVerdict(k, NON_IDENTIFIABLE, "second cone inside col(W)", reports, alt)
    return BlockVerdict(k, UNKNOWN, "no implemented certificate applies", reports)


def _aggregate(verdicts):
    kinds = [v.verdict for v in verdicts]
    if NON_IDENTIFIABLE in kinds:
        return NON_IDENTIFIABLE
    if kinds and all(v == UNIQUE for v in kinds):
        return UNIQUE
    return UNKNOWN


def blockwise_identifiability(m, d, tol=la.DEFAULT_TOL, parts=None, arts=None):
    """Per-block verdicts and their aggregate.

    Requires G of full column rank, under which S is non-identifiable iff
    some block is.
    """
    if not m.full_rank_G(tol):
        raise RankDeficientError("G must have full column rank")
    subs = direct_sum_decompose(m, d)
    jobs = list(enumerate(subs))
    run = lambda job: analyze_block(job[0], job[1], tol, parts, arts)  # noqa: E731
    threads = min(kernels.thread_cap(), len(jobs))
    if threads <= 1:
        verdicts = [run(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            verdicts = list(pool.map(run, jobs))
    return verdicts, _aggregate(verdicts)


def incidence_connected(S, tol=la.DEFAULT_TOL):
    """True when the row/column incidence graph of ``S`` itself is connected."""
    S = la.matrix(S)
    M, N = S.shape
    pairs = [(int(i), M + int(j)) for i, j in np.argwhere(la.support(S, tol))]
    labels = _components(M, N, pairs)
    return len(set(labels.tolist())) == 1
