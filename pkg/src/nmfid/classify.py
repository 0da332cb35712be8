"""Type I / II / III classification of sets of exact factorizations.

Two factorizations of the same ``S`` either differ by a monomial matrix
(no evidence of non-uniqueness), share a factor column space (Type I), or
live in different column spaces (Type II). A solution set showing both
kinds of difference is Type III.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import itertools
from math import gcd

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from . import linalg as la
from .errors import DimensionError, InconsistentSystemError, InexactFactorizationError
from .solve import Factorization, verify_exact

TYPE_I = "TypeI"
TYPE_II = "TypeII"
TYPE_III = "TypeIII"
NO_EVIDENCE = "NoEvidence"

SEARCH_LIMIT = 10**5


@dataclass
class SolutionSet:
    S: np.ndarray
    members: list

    def __post_init__(self):
        if not self.members:
            raise ValueError("a solution set needs at least one factorization")
        ranks = {f.inner_rank for f in self.members}
        if len(ranks) != 1:
            raise DimensionError(f"members disagree on inner rank: {sorted(ranks)}")


@dataclass
class TypeVerdict:
    kind: str
    subspace_groups: list = field(default_factory=list)
    monomial_witnesses: list = field(default_factory=list)
    basis_witnesses: list = field(default_factory=list)
    cross_witnesses: list = field(default_factory=list)
    notes: list = field(default_factory=list)


def _ratio(u, v, tol):
    """Positive ``d`` with ``v == d * u``; ``None`` if none; ``0`` if both vanish."""
    su, sv = la.support(u, tol), la.support(v, tol)
    if not np.array_equal(su, sv):
        return None
    if not su.any():
        return 0
    k = int(np.flatnonzero(su)[0])
    d = v.flat[k] / u.flat[k]
    if not d > 0:
        return None
    return d if la.equal(u * d, v, tol) else None


def relate_by_monomial(W1, W2, H1, H2, tol=la.DEFAULT_TOL):
    """Monomial ``Q`` with ``W2 = W1 Q`` and ``H2 = Q^-1 H1``, or None.

    Candidate column pairs are matched by exact column ratios and the
    pairing is completed by maximum bipartite matching.
    """
    if W1.shape != W2.shape or H1.shape != H2.shape or W1.shape[1] != H1.shape[0]:
        raise DimensionError("factor shapes do not match")
    W1, W2, H1, H2 = la.common(W1, W2, H1, H2)
    exact = la.is_exact(W1)
    one = Fraction(1) if exact else 1.0
    R = W1.shape[1]
    scale = {}
    for i in range(R):
        for j in range(R):
            d = _ratio(W1[:, i], W2[:, j], tol)
            if d is None:
                continue
            if d == 0:
                # zero generators: the scale comes from H (H2_j = H1_i / d)
                e = _ratio(H2[j, :], H1[i, :], tol)
                if e is None:
                    continue
                d = one if e == 0 else e
            elif not la.equal(H1[i, :] / d, H2[j, :], tol):
                continue
            scale[i, j] = d
    if not scale:
        return None
    rows, cols = zip(*scale)
    graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(R, R))
    match = maximum_bipartite_matching(graph, perm_type="column")
    if np.any(match < 0):
        return None
    Q = la.zeros((R, R), exact=exact)
    for i, j in enumerate(match):
        Q[i, j] = scale[i, int(j)]
    return Q


def _check_member(S, f, tol):
    res = verify_exact(S, f)
    limit = 0.0 if la.is_exact(S) and f.exact else tol * max(1.0, la.frobenius(la.to_float(S)))
    if res > limit:
        raise InexactFactorizationError(f"member residual {res:.3g} exceeds {limit:.3g}")


def basis_change(W1, W2, tol=la.DEFAULT_TOL):
    """``Q`` with ``W1 Q = W2``.

    Exact mode solves the linear system and raises if it is inconsistent;
    float mode uses the pseudoinverse, i.e. ``(W1^T W1)^-1 W1^T W2``.
    """
    W1, W2 = la.common(W1, W2)
    if la.is_exact(W1):
        return la.solve(W1, W2)
    return np.linalg.pinv(W1) @ W2


def cross_change(W_from, W_to, tol=la.DEFAULT_TOL):
    """Some ``M x M`` matrix ``Q`` with ``Q W_from = W_to``."""
    return basis_change(W_from.T, W_to.T, tol).T


def _type1_witness(a, b, fa, fb, tol):
    Q = basis_change(fa.W, fb.W, tol)
    rec = {"pair": [a, b], "Q": Q, "verified": False}
    try:
        Qinv = la.inverse(Q, tol)
    except InconsistentSystemError:
        rec["note"] = "basis change is singular"
        return rec
    rec["verified"] = la.equal(la.matmul(fa.W, Q), fb.W, tol) and \
        la.equal(la.matmul(Qinv, fa.H), fb.H, tol)
    return rec


def _cross_witness(a, b, fa, fb, tol):
    rec = {"pair": [a, b]}
    try:
        Q = cross_change(fb.W, fa.W, tol)
    except InconsistentSystemError:
        rec["note"] = "no Q with W_a = Q W_b"
        return rec
    rec["Q"] = Q
    rec["relation"] = "W_a = Q W_b"
    rec["invertible"] = la.rank(Q, tol) == Q.shape[0]
    return rec


def _nested_note(Wa, Wb, tol):
    ra, rb = la.rank(Wa, tol), la.rank(Wb, tol)
    joint = la.rank(np.hstack(la.common(Wa, Wb)), tol)
    if ra != rb and joint == max(ra, rb):
        return "degenerate: rank-deficient extension (one factor column space strictly contains the other)"
    return None


def classify_solution_set(ss, tol=la.DEFAULT_TOL):
    """Group members by factor column space and apply the Type I/II/III rules."""
    for f in ss.members:
        _check_member(ss.S, f, tol)
    verdict = TypeVerdict(NO_EVIDENCE)
    members = ss.members
    groups = []
    for k, f in enumerate(members):
        for g in groups:
            if la.column_space_equal(members[g[0]].W, f.W, tol):
                g.append(k)
                break
        else:
            groups.append([k])
    verdict.subspace_groups = groups

    multi_class = []
    for g in groups:
        reps = []
        for k in g:
            f = members[k]
            for rep in reps:
                Q = relate_by_monomial(members[rep].W, f.W, members[rep].H, f.H, tol)
                if Q is not None:
                    verdict.monomial_witnesses.append({"pair": [rep, k], "Q": Q})
                    break
            else:
                if reps:
                    verdict.basis_witnesses.append(
                        _type1_witness(reps[0], k, members[reps[0]], f, tol))
                reps.append(k)
        multi_class.append(len(reps) >= 2)

    for g in groups[1:]:
        a, b = groups[0][0], g[0]
        verdict.cross_witnesses.append(_cross_witness(a, b, members[a], members[b], tol))
        note = _nested_note(members[a].W, members[b].W, tol)
        if note and note not in verdict.notes:
            verdict.notes.append(note)

    if len(groups) == 1:
        verdict.kind = TYPE_I if multi_class[0] else NO_EVIDENCE
    elif any(multi_class):
        verdict.kind = TYPE_III
    else:
        verdict.kind = TYPE_II
        verdict.notes.append("every subspace group is internally monomial-equivalent "
                             "among the supplied members")
    if len(members) == 1:
        verdict.notes.append("single factorization: no comparison possible")
    return verdict


def classify_pair(S, f1, f2, tol=la.DEFAULT_TOL):
    """Classify two exact factorizations of ``S``."""
    return classify_solution_set(SolutionSet(S, [f1, f2]), tol)


# ---------------------------------------------------------------------------
# constructive alternatives


def alternative_from_violation(f, r1, r2, kind, tol=la.DEFAULT_TOL):
    """Second exact factorization built from a support containment.

    ``kind="M"`` (``M_r1`` inside ``M_r2``) moves mass from column ``r2`` of
    W into row ``r1`` of H; ``kind="N"`` (``N_r1`` inside ``N_r2``) moves mass
    from row ``r2`` of H into column ``r1`` of W. The step is half the
    largest one that keeps both factors nonnegative. Returns None when the
    result is only a monomial relabelling.
    """
    W, H = f.W.copy(), f.H.copy()
    exact = f.exact
    half = Fraction(1, 2) if exact else 0.5
    if kind == "M":
        src, dst = W[:, r1], W[:, r2]
    elif kind == "N":
        src, dst = H[r1, :], H[r2, :]
    else:
        raise ValueError(f"kind must be 'M' or 'N', got {kind!r}")
    nz = np.flatnonzero(la.support(src.reshape(1, -1), tol))
    if len(nz):
        delta = min(dst[k] / src[k] for k in nz) * half
    else:
        delta = Fraction(1) if exact else 1.0
    if not delta > 0:
        return None
    if kind == "M":
        W[:, r2] = W[:, r2] - delta * W[:, r1]
        H[r1, :] = H[r1, :] + delta * H[r2, :]
    else:
        H[r2, :] = H[r2, :] - delta * H[r1, :]
        W[:, r1] = W[:, r1] + delta * W[:, r2]
    if not exact:
        W[W < 0] = 0.0
        H[H < 0] = 0.0
    alt = Factorization(W, H)
    if relate_by_monomial(f.W, alt.W, f.H, alt.H, tol) is not None:
        return None
    return alt


def _primitive(y):
    # scale an exact vector to coprime integers for deduplication
    den = 1
    for x in y:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in y]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    return tuple(Fraction(v // g) for v in ints)


def cone_rays(W, tol=la.DEFAULT_TOL, limit=SEARCH_LIMIT):
    """Extreme rays of ``{y : W y >= 0}`` for full-column-rank ``W``.

    Each ray is the null vector of ``R - 1`` independent tight rows of W.
    Returns an ``R x k`` matrix of rays, or None if the enumeration would
    exceed ``limit`` subsets.
    """
    M, R = W.shape
    if R == 1:
        return la.identity(1, la.is_exact(W))
    n_subsets = 1
    for k in range(R - 1):
        n_subsets = n_subsets * (M - k) // (k + 1)
    if n_subsets > limit:
        return None
    exact = la.is_exact(W)
    seen = {}
    for rows in itertools.combinations(range(M), R - 1):
        null = la.nullspace(W[list(rows), :], tol)
        if null.shape[1] != 1:
            continue
        y = null[:, 0]
        img = la.matmul(W, y.reshape(-1, 1)).ravel()
        zmask = la.zero_mask(img.reshape(-1, 1), tol).ravel()
        if all(v >= 0 or z for v, z in zip(img, zmask)):
            pass
        elif all(v <= 0 or z for v, z in zip(img, zmask)):
            y = -y
        else:
            continue
        if exact:
            key = _primitive(y)
        else:
            y = y / np.linalg.norm(y)
            key = tuple(np.round(y / tol ** 0.5).astype(np.int64))
        seen.setdefault(key, y)
    if not seen:
        return la.zeros((R, 0), exact)
    return np.column_stack(list(seen.values()))


def subspace_alternative(f, tol=la.DEFAULT_TOL, limit=SEARCH_LIMIT):
    """Search col(W) for a second simplicial cone containing the data.

    Candidate generators are the extreme rays of ``col(W)`` intersected with
    the nonnegative orthant; every ``R``-subset ``Q`` (in ray coordinates)
    with ``Q^-1 H >= 0`` gives the factorization ``(W Q, Q^-1 H)``. Returns
    the first one that is not a monomial relabelling of ``f``, or None.
    The search is sound but not complete.
    """
    W, H = f.W, f.H
    R = f.inner_rank
    if la.rank(W, tol) < R:
        return None
    rays = cone_rays(W, tol, limit)
    if rays is None or rays.shape[1] < R:
        return None
    k = rays.shape[1]
    count = 1
    for j in range(R):
        count = count * (k - j) // (j + 1)
    if count > limit:
        return None
    for cols in itertools.combinations(range(k), R):
        Q = rays[:, list(cols)]
        if la.rank(Q, tol) < R:
            continue
        Hn = la.solve(Q, H, tol)
        if la.is_exact(Hn):
            if any(x < 0 for x in Hn.flat):
                continue
        else:
            if np.any(Hn < -tol * max(1.0, float(np.max(np.abs(Hn))))):
                continue
            Hn = np.clip(Hn, 0.0, None)
        Wn = la.matmul(W, Q)
        if not la.is_exact(Wn):
            Wn = np.clip(Wn, 0.0, None)
        alt = Factorization(Wn, Hn)
        if relate_by_monomial(W, alt.W, H, alt.H, tol) is None:
            return alt
    return None
