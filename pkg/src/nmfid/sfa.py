"""Separable factorial articulation families and their solution families.

A factorization is a separable factorial articulation family (SFA) when
its inner indices split into P parts of A articulations, each
(part, articulation) owns a dedicated row of W, and H samples every
articulation assignment. Extra rows of W that are strictly positive on
all articulations of some part ("invariant rows") can have their minimum
over that part redistributed across parts without changing ``W H``.
Those redistributions form a product of simplices of factorizations.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg as la
from .certify import (
    ENUMERATION_LIMIT,
    PartArticulationIndexing,
    check_complete_factorial_sampling,
    check_separability,
)
from .errors import DimensionError, GuardLimitError, OffSimplexError
from .solve import Factorization


@dataclass
class SfaCertificate:
    indexing: PartArticulationIndexing
    witness_rows: list
    binary_H: bool
    part_balanced: bool
    core_rows: list
    extra_rows: list
    notes: list = field(default_factory=list)


@dataclass
class InvariantRowRecord:
    row: int
    part: int
    epsilon: object
    vector: np.ndarray = field(repr=False, compare=False)


@dataclass
class SolutionFamily:
    base: Factorization
    certificate: SfaCertificate
    records: list

    def member(self, thetas):
        return family_member(self, thetas)


def _cooccurrence_parts(H, tol):
    supp = la.support(H, tol).astype(np.int64)
    co = (supp @ supp.T) > 0
    R = H.shape[0]
    parts, seen = [], set()
    for r in range(R):
        if r in seen:
            continue
        cls = [r] + [q for q in range(r + 1, R) if not co[r, q] and q not in seen]
        for a in cls:
            for b in cls:
                if a != b and co[a, b]:
                    return None
        parts.append(cls)
        seen.update(cls)
    return parts


def _part_sums_equal(H, idx, tol):
    sums = [[sum(H[idx.r(p, a), n] for a in range(idx.arts)) for p in range(idx.parts)]
            for n in range(H.shape[1])]
    if la.is_exact(H):
        return all(len(set(col)) == 1 for col in sums)
    scale = max(1.0, float(np.max(np.abs(H))))
    return all(max(col) - min(col) <= tol * scale for col in sums)


def detect_sfa(f, parts, arts, tol=la.DEFAULT_TOL):
    """Recognise ``f`` as an SFA with ``parts`` parts and ``arts`` articulations.

    Inner indices belong to the same part iff they never co-occur in a
    column of H; parts are ordered by their smallest inner index and
    articulations ascending, which is the lexicographically smallest
    consistent indexing. Returns an :class:`SfaCertificate` or None.
    """
    if f.inner_rank != parts * arts:
        raise DimensionError(f"inner rank {f.inner_rank} != {parts} * {arts}")
    if arts ** parts > ENUMERATION_LIMIT:
        raise GuardLimitError(f"A^P = {arts}^{parts} exceeds {ENUMERATION_LIMIT}")
    groups = _cooccurrence_parts(f.H, tol)
    if groups is None or len(groups) != parts or any(len(g) != arts for g in groups):
        return None
    idx = PartArticulationIndexing(parts, arts, tuple(tuple(g) for g in groups))
    sep = check_separability(f.W, idx, tol)
    if not sep.holds:
        return None
    if not check_complete_factorial_sampling(f.H, idx, tol).holds:
        return None
    rows = sep.witnesses["rows"]
    core = sorted(m for row in rows for m in row)
    extra = [m for m in range(f.W.shape[0]) if m not in set(core)]
    if la.is_exact(f.H):
        binary = all(x == 0 or x == 1 for x in f.H.flat)
    else:
        binary = bool(np.all((np.abs(f.H) <= tol) | (np.abs(f.H - 1) <= tol)))
    cert = SfaCertificate(idx, rows, binary, _part_sums_equal(f.H, idx, tol), core, extra)
    if arts <= 2:
        cert.notes.append(f"A={arts}: uniqueness within col(W) is not guaranteed")
    if not cert.part_balanced:
        cert.notes.append("H columns do not carry equal weight per part; "
                          "redistribution is not product-preserving")
    return cert


def find_invariant_rows(f, cert, tol=la.DEFAULT_TOL):
    """Extra rows of W strictly positive on every articulation of some part."""
    supp = la.support(f.W, tol)
    idx = cert.indexing
    records = []
    for m in cert.extra_rows:
        for p in range(idx.parts):
            cols = idx.part_columns(p)
            if all(supp[m, c] for c in cols):
                eps = min(f.W[m, c] for c in cols)
                records.append(InvariantRowRecord(m, p, eps, f.W[m, :].copy()))
    return records


def is_type2_nonidentifiable(f, cert, tol=la.DEFAULT_TOL):
    """``(flag, records)``: non-identifiable of Type II iff an invariant row exists.

    The equivalence needs H to weigh every part equally in each column
    (true for binary H); without that the flag is False.
    """
    records = find_invariant_rows(f, cert, tol)
    return bool(records) and cert.part_balanced, records


def build_family(f, cert, tol=la.DEFAULT_TOL):
    return SolutionFamily(f, cert, find_invariant_rows(f, cert, tol))


def _simplex_point(theta, parts, exact, tol):
    if exact:
        pt = [la._to_fraction(t) for t in theta]
    else:
        pt = [float(t) for t in theta]
    if len(pt) != parts:
        raise OffSimplexError(f"expected {parts} weights, got {len(pt)}")
    if any(t < 0 for t in pt):
        raise OffSimplexError("negative simplex weight")
    total = sum(pt)
    if (total != 1) if exact else (abs(total - 1.0) > tol):
        raise OffSimplexError(f"weights sum to {total}, not 1")
    return pt


def family_member(fam, thetas):
    """Factorization at simplex points ``thetas`` (one per record).

    For record ``(m, p~, eps)`` entry ``W[m, r(p, a)]`` becomes
    ``W[m, r(p, a)] - [p == p~] * eps + theta_p * eps``; H is unchanged.
    A single point (a flat sequence of P weights) is applied to every record.
    """
    idx = fam.certificate.indexing
    exact = fam.base.exact
    recs = fam.records
    thetas = list(thetas)
    if thetas and not isinstance(thetas[0], (list, tuple, np.ndarray)):
        thetas = [thetas] * len(recs)
    if len(thetas) != len(recs):
        raise OffSimplexError(f"expected {len(recs)} simplex points, got {len(thetas)}")
    W = fam.base.W.copy()
    for rec, theta in zip(recs, thetas):
        pt = _simplex_point(theta, idx.parts, exact, la.DEFAULT_TOL)
        for p in range(idx.parts):
            shift = rec.epsilon * pt[p] - (rec.epsilon if p == rec.part else 0)
            for c in idx.part_columns(p):
                W[rec.row, c] = W[rec.row, c] + shift
    if not exact:
        W[W < 0] = 0.0
    return Factorization(W, fam.base.H)


def vertex(parts, p, exact=True):
    """Standard simplex vertex putting all mass on part ``p``."""
    one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
    return [one if q == p else zero for q in range(parts)]


def rank_deficit_check(f, cert, tol=la.DEFAULT_TOL):
    """``(rank(S), R, rank(S) < R)`` for ``S = W H``."""
    S = f.product()
    r = la.rank(S, tol)
    return r, f.inner_rank, r < f.inner_rank
