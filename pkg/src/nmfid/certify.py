"""Uniqueness certificates for exact NMFs.

Two families of checks live here. Sufficient conditions (separable
complete factorial families; sufficiently spread H with strongly boundary
close W) prove uniqueness when they hold. Necessary conditions (boundary
closeness, support incomparability) prove non-uniqueness when they fail.

Every report carries the witnesses behind its verdict. Witness payloads
contain index data only (0-based here, 1-based once serialized), so
:func:`recheck` can validate them against the matrices directly.
"""

from dataclasses import dataclass, field
import itertools

import numpy as np

from . import linalg as la
from .errors import DimensionError, GuardLimitError, InexactFactorizationError
from .solve import verify_exact

HOLDS = "holds"
FAILS = "fails"
UNKNOWN = "unknown"

ENUMERATION_LIMIT = 10**6
SBC_MAX_RANK = 8


@dataclass(frozen=True)
class PartArticulationIndexing:
    """Bijection between inner indices ``r`` and (part, articulation) pairs.

    ``index[p][a]`` is the inner index of part ``p`` in articulation ``a``
    (all 0-based). The default is the lexicographic map ``r = p * A + a``.
    """

    parts: int
    arts: int
    index: tuple = None

    def __post_init__(self):
        if self.parts < 1 or self.arts < 1:
            raise ValueError("parts and articulations must be positive")
        if self.index is None:
            idx = tuple(tuple(p * self.arts + a for a in range(self.arts))
                        for p in range(self.parts))
        else:
            idx = tuple(tuple(int(r) for r in row) for row in self.index)
        if len(idx) != self.parts or any(len(row) != self.arts for row in idx):
            raise ValueError("index table must be parts x articulations")
        flat = sorted(r for row in idx for r in row)
        if flat != list(range(self.parts * self.arts)):
            raise ValueError("index table is not a bijection onto 0..R-1")
        object.__setattr__(self, "index", idx)

    @property
    def rank(self):
        return self.parts * self.arts

    def r(self, p, a):
        return self.index[p][a]

    def part_of(self, r):
        for p, row in enumerate(self.index):
            if r in row:
                return p, row.index(r)
        raise KeyError(r)

    def part_columns(self, p):
        return list(self.index[p])

    def assignments(self):
        """Every articulation choice ``(a_1, ..., a_P)``, lexicographically."""
        if self.arts ** self.parts > ENUMERATION_LIMIT:
            raise GuardLimitError(
                f"A^P = {self.arts}^{self.parts} exceeds {ENUMERATION_LIMIT}")
        return itertools.product(range(self.arts), repeat=self.parts)

    def to_list(self):
        return [list(row) for row in self.index]


@dataclass
class SupportSets:
    """Row supports of W's columns and column supports of H's rows."""

    M: list
    N: list

    @classmethod
    def of(cls, W, H, tol=la.DEFAULT_TOL):
        sw = la.support(W, tol)
        sh = la.support(H, tol)
        return cls([frozenset(np.flatnonzero(sw[:, r]).tolist()) for r in range(W.shape[1])],
                   [frozenset(np.flatnonzero(sh[r, :]).tolist()) for r in range(H.shape[0])])


@dataclass
class CertificateReport:
    condition: str
    verdict: str
    role: str
    source: str
    witnesses: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def holds(self):
        return self.verdict == HOLDS

    def summary(self):
        keys = ", ".join(sorted(self.witnesses)) or "-"
        return f"{self.condition}: {self.verdict} [{keys}]"


# ---------------------------------------------------------------------------
# separable complete factorial families


def _singleton_rows(supp):
    rows = {}
    counts = supp.sum(axis=1)
    for m in np.flatnonzero(counts == 1):
        r = int(np.flatnonzero(supp[m])[0])
        rows.setdefault(r, int(m))
    return rows


def check_separability(W, idx, tol=la.DEFAULT_TOL):
    """Each (part, articulation) owns a row of W nonzero only in its column.

    The witness lists the lowest such row per pair as ``rows[p][a]``.
    """
    if W.shape[1] != idx.rank:
        raise DimensionError(f"W has {W.shape[1]} columns, indexing needs {idx.rank}")
    owners = _singleton_rows(la.support(W, tol))
    rows = [[owners.get(idx.r(p, a)) for a in range(idx.arts)] for p in range(idx.parts)]
    missing = [[p, a] for p in range(idx.parts) for a in range(idx.arts) if rows[p][a] is None]
    rep = CertificateReport("separability", FAILS if missing else HOLDS,
                            "component", "Donoho-Stodden R3",
                            witnesses={"indexing": idx.to_list()})
    if missing:
        rep.witnesses["missing_pairs"] = missing
        rep.notes.append(f"{len(missing)} (part, articulation) pairs lack a dedicated row")
    else:
        rep.witnesses["rows"] = rows
    return rep


def _column_assignments(H, idx, tol):
    supp = la.support(H, tol)
    found = {}
    for n in range(H.shape[1]):
        choice = []
        for p in range(idx.parts):
            active = [a for a in range(idx.arts) if supp[idx.r(p, a), n]]
            if len(active) != 1:
                break
            choice.append(active[0])
        else:
            found.setdefault(tuple(choice), n)
    return found


def check_complete_factorial_sampling(H, idx, tol=la.DEFAULT_TOL):
    """Every articulation assignment appears as the exact support of some column.

    Raises :class:`GuardLimitError` when ``A**P`` exceeds the enumeration limit.
    """
    if H.shape[0] != idx.rank:
        raise DimensionError(f"H has {H.shape[0]} rows, indexing needs {idx.rank}")
    assignments = list(idx.assignments())
    found = _column_assignments(H, idx, tol)
    missing = [list(c) for c in assignments if c not in found]
    rep = CertificateReport("complete_factorial_sampling", FAILS if missing else HOLDS,
                            "component", "Donoho-Stodden R2",
                            witnesses={"indexing": idx.to_list()})
    if missing:
        rep.witnesses["missing_assignments"] = missing[:20]
        rep.notes.append(f"{len(missing)} of {len(assignments)} articulation assignments absent")
    else:
        rep.witnesses["columns"] = [found[c] for c in assignments]
    return rep


def _require_exact(S, f, tol):
    res = verify_exact(S, f)
    limit = 0.0 if la.is_exact(S) and f.exact else tol * max(1.0, la.frobenius(la.to_float(S)))
    if res > limit:
        raise InexactFactorizationError(f"residual {res:.3g} exceeds {limit:.3g}")


def check_donoho(S, f, idx, tol=la.DEFAULT_TOL):
    """Separable complete factorial family test (uniqueness within col(W)).

    Holds when R = P*A, S = W H, separability and complete factorial
    sampling hold and A > 2. With A <= 2 the verdict is unknown: such
    families can admit a second factorization inside col(W).
    """
    _require_exact(S, f, tol)
    if f.inner_rank != idx.rank:
        raise DimensionError(f"inner rank {f.inner_rank} != P*A = {idx.rank}")
    sep = check_separability(f.W, idx, tol)
    cfs = check_complete_factorial_sampling(f.H, idx, tol)
    rep = CertificateReport("donoho_stodden", FAILS, "sufficient", "Donoho-Stodden",
                            witnesses={"separability": sep.witnesses,
                                       "complete_factorial_sampling": cfs.witnesses})
    if not (sep.holds and cfs.holds):
        rep.notes.extend(sep.notes + cfs.notes)
        return rep
    if idx.arts > 2:
        rep.verdict = HOLDS
        rep.notes.append("unique within col(W)")
    else:
        rep.verdict = UNKNOWN
        rep.notes.append(f"A={idx.arts}: separable complete factorial families with "
                         "A <= 2 can have distinct factorizations in col(W)")
    return rep


# ---------------------------------------------------------------------------
# sufficiently spread / boundary close


def check_sufficiently_spread(H, tol=la.DEFAULT_TOL, strict=False):
    """Every row of H has a pure column (support exactly that row).

    ``strict=True`` instead demands that every row of H have a single
    nonzero entry.
    """
    supp = la.support(H, tol)
    R = H.shape[0]
    cols = []
    if strict:
        for r in range(R):
            nz = np.flatnonzero(supp[r])
            cols.append(int(nz[0]) if len(nz) == 1 else None)
    else:
        pure = {}
        for n in np.flatnonzero(supp.sum(axis=0) == 1):
            pure.setdefault(int(np.flatnonzero(supp[:, n])[0]), int(n))
        cols = [pure.get(r) for r in range(R)]
    bad = [r for r in range(R) if cols[r] is None]
    rep = CertificateReport("sufficiently_spread", FAILS if bad else HOLDS,
                            "component", "Laurberg R1",
                            notes=["strict reading"] if strict else [])
    if bad:
        rep.witnesses["rows_without_pure_column"] = bad
    else:
        rep.witnesses["columns"] = cols
    return rep


def check_boundary_close(W, tol=la.DEFAULT_TOL, strict=False):
    """Every column of W has a zero entry (exactly one with ``strict=True``).

    Failure is a non-uniqueness proof when R >= 2: a strictly positive
    column can donate a small multiple of another column.
    """
    zero = la.zero_mask(W, tol)
    counts = zero.sum(axis=0)
    ok = counts == 1 if strict else counts >= 1
    bad = np.flatnonzero(~ok).tolist()
    rep = CertificateReport("boundary_close", FAILS if bad else HOLDS,
                            "necessary", "Laurberg",
                            notes=["strict reading"] if strict else [])
    if bad:
        rep.witnesses["columns"] = bad
        positive = [r for r in bad if counts[r] == 0]
        if positive and W.shape[1] >= 2:
            rep.notes.append("NMF cannot be unique: factor column(s) without a zero entry")
    else:
        rep.witnesses["zero_rows"] = [int(np.flatnonzero(zero[:, r])[0]) for r in range(W.shape[1])]
    return rep


class _Budget(Exception):
    pass


def check_strongly_boundary_close(W, tol=la.DEFAULT_TOL, max_rank=SBC_MAX_RANK,
                                  node_limit=ENUMERATION_LIMIT):
    """Boundary close plus a staircase of invertible zero-pattern minors.

    Searches for an ordering of R rows of W such that the row at position
    ``m`` (1-based) vanishes on some ``R - m`` columns whose restriction to
    the rows at positions ``m+1..R`` is invertible. Rows are placed from
    the bottom of the staircase up, lowest row index first; the search is
    exhaustive for ``R <= max_rank`` and reports unknown beyond that or when
    ``node_limit`` is exhausted.
    """
    base = check_boundary_close(W, tol)
    rep = CertificateReport("strongly_boundary_close", FAILS, "component", "Laurberg R2")
    if not base.holds:
        rep.notes.append("not boundary close")
        rep.witnesses.update(base.witnesses)
        return rep
    M, R = W.shape
    if R > max_rank:
        rep.verdict = UNKNOWN
        rep.notes.append(f"R={R} exceeds exhaustive search cap {max_rank}")
        return rep
    if M < R:
        rep.notes.append(f"only {M} rows for rank {R}")
        return rep
    zero = la.zero_mask(W, tol)
    zero_cols = [np.flatnonzero(zero[m]).tolist() for m in range(M)]
    order = [None] * R
    chosen = [None] * R
    used = set()
    nodes = 0

    def place(pos):
        nonlocal nodes
        if pos < 0:
            return True
        need = R - 1 - pos
        below = order[pos + 1:]
        for m in range(M):
            if m in used or len(zero_cols[m]) < need:
                continue
            if need:
                sub = W[np.ix_(below, zero_cols[m])]
                _, piv = la.row_echelon_form(sub, tol)
                if len(piv) < need:
                    continue
                cols = [zero_cols[m][j] for j in piv]
            else:
                cols = []
            nodes += 1
            if nodes > node_limit:
                raise _Budget
            order[pos], chosen[pos] = m, cols
            used.add(m)
            if place(pos - 1):
                return True
            used.discard(m)
        return False

    try:
        found = place(R - 1)
    except _Budget:
        rep.verdict = UNKNOWN
        rep.notes.append(f"search budget of {node_limit} nodes exhausted")
        return rep
    if found:
        rep.verdict = HOLDS
        rep.witnesses = {"row_order": list(order), "zero_columns": [list(c) for c in chosen]}
    else:
        rep.notes.append("no row ordering yields the invertible staircase")
    return rep


def check_laurberg(S, f, tol=la.DEFAULT_TOL):
    """Sufficiently spread H and strongly boundary close W (uniqueness in R^M)."""
    _require_exact(S, f, tol)
    spread = check_sufficiently_spread(f.H, tol)
    sbc = check_strongly_boundary_close(f.W, tol)
    rep = CertificateReport("laurberg", FAILS, "sufficient", "Laurberg",
                            witnesses={"sufficiently_spread": spread.witnesses,
                                       "strongly_boundary_close": sbc.witnesses})
    if spread.holds and sbc.holds:
        rep.verdict = HOLDS
    elif spread.holds and sbc.verdict == UNKNOWN:
        rep.verdict = UNKNOWN
    rep.notes.extend(spread.notes + sbc.notes)
    return rep


# ---------------------------------------------------------------------------
# support containment


def check_huang(W, H, tol=la.DEFAULT_TOL):
    """No factor support is contained in another's.

    Reports every ordered pair ``(r1, r2)`` with ``M_r1 <= M_r2`` or
    ``N_r1 <= N_r2``. A violation proves non-uniqueness; passing proves
    nothing.
    """
    if W.shape[1] != H.shape[0]:
        raise DimensionError(f"W has {W.shape[1]} columns, H has {H.shape[0]} rows")
    sets = SupportSets.of(W, H, tol)
    R = W.shape[1]
    violations = []
    for r1, r2 in itertools.permutations(range(R), 2):
        if sets.M[r1] <= sets.M[r2]:
            violations.append([r1, r2, "M"])
        if sets.N[r1] <= sets.N[r2]:
            violations.append([r1, r2, "N"])
    rep = CertificateReport("huang", FAILS if violations else HOLDS, "necessary", "Huang",
                            witnesses={"M_sets": [sorted(s) for s in sets.M],
                                       "N_sets": [sorted(s) for s in sets.N]})
    if violations:
        rep.witnesses["violations"] = violations
        rep.notes.append("support containment: the factorization is not unique")
    else:
        rep.notes.append("necessary condition only; passing does not prove uniqueness")
    return rep


# ---------------------------------------------------------------------------
# suite and re-validation


def certify_all(S, f, idx=None, tol=la.DEFAULT_TOL):
    """Run every applicable check on one exact factorization."""
    _require_exact(S, f, tol)
    reports = [
        check_huang(f.W, f.H, tol),
        check_boundary_close(f.W, tol),
        check_sufficiently_spread(f.H, tol),
        check_strongly_boundary_close(f.W, tol),
        check_laurberg(S, f, tol),
    ]
    if idx is not None and idx.rank == f.inner_rank:
        reports += [
            check_separability(f.W, idx, tol),
            check_complete_factorial_sampling(f.H, idx, tol),
            check_donoho(S, f, idx, tol),
        ]
    return reports


def _indexing(w):
    idx = w["indexing"]
    return PartArticulationIndexing(len(idx), len(idx[0]), idx)


def recheck(report, W, H, tol=la.DEFAULT_TOL):
    """Re-validate a ``holds`` verdict from its witnesses alone."""
    if not report.holds:
        return False
    w = report.witnesses
    zero = la.zero_mask(W, tol)
    hzero = la.zero_mask(H, tol)
    name = report.condition
    if name == "separability":
        idx = _indexing(w)
        return all(
            set(np.flatnonzero(~zero[w["rows"][p][a]]).tolist()) == {idx.r(p, a)}
            for p in range(idx.parts) for a in range(idx.arts))
    if name == "complete_factorial_sampling":
        idx = _indexing(w)
        return all(
            set(np.flatnonzero(~hzero[:, n]).tolist()) == {idx.r(p, a) for p, a in enumerate(c)}
            for c, n in zip(idx.assignments(), w["columns"]))
    if name == "donoho_stodden":
        sub_s = CertificateReport("separability", HOLDS, "", "", w["separability"])
        sub_c = CertificateReport("complete_factorial_sampling", HOLDS, "", "",
                                  w["complete_factorial_sampling"])
        return recheck(sub_s, W, H, tol) and recheck(sub_c, W, H, tol) and \
            len(w["separability"]["indexing"][0]) > 2
    if name == "sufficiently_spread":
        strict = "strict reading" in report.notes
        for r, n in enumerate(w["columns"]):
            if strict:
                if set(np.flatnonzero(~hzero[r]).tolist()) != {n}:
                    return False
            elif set(np.flatnonzero(~hzero[:, n]).tolist()) != {r}:
                return False
        return len(w["columns"]) == H.shape[0]
    if name == "boundary_close":
        strict = "strict reading" in report.notes
        return all(zero[m, r] and (not strict or zero[:, r].sum() == 1)
                   for r, m in enumerate(w["zero_rows"])) and len(w["zero_rows"]) == W.shape[1]
    if name == "strongly_boundary_close":
        order, cols = w["row_order"], w["zero_columns"]
        R = W.shape[1]
        if len(set(order)) != R:
            return False
        for pos in range(R):
            c = cols[pos]
            if len(c) != R - 1 - pos or not all(zero[order[pos], j] for j in c):
                return False
            if c and la.rank(W[np.ix_(order[pos + 1:], c)], tol) != len(c):
                return False
        return recheck(check_boundary_close(W, tol), W, H, tol)
    if name == "laurberg":
        a = CertificateReport("sufficiently_spread", HOLDS, "", "", w["sufficiently_spread"])
        b = CertificateReport("strongly_boundary_close", HOLDS, "", "",
                              w["strongly_boundary_close"])
        return recheck(a, W, H, tol) and recheck(b, W, H, tol)
    if name == "huang":
        sets = SupportSets.of(W, H, tol)
        if [sorted(s) for s in sets.M] != w["M_sets"] or [sorted(s) for s in sets.N] != w["N_sets"]:
            return False
        return not any(a <= b for a, b in itertools.permutations(sets.M, 2)) and \
            not any(a <= b for a, b in itertools.permutations(sets.N, 2))
    raise ValueError(f"no recheck rule for {name!r}")
