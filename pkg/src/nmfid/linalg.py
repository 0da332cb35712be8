"""Dense linear algebra over exact rationals or floats.

Matrices are plain 2-D numpy arrays. An array of dtype ``object`` holding
:class:`fractions.Fraction` entries is in *exact* mode; a ``float64`` array
is in *float* mode. Every routine dispatches on the mode of its inputs, and
mixing modes degrades to float.
"""

from fractions import Fraction
from math import lcm, sqrt
import numbers

import numpy as np

from . import kernels
from .errors import (
    DimensionError,
    InconsistentSystemError,
    NegativeEntryError,
    ParseError,
)

DEFAULT_TOL = 1e-10


# ---------------------------------------------------------------------------
# construction and mode handling


def is_exact(a):
    return a.dtype == object


def _to_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (bool, np.bool_)):
        return Fraction(int(x))
    if isinstance(x, (numbers.Integral, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not a rational literal: {x!r}") from exc
    if isinstance(x, (float, np.floating)):
        if not np.isfinite(x):
            raise ParseError(f"non-finite entry {x!r}")
        return Fraction(float(x))
    if isinstance(x, numbers.Rational):
        return Fraction(x.numerator, x.denominator)
    raise ParseError(f"unsupported entry type {type(x).__name__}")


def _looks_float(data):
    if isinstance(data, np.ndarray) and data.dtype != object:
        return data.dtype.kind in "fc"
    flat = np.asarray(data, dtype=object).ravel()
    return any(isinstance(x, (float, np.floating)) for x in flat)


def matrix(data, exact=None):
    """Build a 2-D matrix in exact or float mode.

    With ``exact=None`` the mode is inferred: integer, Fraction and string
    entries give exact mode, any float entry gives float mode.
    """
    if exact is None:
        exact = not _looks_float(data)
    if exact:
        obj = np.asarray(data, dtype=object)
        if obj.ndim == 1:
            obj = obj.reshape(1, -1)
        if obj.ndim != 2:
            raise DimensionError(f"expected a 2-D matrix, got ndim={obj.ndim}")
        out = np.empty(obj.shape, dtype=object)
        for idx, x in np.ndenumerate(obj):
            out[idx] = _to_fraction(x)
    else:
        if isinstance(data, np.ndarray) and data.dtype == object:
            out = np.array([[float(x) for x in row] for row in data], dtype=np.float64)
            if data.size == 0:
                out = np.zeros(data.shape)
        else:
            out = np.array(data, dtype=np.float64)
        if out.ndim == 1:
            out = out.reshape(1, -1)
        if out.ndim != 2:
            raise DimensionError(f"expected a 2-D matrix, got ndim={out.ndim}")
        if not np.all(np.isfinite(out)):
            raise ParseError("non-finite entry")
    if out.shape[0] < 1 or out.shape[1] < 1:
        raise DimensionError(f"matrix must be at least 1x1, got {out.shape}")
    return out


def nonneg(data, exact=None):
    """Like :func:`matrix` but reject negative entries."""
    a = matrix(data, exact=exact)
    if is_exact(a):
        bad = any(x < 0 for x in a.flat)
    else:
        bad = bool(np.any(a < 0))
    if bad:
        raise NegativeEntryError("matrix has a negative entry")
    return a


def to_float(a):
    if is_exact(a):
        return np.array([[float(x) for x in row] for row in a], dtype=np.float64).reshape(a.shape)
    return np.asarray(a, dtype=np.float64)


def to_exact(a):
    return a if is_exact(a) else matrix(a, exact=True)


def common(*arrays):
    """Return the arrays converted to one shared mode."""
    if all(is_exact(a) for a in arrays):
        return arrays
    return tuple(to_float(a) for a in arrays)


def identity(n, exact=True):
    if exact:
        out = np.full((n, n), Fraction(0), dtype=object)
        for i in range(n):
            out[i, i] = Fraction(1)
        return out
    return np.eye(n)


def zeros(shape, exact=True):
    if exact:
        return np.full(shape, Fraction(0), dtype=object)
    return np.zeros(shape)


# ---------------------------------------------------------------------------
# zero tests and supports


def zero_mask(a, tol=DEFAULT_TOL):
    """Boolean mask of entries treated as zero.

    Exact mode compares with 0; float mode uses ``|x| <= tol * max|a|``.
    """
    if is_exact(a):
        return np.array([x == 0 for x in a.flat], dtype=bool).reshape(a.shape)
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    if scale == 0.0:
        return np.ones(a.shape, dtype=bool)
    return np.abs(a) <= tol * scale


def support(a, tol=DEFAULT_TOL):
    return ~zero_mask(a, tol)


# ---------------------------------------------------------------------------
# exact arithmetic helpers


def _int_scaled(a):
    """Integer matrix ``A`` and denominator ``d`` with ``a == A / d``."""
    d = 1
    for x in a.flat:
        d = lcm(d, x.denominator)
    ints = np.empty(a.shape, dtype=object)
    for idx, x in np.ndenumerate(a):
        ints[idx] = x.numerator * (d // x.denominator)
    return ints, d


def _int_matmul(A, B):
    """Exact product of two Python-int object arrays, via int64 when safe."""
    k = A.shape[1]
    amax = max((abs(x) for x in A.flat), default=0)
    bmax = max((abs(x) for x in B.flat), default=0)
    if amax * bmax * max(k, 1) < 2**62:
        return (A.astype(np.int64) @ B.astype(np.int64)).astype(object)
    return A.dot(B)


def matmul(a, b):
    """Matrix product honouring the arithmetic mode."""
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    a, b = common(a, b)
    if not is_exact(a):
        return a @ b
    A, da = _int_scaled(a)
    B, db = _int_scaled(b)
    P = _int_matmul(A, B)
    d = da * db
    out = np.empty(P.shape, dtype=object)
    for idx, x in np.ndenumerate(P):
        out[idx] = Fraction(int(x), d)
    return out


def frobenius_sq(a):
    """Squared Frobenius norm (a Fraction in exact mode)."""
    if is_exact(a):
        return sum((x * x for x in a.flat), Fraction(0))
    return float(np.sum(a * a))


def frobenius(a):
    sq = frobenius_sq(a)
    if isinstance(sq, Fraction):
        if sq == 0:
            return 0.0
        val = sqrt(float(sq))
        # a nonzero rational residual must never round to an exact zero
        return val if val > 0.0 else 5e-324
    return sqrt(sq)


def equal(a, b, tol=DEFAULT_TOL):
    """Entrywise equality: exact, or ``max|a-b| <= tol * max(1, max|a|, max|b|)``."""
    if a.shape != b.shape:
        return False
    a, b = common(a, b)
    if is_exact(a):
        return bool(np.all(a == b))
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return bool(np.max(np.abs(a - b)) <= tol * scale)


# ---------------------------------------------------------------------------
# rank and echelon forms


def rank(a, tol=DEFAULT_TOL):
    """Dimension of the column space.

    Exact mode runs fraction-free elimination on an integer rescaling of
    the rows (``tol`` is ignored); float mode counts singular values above
    ``tol * sigma_max``.
    """
    if is_exact(a):
        rows = []
        for row in a:
            d = 1
            for x in row:
                d = lcm(d, x.denominator)
            rows.append([x.numerator * (d // x.denominator) for x in row])
        return kernels.int_rank(rows)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def row_echelon_form(a, tol=DEFAULT_TOL):
    """Reduced row echelon form and the list of pivot columns."""
    m = a.copy()
    nr, nc = m.shape
    pivots = []
    r = 0
    exact = is_exact(m)
    if not exact:
        m = m.astype(np.float64)
        scale = float(np.max(np.abs(m))) if m.size else 0.0
        thresh = tol * max(scale, 1e-300)
    for c in range(nc):
        if r == nr:
            break
        if exact:
            piv = next((i for i in range(r, nr) if m[i, c] != 0), None)
        else:
            i = r + int(np.argmax(np.abs(m[r:, c])))
            piv = i if abs(m[i, c]) > thresh else None
        if piv is None:
            if not exact:
                m[r:, c] = 0.0
            continue
        if piv != r:
            m[[r, piv]] = m[[piv, r]]
        m[r] = m[r] / m[r, c]
        for i in range(nr):
            if i != r and m[i, c] != 0:
                m[i] = m[i] - m[i, c] * m[r]
        if not exact:
            m[r, c] = 1.0
            m[np.arange(nr) != r, c] = 0.0
        pivots.append(c)
        r += 1
    if not exact:
        m[np.abs(m) <= thresh] = 0.0
    return m, pivots


def column_echelon_form(a, tol=DEFAULT_TOL):
    """Reduced column echelon form; equal iff the column spaces are equal."""
    red, _ = row_echelon_form(a.T, tol)
    return red.T


def nullspace(a, tol=DEFAULT_TOL):
    """Basis of the right null space, one vector per column."""
    red, pivots = row_echelon_form(a, tol)
    n = a.shape[1]
    free = [j for j in range(n) if j not in pivots]
    exact = is_exact(a)
    basis = zeros((n, len(free)), exact=exact)
    for k, f in enumerate(free):
        basis[f, k] = Fraction(1) if exact else 1.0
        for r, p in enumerate(pivots):
            basis[p, k] = -red[r, f]
    return basis


def column_space_equal(a, b, tol=DEFAULT_TOL):
    """True iff ``col(a) == col(b)``."""
    if a.shape[0] != b.shape[0]:
        raise DimensionError(f"row counts differ: {a.shape[0]} vs {b.shape[0]}")
    a, b = common(a, b)
    ra = rank(a, tol)
    if ra != rank(b, tol):
        return False
    return rank(np.hstack([a, b]), tol) == ra


def is_monomial(q, tol=DEFAULT_TOL):
    """True iff ``q`` is a permutation matrix with positive nonzero entries."""
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise DimensionError(f"monomial test needs a square matrix, got {q.shape}")
    nz = support(q, tol)
    if not (np.all(nz.sum(axis=0) == 1) and np.all(nz.sum(axis=1) == 1)):
        return False
    return all(x > 0 for x in q[nz])


# ---------------------------------------------------------------------------
# linear systems


def solve(a, b, tol=DEFAULT_TOL):
    """A particular solution ``x`` of ``a @ x = b`` (free variables set to 0).

    Raises :class:`InconsistentSystemError` when no solution exists. In float
    mode consistency is judged on the reduced augmented system at ``tol``.
    """
    if a.shape[0] != b.shape[0]:
        raise DimensionError(f"cannot solve {a.shape} system with rhs {b.shape}")
    a, b = common(a, b)
    n = a.shape[1]
    aug = np.hstack([a, b])
    red, pivots = row_echelon_form(aug, tol)
    if any(p >= n for p in pivots):
        raise InconsistentSystemError("linear system has no solution")
    x = zeros((n, b.shape[1]), exact=is_exact(a))
    for r, p in enumerate(pivots):
        x[p] = red[r, n:]
    if not is_exact(a):
        resid = np.max(np.abs(a @ x - b)) if b.size else 0.0
        if resid > tol * max(1.0, float(np.max(np.abs(b)))) * 1e3:
            raise InconsistentSystemError("linear system has no solution")
    return x


def inverse(a, tol=DEFAULT_TOL):
    """Inverse of a square matrix; raises if singular."""
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"cannot invert a {a.shape} matrix")
    n = a.shape[0]
    if rank(a, tol) < n:
        raise InconsistentSystemError("matrix is singular")
    return solve(a, identity(n, exact=is_exact(a)), tol)


# ---------------------------------------------------------------------------
# nonnegative least squares and cone membership


def nnls(A, b, tol=None, max_iter=None):
    """Lawson-Hanson active-set NNLS: ``min ||A x - b||`` with ``x >= 0``.

    Works in both modes. In exact mode the inner least-squares problems are
    solved exactly, so the returned ``x`` is an exact minimiser. Ties in the
    entering-variable choice go to the lowest index.

    Parameters
    ----------
    A : ndarray, shape (m, n)
    b : ndarray, shape (m,) or (m, 1)
    tol : float, optional
        Dual-feasibility threshold in float mode. Ignored in exact mode.
    max_iter : int, optional
        Cap on inner iterations (default ``30 * n``).

    Returns
    -------
    x : ndarray, shape (n,)
    residual : float
        ``||A x - b||_2``; exactly ``0.0`` for an exact fit in exact mode.
    """
    b = b.reshape(-1, 1) if b.ndim == 1 else b
    if A.shape[0] != b.shape[0]:
        raise DimensionError(f"nnls: A has {A.shape[0]} rows, b has {b.shape[0]}")
    A, b = common(A, b)
    exact = is_exact(A)
    m, n = A.shape
    if max_iter is None:
        max_iter = 30 * max(n, 1)
    zero = Fraction(0) if exact else 0.0
    x = zeros((n, 1), exact=exact)
    passive = np.zeros(n, dtype=bool)
    if not exact and tol is None:
        tol = 10 * np.finfo(float).eps * max(m, n) * max(1.0, float(np.max(np.abs(A)))) \
            * max(1.0, float(np.max(np.abs(b))))

    def gradient():
        return (A.T.dot(b - A.dot(x))).ravel()

    def ls_on(mask):
        cols = np.flatnonzero(mask)
        sub = A[:, cols]
        z = zeros((n, 1), exact=exact)
        if exact:
            gram = sub.T.dot(sub)
            rhs = sub.T.dot(b)
            z[cols] = solve(gram, rhs)
        else:
            sol, *_ = np.linalg.lstsq(sub, b, rcond=None)
            z[cols] = sol
        return z

    iters = 0
    w = gradient()
    while True:
        cand = [j for j in range(n) if not passive[j]]
        if not cand:
            break
        best = max(cand, key=lambda j: (w[j], -j))
        thresh = zero if exact else tol
        if not w[best] > thresh:
            break
        passive[best] = True
        while True:
            iters += 1
            if iters > max_iter:
                break
            z = ls_on(passive)
            pidx = np.flatnonzero(passive)
            if all(z[j, 0] > zero for j in pidx):
                x = z
                break
            steps = [x[j, 0] / (x[j, 0] - z[j, 0]) for j in pidx if z[j, 0] <= zero]
            alpha = min(steps)
            x = x + alpha * (z - x)
            for j in pidx:
                if (x[j, 0] == 0) if exact else (x[j, 0] <= tol):
                    passive[j] = False
                    x[j, 0] = zero
        if iters > max_iter:
            break
        w = gradient()
    resid = frobenius(A.dot(x) - b)
    return x.ravel(), resid


def cone_membership(W, x, tol=None):
    """Nonnegative coefficients ``alpha`` with ``||W alpha - x|| <= tol``, or None.

    Exact mode requires an exact representation (``tol`` is ignored). In
    float mode the default tolerance is ``1e-10 * max(1, ||x||)``.
    """
    x = x.reshape(-1, 1) if x.ndim == 1 else x
    if x.shape[1] != 1:
        raise DimensionError("cone_membership expects a single column")
    if W.shape[0] != x.shape[0]:
        raise DimensionError(f"W has {W.shape[0]} rows, x has {x.shape[0]}")
    W, x = common(W, x)
    alpha, resid = nnls(W, x)
    if is_exact(W):
        return alpha if resid == 0.0 else None
    if tol is None:
        tol = DEFAULT_TOL * max(1.0, frobenius(x))
    return alpha if resid <= tol else None


# ---------------------------------------------------------------------------
# CSV matrix files


def parse_csv(text, exact=None):
    """Parse comma-separated rows of decimal or ``p/q`` literals."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cells = [c.strip() for c in line.split(",")]
        if any(c == "" for c in cells):
            raise ParseError(f"line {lineno}: empty cell")
        rows.append(cells)
    if not rows:
        raise ParseError("no matrix rows found")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ParseError("ragged rows")
    fracs = [[_to_fraction(c) for c in r] for r in rows]
    if exact is False:
        return matrix([[float(x) for x in r] for r in fracs], exact=False)
    return matrix(fracs, exact=True)


def read_csv(path, exact=None):
    with open(path, encoding="utf-8") as fh:
        return parse_csv(fh.read(), exact=exact)


def format_entry(x):
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return repr(float(x))


def to_csv(a):
    return "".join(",".join(format_entry(x) for x in row) + "\n" for row in a)


def write_csv(path, a):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_csv(a))
