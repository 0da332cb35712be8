import itertools
import os
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from nmfid import linalg as la
from nmfid.solve import Factorization

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def q(rows):
    """Exact matrix from nested lists of ints / strings / Fractions."""
    return la.matrix(rows, exact=True)


def fr(x):
    return Fraction(x)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def factorial_H(parts, arts):
    """Binary H whose columns run over every articulation assignment."""
    cols = list(itertools.product(range(arts), repeat=parts))
    H = la.zeros((parts * arts, len(cols)))
    for n, assign in enumerate(cols):
        for p, a in enumerate(assign):
            H[p * arts + a, n] = Fraction(1)
    return H


def random_sfa(rng, parts, arts, n_extra, invariant=True):
    """Exact SFA factorization with identity core rows and random extra rows.

    With ``invariant`` the first extra row is strictly positive on a random
    part; otherwise every extra row has a zero inside each part.
    """
    R = parts * arts
    rows = np.eye(R, dtype=int).tolist()
    for k in range(n_extra):
        row = rng.integers(0, 4, size=R)
        for p in range(parts):
            block = slice(p * arts, (p + 1) * arts)
            if invariant and k == 0 and p == 0:
                row[block] = rng.integers(1, 4, size=arts)
            elif row[block].min() > 0:
                row[p * arts + rng.integers(arts)] = 0
        rows.append(row.tolist())
    W = q(rows)
    if invariant:
        # move the strictly positive part to a random position
        p = int(rng.integers(parts))
        cols = list(range(R))
        cols[0:arts], cols[p * arts:(p + 1) * arts] = cols[p * arts:(p + 1) * arts], cols[0:arts]
        W[R:, :] = W[R:, cols]
    return Factorization(W, factorial_H(parts, arts))


def random_block_model(rng, K, G_identity=False):
    """``(G, W, H, blocks)`` with K dense blocks scattered by random permutations.

    Each block gets 1..3 inner indices, 1..3 rows of W and 1..3 columns of H,
    all strictly positive so that every block is connected.
    """
    sizes = [tuple(int(x) for x in rng.integers(1, 4, size=3)) for _ in range(K)]
    T, R, N = (sum(s[i] for s in sizes) for i in range(3))
    W, H = la.zeros((T, R)), la.zeros((R, N))
    t = r = n = 0
    spans = []
    for dt, dr, dn in sizes:
        W[t:t + dt, r:r + dr] = q(rng.integers(1, 5, size=(dt, dr)).tolist())
        H[r:r + dr, n:n + dn] = q(rng.integers(1, 5, size=(dr, dn)).tolist())
        spans.append((range(t, t + dt), range(r, r + dr), range(n, n + dn)))
        t, r, n = t + dt, r + dr, n + dn
    pt, pr, pn = rng.permutation(T), rng.permutation(R), rng.permutation(N)
    W, H = W[np.ix_(pt, pr)], H[np.ix_(pr, pn)]
    # position of an old index after permutation
    inv = [np.argsort(p) for p in (pt, pr, pn)]
    blocks = [tuple(sorted(int(inv[k][i]) for i in span) for k, span in enumerate(sp))
              for sp in spans]
    if G_identity:
        G = la.identity(T)
    else:
        G = q(rng.integers(0, 4, size=(T + 1, T)).tolist())
        for i in range(T):
            G[i, i] = G[i, i] + 5
    return G, W, H, blocks
