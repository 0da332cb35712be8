"""Worked examples with ground-truth factorizations, and the Swimmer corpus."""

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import linalg as la
from .certify import PartArticulationIndexing
from .solve import Factorization

EXAMPLES = ("example1", "type1", "type2", "type3", "block-g")

GRID = 32
LIMB_LENGTH = 6
# torso: rows 11..18, columns 14..15 (0-based), an 8 x 2 bar
TORSO = [(r, c) for r in range(11, 19) for c in (14, 15)]
# limb anchors sit diagonally outside the torso corners; the four
# directions of each limb sweep 135 degrees away from the body
LIMBS = (
    ((10, 13), ((1, -1), (0, -1), (-1, -1), (-1, 0))),   # upper left
    ((10, 16), ((1, 1), (0, 1), (-1, 1), (-1, 0))),      # upper right
    ((19, 13), ((-1, -1), (0, -1), (1, -1), (1, 0))),    # lower left
    ((19, 16), ((-1, 1), (0, 1), (1, 1), (1, 0))),       # lower right
)


@dataclass
class NamedInstance:
    name: str
    S: np.ndarray
    known_factorizations: list
    expected: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)


def _m(rows):
    return la.matrix(rows, exact=True)


def _example1():
    S = _m([[1, 0, 1, 0], [0, 1, 0, 1], [1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 0, 0]])
    W = _m(np.eye(4, dtype=int).tolist() + [[0, 0, 0, 0]])
    H = S[:4].copy()
    fs = [Factorization(W, H), Factorization(S.copy(), la.identity(4))]
    return NamedInstance("example1", S, fs,
                         {"type": "TypeII", "rank": 3, "parts": 2, "arts": 2,
                          "rank_deficit": (3, 4, True)})


def _type1():
    H = _m([["1/2", 1, 1, "1/2", 0, 0],
            [1, "1/2", 0, 0, "1/2", 1],
            [0, 0, "1/2", 1, 1, "1/2"]])
    W = H.T.copy()
    Q = _m([[-1, 2, 2], [2, -1, 2], [2, 2, -1]]) * Fraction(1, 3)
    f = Factorization(W, H)
    g = Factorization(la.matmul(W, Q), la.matmul(la.inverse(Q), H))
    return NamedInstance("type1", f.product(), [f, g],
                         {"type": "TypeI", "rank": 3}, {"Q": Q})


def _type2():
    Ht = _m([[1, 0, 0, 1, 0, 0, 1, 0, 0],
             [0, 1, 0, 0, 1, 0, 0, 1, 0],
             [0, 0, 1, 0, 0, 1, 0, 0, 1],
             [1, 1, 1, 0, 0, 0, 0, 0, 0],
             [0, 0, 0, 1, 1, 1, 0, 0, 0],
             [0, 0, 0, 0, 0, 0, 1, 1, 1]])
    I6 = np.eye(6, dtype=int).tolist()
    W1 = _m(I6 + [[1, 1, 1, 0, 0, 0]])
    W2 = _m(I6 + [[0, 0, 0, 1, 1, 1]])
    S = la.matmul(W1, Ht)
    Q = _m([[1, 0, 0, 0, 0, 0, 0],
            [0, 1, 0, 0, 0, 0, 0],
            [0, 0, 1, 0, 0, 0, 0],
            [0, 0, 0, 0, -1, -1, 1],
            [0, 0, 0, 0, 1, 0, 0],
            [0, 0, 0, 0, 0, 1, 0],
            [1, 1, 1, 0, 0, 0, 0]])
    return NamedInstance("type2", S, [Factorization(W1, Ht), Factorization(W2, Ht)],
                         {"type": "TypeII", "rank": 5, "rank_bounds": (5, 6),
                          "parts": 2, "arts": 3, "rank_deficit": (5, 6, True)},
                         {"Q": Q, "W_tilde": la.identity(6), "H_tilde": Ht.copy(),
                          "S_tilde": Ht.copy()})


def _type3():
    S = _m([[2, 1, 2, 1], [2, 3, 2, 3], [1, 1, 0, 0], [0, 0, 1, 1], [1, 1, 1, 1]])
    core = [[2, 1, 0, 0], [2, 3, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
    W1 = _m(core + [[1, 1, 0, 0]])
    W2 = _m(core + [[0, 0, 1, 1]])
    H = _m([[1, 0, 1, 0], [0, 1, 0, 1], [1, 1, 0, 0], [0, 0, 1, 1]])
    W2p = _m([[1, 0, 1, 1], [0, 1, 2, 2], [0, 0, 1, 0], [0, 0, 0, 1], [0, 0, 1, 1]])
    # the printed 5 x 4 relation acts on rows 1, 2, 4, 5 of W2; the full
    # 5 x 5 change of basis has a zero column for row 3
    Q1_printed = _m([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, -1, 1], [0, 0, 1, 0],
                     ["1/4", "1/4", 0, 0]])
    Q1 = la.zeros((5, 5))
    Q1[:, [0, 1, 3, 4]] = Q1_printed
    Q2 = _m([["3/4", "-1/4", "1/4", "1/4"], ["-1/2", "1/2", "1/2", "1/2"],
             [0, 0, 1, 0], [0, 0, 0, 1]])
    fs = [Factorization(W2, H), Factorization(W2p, H.copy()), Factorization(W1, H.copy())]
    return NamedInstance("type3", S, fs, {"type": "TypeIII"},
                         {"Q1_printed": Q1_printed, "Q1": Q1, "Q1_rows": [0, 1, 3, 4],
                          "Q2": Q2})


def _block_g():
    G = _m([[1, 2, 3, 2], [1, 3, 2, 3], [2, 1, 2, 2], [2, 1, 2, 3]])
    W = _m([[1, 2, 0], [2, 1, 0], [1, 1, 0], [0, 0, 2]])
    H = _m([[1, 2, 0], [2, 1, 0], [0, 0, 1]])
    S = la.matmul(G, la.matmul(W, H))
    subs = [(G[:, :3].copy(), _m([[1, 2], [2, 1], [1, 1]]), _m([[1, 2], [2, 1]])),
            (G[:, 3:].copy(), _m([[2]]), _m([[1]]))]
    return NamedInstance("block-g", S, [Factorization(la.matmul(G, W), H)],
                         {"blocks": 2},
                         {"G": G, "W": W, "H": H, "sub_models": subs})


_BUILDERS = {"example1": _example1, "type1": _type1, "type2": _type2,
             "type3": _type3, "block-g": _block_g}


def paper_example(name):
    """Exact matrices of a named worked example."""
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise KeyError(f"unknown example {name!r}; choose from {', '.join(EXAMPLES)}") from None


def limb_pixels(part, art):
    """Flattened pixel indices of limb ``part`` in pose ``art``."""
    (r0, c0), dirs = LIMBS[part]
    dr, dc = dirs[art]
    return [(r0 + k * dr) * GRID + (c0 + k * dc) for k in range(1, LIMB_LENGTH + 1)]


def torso_pixels():
    return [r * GRID + c for r, c in TORSO]


def swimmer_codes():
    """Articulation assignments in column order (part 1 most significant)."""
    return list(itertools.product(range(4), repeat=4))


def swimmer(with_body=True):
    """Swimmer corpus ``(S, canonical factorization, indexing)``.

    S is 1024 x 256 with 0/1 pixels; column ``n`` shows the assignment
    ``swimmer_codes()[n]``. W has one basis image per (limb, pose) and H is
    binary with one active pose per limb. With the body, the torso pixels
    are added to every pose column of limb 1, so each image still shows
    the torso exactly once.
    """
    idx = PartArticulationIndexing(4, 4)
    W = np.zeros((GRID * GRID, 16), dtype=np.int64)
    for p in range(4):
        for a in range(4):
            W[limb_pixels(p, a), idx.r(p, a)] = 1
    if with_body:
        for a in range(4):
            W[torso_pixels(), idx.r(0, a)] = 1
    codes = swimmer_codes()
    H = np.zeros((16, len(codes)), dtype=np.int64)
    for n, code in enumerate(codes):
        for p, a in enumerate(code):
            H[idx.r(p, a), n] = 1
    f = Factorization(la.matrix(W, exact=True), la.matrix(H, exact=True))
    S = la.matrix(W @ H, exact=True)
    return S, f, idx


def write_pgm(directory, S):
    """Write each column of a 1024-row 0/1 corpus as ``swim_AAAA.pgm``."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for n, code in enumerate(swimmer_codes()):
        img = np.array([int(x) for x in S[:, n]]).reshape(GRID, GRID)
        lines = ["P2", f"{GRID} {GRID}", "1"] + [" ".join(map(str, row)) for row in img]
        path = out / f"swim_{''.join(map(str, code))}.pgm"
        path.write_text("\n".join(lines) + "\n")
        paths.append(path)
    return paths
