from fractions import Fraction

import numpy as np
import pytest

from nmfid import classify as K
from nmfid import corpus
from nmfid import linalg as la
from nmfid import sfa
from nmfid.solve import verify_exact

from conftest import q


@pytest.fixture(scope="module")
def bare():
    return corpus.swimmer(with_body=False)


@pytest.fixture(scope="module")
def bodied():
    return corpus.swimmer(with_body=True)


@pytest.mark.parametrize("name", corpus.EXAMPLES)
def test_known_factorizations_are_exact(name):
    inst = corpus.paper_example(name)
    assert inst.name == name
    for f in inst.known_factorizations:
        assert verify_exact(inst.S, f) == 0


def test_unknown_name():
    with pytest.raises(KeyError):
        corpus.paper_example("nosuch")


def test_type1_contents():
    t1 = corpus.paper_example("type1")
    W, H = t1.known_factorizations[0].W, t1.known_factorizations[0].H
    assert la.equal(W, H.T)
    assert list(H[0]) == [Fraction(1, 2), 1, 1, Fraction(1, 2), 0, 0]
    Q = t1.extras["Q"]
    assert la.equal(la.matmul(Q, Q), la.identity(3))


def test_type2_printed_q():
    t2 = corpus.paper_example("type2")
    W1, W2 = (f.W for f in t2.known_factorizations)
    assert la.equal(la.matmul(t2.extras["Q"], W2), W1)
    assert la.rank(t2.S) == 5 and t2.S.shape == (7, 9)


def test_type3_printed_relations():
    t3 = corpus.paper_example("type3")
    W2, W2p, W1 = (f.W for f in t3.known_factorizations)
    rows = t3.extras["Q1_rows"]
    assert la.equal(la.matmul(t3.extras["Q1_printed"], W2[rows]), W1)
    assert la.equal(la.matmul(t3.extras["Q1"], W2), W1)
    assert la.equal(la.matmul(W2, t3.extras["Q2"]), W2p)


def test_block_g_s():
    bg = corpus.paper_example("block-g")
    assert la.equal(bg.S, q([[22, 23, 4], [23, 25, 6], [20, 19, 4], [20, 19, 6]]))


def test_swimmer_geometry():
    seen = set(corpus.torso_pixels())
    for p in range(4):
        for a in range(4):
            px = corpus.limb_pixels(p, a)
            assert len(px) == corpus.LIMB_LENGTH
            assert all(0 <= x < corpus.GRID ** 2 for x in px)
            assert not seen & set(px)
            seen |= set(px)


def test_swimmer_shape_and_binary(bare):
    S, f, idx = bare
    assert S.shape == (1024, 256)
    assert set(S.flat) <= {0, 1}
    assert verify_exact(S, f) == 0
    assert len(set(map(tuple, S.T.tolist()))) == 256


def test_swimmer_without_body_is_unique_sfa(bare):
    S, f, idx = bare
    cert = sfa.detect_sfa(f, 4, 4)
    assert cert is not None and cert.binary_H and cert.part_balanced
    assert sfa.is_type2_nonidentifiable(f, cert) == (False, [])
    assert np.linalg.matrix_rank(la.to_float(S)) == 13
    assert sfa.rank_deficit_check(f, cert) == (13, 16, True)


def test_swimmer_with_body_has_one_record_per_torso_pixel(bodied):
    S, f, idx = bodied
    cert = sfa.detect_sfa(f, 4, 4)
    flag, recs = sfa.is_type2_nonidentifiable(f, cert)
    assert flag
    assert sorted(r.row for r in recs) == sorted(corpus.torso_pixels())
    assert {r.part for r in recs} == {0} and {r.epsilon for r in recs} == {1}


def test_swimmer_family_members_are_type2(bodied):
    S, f, _ = bodied
    fam = sfa.build_family(f, sfa.detect_sfa(f, 4, 4))
    members = [fam.member(sfa.vertex(4, p)) for p in (1, 2)]
    members.append(fam.member([Fraction(1, 4)] * 4))
    for m in members:
        assert verify_exact(S, m) == 0
    v = K.classify_solution_set(K.SolutionSet(S, members))
    assert v.kind == K.TYPE_II and len(v.subspace_groups) == 3


def test_write_pgm(tmp_path, bare):
    S, _, _ = bare
    paths = corpus.write_pgm(tmp_path, S)
    assert len(paths) == 256
    first = paths[0].read_text().split("\n")
    assert first[:3] == ["P2", "32 32", "1"] and paths[0].name == "swim_0000.pgm"
    pix = [int(x) for line in first[3:] for x in line.split()]
    assert pix == [int(x) for x in S[:, 0]]
