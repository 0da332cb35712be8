from fractions import Fraction

import numpy as np
import pytest

from nmfid import corpus
from nmfid import linalg as la
from nmfid import sfa
from nmfid.errors import DimensionError, GuardLimitError, OffSimplexError
from nmfid.solve import Factorization, verify_exact

from conftest import q, random_sfa


@pytest.fixture
def type2():
    return corpus.paper_example("type2")


def test_detect_type2_tilde(type2):
    f = Factorization(type2.extras["W_tilde"], type2.extras["H_tilde"])
    cert = sfa.detect_sfa(f, 2, 3)
    assert cert.indexing.part_columns(0) == [0, 1, 2]
    assert cert.indexing.part_columns(1) == [3, 4, 5]
    assert cert.binary_H and cert.part_balanced and cert.extra_rows == []
    assert not sfa.is_type2_nonidentifiable(f, cert)[0]


def test_detect_example1_flags_two_articulations():
    f = corpus.paper_example("example1").known_factorizations[0]
    cert = sfa.detect_sfa(f, 2, 2)
    assert cert is not None and any("A=2" in n for n in cert.notes)


def test_detect_rejects_wrong_shape_and_non_sfa(type2):
    f = type2.known_factorizations[0]
    with pytest.raises(DimensionError):
        sfa.detect_sfa(f, 2, 2)
    assert sfa.detect_sfa(f, 3, 2) is None
    dense = Factorization(q(np.ones((4, 4), dtype=int).tolist()), la.identity(4))
    assert sfa.detect_sfa(dense, 2, 2) is None


def test_detect_guard():
    I = la.identity(40)
    with pytest.raises(GuardLimitError):
        sfa.detect_sfa(Factorization(I, I), 20, 2)


def test_detect_finds_scrambled_indexing(type2):
    f = type2.known_factorizations[0]
    perm = [4, 0, 5, 2, 1, 3]
    g = f.permuted(perm)
    cert = sfa.detect_sfa(g, 2, 3)
    assert cert is not None
    parts = {frozenset(cert.indexing.part_columns(p)) for p in range(2)}
    # columns 0, 1, 2 of f land at positions of perm where value < 3
    assert parts == {frozenset(i for i, v in enumerate(perm) if v < 3),
                     frozenset(i for i, v in enumerate(perm) if v >= 3)}


def test_invariant_rows_type2(type2):
    f = type2.known_factorizations[0]
    cert = sfa.detect_sfa(f, 2, 3)
    recs = sfa.find_invariant_rows(f, cert)
    assert [(r.row, r.part, r.epsilon) for r in recs] == [(6, 0, 1)]
    flag, evidence = sfa.is_type2_nonidentifiable(f, cert)
    assert flag and evidence == recs


def test_invariant_rows_require_strict_positivity():
    W = q(np.eye(6, dtype=int).tolist() + [[1, 1, 0, 2, 0, 1]])
    f = Factorization(W, corpus.paper_example("type2").extras["H_tilde"])
    cert = sfa.detect_sfa(f, 2, 3)
    assert sfa.find_invariant_rows(f, cert) == []


def test_unbalanced_h_is_not_flagged():
    H = corpus.paper_example("type2").extras["H_tilde"].copy()
    H[0, 0] = Fraction(2)
    W = q(np.eye(6, dtype=int).tolist() + [[1, 1, 1, 0, 0, 0]])
    f = Factorization(W, H)
    cert = sfa.detect_sfa(f, 2, 3)
    assert not cert.part_balanced and not cert.binary_H
    flag, recs = sfa.is_type2_nonidentifiable(f, cert)
    assert not flag and len(recs) == 1


def test_family_members_type2(type2):
    f1, f2 = type2.known_factorizations
    fam = sfa.build_family(f1, sfa.detect_sfa(f1, 2, 3))
    assert la.equal(fam.member((1, 0)).W, f1.W)
    assert la.equal(fam.member((0, 1)).W, f2.W)
    half = fam.member(("1/2", "1/2"))
    assert list(half.W[6]) == [Fraction(1, 2)] * 6
    for t in (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(1)):
        assert verify_exact(type2.S, fam.member((1 - t, t))) == 0


def test_family_member_off_simplex(type2):
    f = type2.known_factorizations[0]
    fam = sfa.build_family(f, sfa.detect_sfa(f, 2, 3))
    for bad in [(2, -1), ("1/2", "1/3"), (1, 0, 0)]:
        with pytest.raises(OffSimplexError):
            fam.member(bad)
    with pytest.raises(OffSimplexError):
        fam.member([(1, 0), (0, 1)])


def test_family_member_float_mode(type2):
    f = type2.known_factorizations[0]
    g = Factorization(la.to_float(f.W), la.to_float(f.H))
    fam = sfa.build_family(g, sfa.detect_sfa(g, 2, 3))
    m = fam.member((0.25, 0.75))
    assert np.allclose(m.W[6], [0.25] * 3 + [0.75] * 3)
    assert verify_exact(la.to_float(type2.S), m) <= 1e-12


def test_vertex():
    assert sfa.vertex(3, 1) == [0, 1, 0]
    assert sfa.vertex(2, 0, exact=False) == [1.0, 0.0]


@pytest.mark.parametrize("name, parts, arts, expected", [
    ("type2", 2, 3, (5, 6, True)),
    ("example1", 2, 2, (3, 4, True)),
])
def test_rank_deficit(name, parts, arts, expected):
    f = corpus.paper_example(name).known_factorizations[0]
    assert sfa.rank_deficit_check(f, sfa.detect_sfa(f, parts, arts)) == expected


def test_random_sfa_family_keeps_product(rng):
    for _ in range(10):
        f = random_sfa(rng, 2, 3, 2)
        cert = sfa.detect_sfa(f, 2, 3)
        fam = sfa.build_family(f, cert)
        assert fam.records
        for p in range(2):
            m = fam.member(sfa.vertex(2, p))
            assert la.equal(m.product(), f.product())
