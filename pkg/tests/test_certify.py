import numpy as np
import pytest

from nmfid import certify as C
from nmfid import corpus
from nmfid import linalg as la
from nmfid.errors import DimensionError, GuardLimitError, InexactFactorizationError
from nmfid.solve import Factorization

from conftest import q


@pytest.fixture
def type2():
    return corpus.paper_example("type2")


def test_indexing_default_and_custom():
    idx = C.PartArticulationIndexing(2, 3)
    assert idx.r(1, 2) == 5 and idx.part_of(4) == (1, 1)
    custom = C.PartArticulationIndexing(2, 2, ((3, 1), (0, 2)))
    assert custom.part_columns(0) == [3, 1]
    with pytest.raises(ValueError):
        C.PartArticulationIndexing(2, 2, ((0, 0), (1, 2)))
    with pytest.raises(GuardLimitError):
        list(C.PartArticulationIndexing(20, 2).assignments())


def test_separability_identity(type2):
    idx = C.PartArticulationIndexing(2, 3)
    rep = C.check_separability(type2.extras["W_tilde"], idx)
    assert rep.holds and rep.witnesses["rows"] == [[0, 1, 2], [3, 4, 5]]
    assert C.recheck(rep, type2.extras["W_tilde"], type2.extras["H_tilde"])


def test_separability_extra_positive_row_keeps_witnesses():
    idx = C.PartArticulationIndexing(2, 3)
    W = q(np.eye(6, dtype=int).tolist() + [[1] * 6])
    rep = C.check_separability(W, idx)
    assert rep.holds and rep.witnesses["rows"] == [[0, 1, 2], [3, 4, 5]]


def test_separability_fails_on_ones():
    rep = C.check_separability(q(np.ones((4, 4), dtype=int)), C.PartArticulationIndexing(2, 2))
    assert rep.verdict == C.FAILS and len(rep.witnesses["missing_pairs"]) == 4
    with pytest.raises(DimensionError):
        C.check_separability(q(np.ones((4, 3), dtype=int)), C.PartArticulationIndexing(2, 2))


def test_complete_factorial_sampling(type2):
    idx = C.PartArticulationIndexing(2, 3)
    Ht = type2.extras["H_tilde"]
    rep = C.check_complete_factorial_sampling(Ht, idx)
    assert rep.holds and C.recheck(rep, type2.extras["W_tilde"], Ht)
    cut = C.check_complete_factorial_sampling(Ht[:, 1:], idx)
    assert cut.verdict == C.FAILS and cut.witnesses["missing_assignments"] == [[0, 0]]
    ex1 = corpus.paper_example("example1").known_factorizations[0]
    assert C.check_complete_factorial_sampling(ex1.H, C.PartArticulationIndexing(2, 2)).holds


def test_donoho(type2):
    Wt, Ht = type2.extras["W_tilde"], type2.extras["H_tilde"]
    rep = C.check_donoho(type2.extras["S_tilde"], Factorization(Wt, Ht),
                         C.PartArticulationIndexing(2, 3))
    assert rep.holds and C.recheck(rep, Wt, Ht)
    ex1 = corpus.paper_example("example1")
    rep = C.check_donoho(ex1.S, ex1.known_factorizations[0], C.PartArticulationIndexing(2, 2))
    assert rep.verdict == C.UNKNOWN and any("A=2" in n for n in rep.notes)


def test_donoho_swimmer():
    S, f, idx = corpus.swimmer(with_body=False)
    assert C.check_donoho(S, f, idx).holds


def test_donoho_requires_exact(type2):
    f = type2.known_factorizations[0]
    with pytest.raises(InexactFactorizationError):
        C.check_donoho(type2.S + 1, f, C.PartArticulationIndexing(2, 3))


def test_sufficiently_spread():
    assert C.check_sufficiently_spread(la.identity(3)).holds
    t1 = corpus.paper_example("type1").known_factorizations[0]
    assert C.check_sufficiently_spread(t1.H).verdict == C.FAILS
    assert C.check_sufficiently_spread(q([[1, 1], [0, 1]])).verdict == C.FAILS
    strict = C.check_sufficiently_spread(la.identity(3), strict=True)
    assert strict.holds and C.recheck(strict, la.identity(3), la.identity(3))


def test_boundary_close():
    assert C.check_boundary_close(la.identity(4)).holds
    W = corpus.paper_example("type1").known_factorizations[0].W
    assert C.check_boundary_close(W).holds
    assert C.check_boundary_close(W, strict=True).verdict == C.FAILS
    pos = C.check_boundary_close(q([[1, 2], [3, 4]]))
    assert pos.verdict == C.FAILS and any("cannot be unique" in n for n in pos.notes)
    one = C.check_boundary_close(q([[1], [2]]))
    assert not any("cannot be unique" in n for n in one.notes)


def test_strongly_boundary_close():
    for R in range(2, 6):
        rep = C.check_strongly_boundary_close(la.identity(R))
        assert rep.holds and C.recheck(rep, la.identity(R), la.identity(R))
    W = corpus.paper_example("type1").known_factorizations[0].W
    assert C.check_strongly_boundary_close(W).verdict == C.FAILS
    dense9 = q((np.ones((9, 9), dtype=int) - np.eye(9, dtype=int)).tolist())
    assert C.check_strongly_boundary_close(dense9).verdict == C.UNKNOWN


def test_laurberg_identity():
    S = la.identity(3)
    rep = C.check_laurberg(S, Factorization(S, S))
    assert rep.holds and C.recheck(rep, S, S)


def test_huang():
    rep = C.check_huang(q([[1, 1], [0, 1]]), q([[1, 0], [0, 1]]))
    assert rep.verdict == C.FAILS and [0, 1, "M"] in rep.witnesses["violations"]
    H = q([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
    rep = C.check_huang(la.identity(3), H)
    assert rep.holds and C.recheck(rep, la.identity(3), H)
    with pytest.raises(DimensionError):
        C.check_huang(la.identity(3), la.identity(2))


def test_huang_type2_passes_yet_non_unique(type2):
    f = type2.known_factorizations[0]
    rep = C.check_huang(f.W, f.H)
    assert rep.holds
    assert rep.witnesses["M_sets"] == [[0, 6], [1, 6], [2, 6], [3], [4], [5]]
    assert any("necessary condition only" in n for n in rep.notes)


def test_certify_all_and_recheck(type2):
    f = type2.known_factorizations[0]
    reps = C.certify_all(type2.S, f, C.PartArticulationIndexing(2, 3))
    names = [r.condition for r in reps]
    assert "donoho_stodden" in names and "huang" in names
    for r in reps:
        if r.holds:
            assert C.recheck(r, f.W, f.H), r.condition
    assert "huang" in reps[0].summary()


def test_recheck_rejects_tampered_witness():
    rep = C.check_separability(la.identity(4), C.PartArticulationIndexing(2, 2))
    rep.witnesses["rows"] = [[1, 0], [2, 3]]
    assert not C.recheck(rep, la.identity(4), la.identity(4))
