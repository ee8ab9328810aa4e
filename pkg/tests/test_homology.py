import pytest
from hypothesis import given, settings, strategies as st

from khcable.cube import BudgetExceeded, WindowError
from khcable.diagrams import BraidWord, braid_closure, disjoint_union_unknot, metadata, mirror, torus_braid
from khcable.homology import (
    BettiTable,
    IncompleteTableError,
    LaurentPolynomial,
    betti,
    jones,
    jones_from_table,
    kh0_positive_prediction,
    thickness,
    unnormalized_homology,
)

from corpus import FIGURE_EIGHT, TREFOIL, small
from oracles import jones_of_diagram

braids = st.integers(2, 4).flatmap(
    lambda n: st.lists(st.integers(1, n - 1).flatmap(lambda g: st.sampled_from((g, -g))),
                       max_size=8).map(lambda ls: BraidWord(n, tuple(ls))))

# standard tables (right-handed trefoil, figure-eight, positive Hopf link)
TREFOIL_KH = {(0, 1): 1, (0, 3): 1, (2, 5): 1, (3, 9): 1}
FIGURE_EIGHT_KH = {(-2, -5): 1, (-1, -1): 1, (0, -1): 1, (0, 1): 1, (1, 1): 1, (2, 5): 1}
HOPF_KH = {(0, 0): 1, (0, 2): 1, (2, 4): 1, (2, 6): 1}


def test_known_tables():
    assert betti(braid_closure(TREFOIL)).entries == TREFOIL_KH
    assert betti(braid_closure(FIGURE_EIGHT)).entries == FIGURE_EIGHT_KH
    assert betti(braid_closure(torus_braid(2, 2))).entries == HOPF_KH


def test_unnormalized_trefoil():
    t = betti(braid_closure(TREFOIL), normalized=False)
    assert t.entries == {(0, -2): 1, (0, 0): 1, (2, 2): 1, (3, 6): 1}
    assert not t.normalized


@pytest.mark.parametrize("name", sorted(small()))
def test_engines_agree(name):
    d = small()[name]
    n = len(d.crossings)
    cube = unnormalized_homology(d, engine="cube", mode="exact")
    assert unnormalized_homology(d, engine="tangle") == cube
    for a in range(n + 1):
        for b in range(a, min(a + 1, n) + 1):
            want = {k: v for k, v in cube.items() if a <= k[0] <= b}
            assert unnormalized_homology(d, (a, b), engine="tangle") == want
            assert unnormalized_homology(d, (a, b), engine="cube") == want


@given(braids)
@settings(max_examples=40, deadline=None)
def test_engines_agree_on_random_braids(word):
    d = braid_closure(word)
    assert unnormalized_homology(d, engine="tangle") == unnormalized_homology(d, engine="cube")


@given(braids)
@settings(max_examples=40, deadline=None)
def test_euler_characteristic_is_jones(word):
    d = braid_closure(word)
    assert dict(jones(d).terms()) == jones_of_diagram(d)


@given(braids)
@settings(max_examples=30, deadline=None)
def test_mirror_symmetry(word):
    d = braid_closure(word)
    t, tm = betti(d), betti(mirror(d))
    assert tm.entries == {(-i, -j): v for (i, j), v in t.entries.items()}


def test_modes_and_jobs_agree():
    d = braid_closure(torus_braid(3, 4))
    exact = betti(d, mode="exact", engine="cube")
    assert betti(d, mode="modular", seed=5, engine="cube") == exact
    assert betti(d, mode="modular", seed=6, jobs=2, engine="cube") == exact
    with pytest.raises(ValueError):
        betti(d, mode="approximate")
    with pytest.raises(ValueError):
        betti(d, engine="fast")


def test_window_matches_full_table():
    d = braid_closure(torus_braid(3, 4))
    full = betti(d)
    for a in range(0, 9):
        t = betti(d, window=(a, a))
        assert t.window == (a, a)
        assert t.entries == full.restrict(a, a).entries
    with pytest.raises(WindowError):
        betti(d, window=(3, 20))


def test_window_in_normalized_indexing():
    d = mirror(braid_closure(TREFOIL))
    t = betti(d, window=(1, 3))
    assert t.window == (-2, 0)
    assert t.covers(0) and not t.covers(1)


def test_disjoint_unknot_doubles_table():
    d = braid_closure(TREFOIL)
    t = betti(disjoint_union_unknot(d))
    want = {}
    for (i, j), v in TREFOIL_KH.items():
        for s in (1, -1):
            want[(i, j + s)] = want.get((i, j + s), 0) + v
    assert t.entries == want


def test_engine_recorded_and_budget():
    d = braid_closure(torus_braid(3, 4))
    assert betti(d, engine="cube").meta["engine"] == "cube"
    assert betti(d, engine="tangle", window=(2, 3)).meta["engine"] == "tangle"
    with pytest.raises(BudgetExceeded):
        betti(braid_closure(torus_braid(4, 5)), engine="cube", budget=1000)
    with pytest.raises(BudgetExceeded):
        betti(braid_closure(torus_braid(4, 5)), engine="tangle", budget=10)


def test_table_json_round_trip():
    t = betti(braid_closure(FIGURE_EIGHT), window=(1, 3))
    back = BettiTable.from_json(t.to_json())
    assert back == t and back.meta == t.meta
    assert "j\\i" in t.format()
    assert BettiTable().format() == "(zero)"
    with pytest.raises(ValueError):
        BettiTable({(0, 1): -1})


def test_incomplete_table_errors():
    t = betti(braid_closure(FIGURE_EIGHT), window=(1, 2))
    with pytest.raises(IncompleteTableError):
        jones_from_table(t)
    with pytest.raises(IncompleteTableError):
        thickness(t)
    with pytest.raises(IncompleteTableError):
        jones(braid_closure(FIGURE_EIGHT), window=(0, 1))


def test_thickness():
    assert thickness(betti(braid_closure(TREFOIL))) == (2, 0)
    hw, bound = thickness(betti(braid_closure(torus_braid(3, 4))))
    assert hw == 3 and bound == 1


def test_kh0_of_positive_braids():
    for word in (TREFOIL, torus_braid(2, 5), torus_braid(3, 4), BraidWord(3, (1, 1, 2, 1, 2, 2))):
        d = braid_closure(word)
        t = betti(d)
        assert set(t.support(0)) == {j for _, j in kh0_positive_prediction(metadata(d))}
    with pytest.raises(ValueError):
        kh0_positive_prediction(metadata(braid_closure(FIGURE_EIGHT)))


def test_laurent_polynomial():
    p = LaurentPolynomial({1: 2, -1: 1})
    assert (p * LaurentPolynomial({1: 1})).terms() == [(0, 1), (2, 2)]
    assert str(LaurentPolynomial({})) == "0"
    assert jones(braid_closure(TREFOIL)).terms() == [(1, 1), (3, 1), (4, -1)]
