from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from khcable.cube import (
    BudgetExceeded,
    ChainComplexSlice,
    WindowError,
    edge_map,
    normalize_indices,
    resolve,
    window_generator_count,
)
from khcable.diagrams import BraidWord, braid_closure, torus_braid
from khcable.exactla import exact_rank, kernel_basis

from corpus import FIGURE_EIGHT, TREFOIL, small
from oracles import _circles, hopf_chain_dims

braids = st.integers(2, 4).flatmap(
    lambda n: st.lists(st.integers(1, n - 1).flatmap(lambda g: st.sampled_from((g, -g))),
                       min_size=1, max_size=7).map(lambda ls: BraidWord(n, tuple(ls))))


def test_hopf_generator_counts():
    cx = ChainComplexSlice(braid_closure(torus_braid(2, 2)))
    assert {i: cx.dim(i) for i in cx.degrees()} == hopf_chain_dims()


def test_circle_counts_match_walk():
    for d in small().values():
        pd = [x.edges for x in d.crossings]
        for bits in product((0, 1), repeat=len(pd)):
            assert resolve(d, bits).circles == _circles(pd, d.loops, bits)


def test_resolve_rejects_bad_state():
    d = braid_closure(TREFOIL)
    with pytest.raises(WindowError):
        resolve(d, (0, 1))
    with pytest.raises(WindowError):
        resolve(d, 0b1000)


def test_q_gradings_of_trefoil_generators():
    cx = ChainComplexSlice(braid_closure(TREFOIL))
    # degree 0: two circles, q_un = k - 2x
    assert {q: cx.dim(0, q) for q in cx.gradings(0)} == {2: 1, 0: 2, -2: 1}
    # degree 3: three circles shifted by 3
    assert {q: cx.dim(3, q) for q in cx.gradings(3)} == {6: 1, 4: 3, 2: 3, 0: 1}


def test_normalize_indices():
    assert normalize_indices(3, 6, 3, 0) == (3, 9)
    assert normalize_indices(0, -6, 0, 3) == (-3, -12)


@given(braids)
@settings(max_examples=30, deadline=None)
def test_differential_squares_to_zero(word):
    cx = ChainComplexSlice(braid_closure(word))
    for i in cx.degrees():
        for q in cx.gradings(i):
            if cx.dim(i + 1, q) and cx.dim(i + 2, q):
                assert (cx.differential(i + 1, q) @ cx.differential(i, q)).is_zero()


def test_lee_differential_squares_to_zero():
    for d in small().values():
        cx = ChainComplexSlice(d, lee=True)
        for i in cx.degrees():
            if i + 2 in cx.groups:
                assert (cx.lee_differential(i + 1) @ cx.lee_differential(i)).is_zero()
        with pytest.raises(ValueError):
            cx.differential(0, 0)


def test_window_materializes_neighbours_only():
    d = braid_closure(torus_braid(3, 4))
    cx = ChainComplexSlice(d, (3, 4))
    assert cx.materialized == {2, 3, 4, 5}
    cx = ChainComplexSlice(d, (0, 0))
    assert cx.materialized == {0, 1}
    with pytest.raises(WindowError):
        ChainComplexSlice(d, (5, 9))


def test_window_generator_count():
    d = braid_closure(FIGURE_EIGHT)
    cx = ChainComplexSlice(d)
    assert window_generator_count(d, (0, 4)) == sum(cx.dim(i) for i in cx.degrees())
    assert window_generator_count(d, (1, 2)) == cx.dim(1) + cx.dim(2)


def test_budget_refusal():
    d = braid_closure(torus_braid(3, 4))
    with pytest.raises(BudgetExceeded):
        ChainComplexSlice(d, (3, 5), budget=100)
    ChainComplexSlice(d, (3, 5), budget=10_000)


def test_locate_inverts_basis():
    cx = ChainComplexSlice(braid_closure(FIGURE_EIGHT))
    for i in cx.degrees():
        for q in cx.gradings(i):
            for k, (state, mask) in enumerate(cx.basis(i, q)):
                assert cx.locate(i, state, mask) == (q, k)


def test_hopf_edges_and_first_differential():
    d = braid_closure(torus_braid(2, 2))
    assert resolve(d, (0, 0)).circles == 2 and resolve(d, (1, 0)).circles == 1
    e = edge_map(d, (0, 0), (1, 0))
    assert (e.kind, e.sign) == ("merge", 1)
    e = edge_map(d, (1, 0), (1, 1))
    assert (e.kind, e.sign) == ("split", -1)
    assert edge_map(d, (1, 0), (0, 1)).kind == "zero"
    cx = ChainComplexSlice(d)
    top = max(cx.gradings(0))
    m = cx.differential(0, top)
    # 1(x)1 -> 1 is injective on the one-dimensional top block
    assert m.shape == (cx.dim(1, top), 1) and exact_rank(m) == 1
    kernel = sum(len(kernel_basis(cx.differential(0, q))) for q in cx.gradings(0))
    assert kernel == 2
