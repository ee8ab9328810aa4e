"""Acceptance suite: one test per criterion.

The first docstring line of each test is what the terminal summary prints
next to PASS or FAIL.
"""

import random

import numpy as np
import pytest
import sympy

from khcable.cube import BudgetExceeded, ChainComplexSlice
from khcable.diagrams import (
    BraidWord,
    LinkMetadata,
    braid_closure,
    cable_diagram,
    metadata,
    mirror,
    torus_braid,
    whitehead_double,
)
from khcable.exactla import certified_rank, exact_rank
from khcable.homology import betti, jones_from_table, kh0_positive_prediction, thickness
from khcable.lee import (
    double_s,
    knot_s_positive,
    lee_betti,
    lee_dims_predicted,
    s_from_kh0,
    s_invariant,
)
from khcable.skein import braid_crossing, cable_maxdeg_window, cable_vanishing_bound, les_check
from khcable.tangle import TangleStats, tangle_homology

from corpus import FIGURE_EIGHT, KINK, TREFOIL, UNKNOT, named, random_braids
from oracles import jones_of_diagram, lee_dims_by_subsets

# D(2, 2(n+f)) with n = 4, f = 3: the writhe correction is added by cable_diagram
SLOW_CABLE = cable_diagram(TREFOIL, 2, 2 * 4)


def corpus():
    out = list(named().items())
    out += [(f"random {b.letters}", braid_closure(b)) for b in random_braids()]
    return out


def torus(p, q):
    return braid_closure(torus_braid(p, q))


def kh(d, **kw):
    return betti(d, mode="exact", **kw)


def test_c01_foundation():
    """Criterion 1: d∘d = 0 and graded Euler characteristic = Kauffman-bracket Jones, whole corpus"""
    for name, d in corpus():
        cx = ChainComplexSlice(d)
        for i in cx.degrees():
            for q in cx.gradings(i):
                if cx.dim(i + 2, q) and cx.dim(i + 1, q):
                    dd = cx.differential(i + 1, q) @ cx.differential(i, q)
                    assert dd.is_zero(), (name, i, q)
        got = dict(jones_from_table(kh(d)).terms())
        assert got == jones_of_diagram(d), name


def test_c02_unknot_and_mirror():
    """Criterion 2: KH(unknot) = Q at (0,±1); KH(mirror)^{i,j} = KH^{-i,-j} for trefoil and figure-eight"""
    assert kh(braid_closure(UNKNOT)).entries == {(0, 1): 1, (0, -1): 1}
    for word in (TREFOIL, FIGURE_EIGHT):
        d = braid_closure(word)
        t, tm = kh(d), kh(mirror(d))
        assert tm.entries == {(-i, -j): v for (i, j), v in t.entries.items()}
        assert kh(braid_closure(word.mirror())).entries == tm.entries


def test_c03_torus_odd_cables():
    """Criterion 3: T(3,3) top degree 4, dim 6 at j=13,11,9; T(3,6) top degree 8, dim 6 at j=25,23,21"""
    for q, top, js in ((3, 4, (13, 11, 9)), (6, 8, (25, 23, 21))):
        t = kh(torus(3, q))
        assert t.max_degree() == top
        assert t.degree_dim(top) == 6
        sup = t.support(top)
        assert set(sup) == set(js)


def test_c04_torus_4_4():
    """Criterion 4: T(4,4) has dim KH^8 = 6 with graded dims 2, 3, 1 at j = 24, 22, 20"""
    t = kh(torus(4, 4))
    assert t.degree_dim(8) == 6
    assert t.support(8) == {24: 2, 22: 3, 20: 1}


def test_c05_lemma_d32():
    """Criterion 5: H^4(D_{3,2}) = 0 (unnormalized)"""
    d = torus(3, 2)
    assert d.n_minus == 0
    t = betti(d, normalized=False, mode="exact")
    assert t.degree_dim(4) == 0
    assert t.degree_dim(3) > 0  # the diagram does reach degree 3


def test_c06_cable_of_kink():
    """Criterion 6: K(2,6) on the 8-crossing cable diagram: top degree 6, dim 2, j = 18, 16"""
    d = cable_diagram(KINK, 2, 2 * 2)  # n = 2, writhe f = 1 added inside
    assert len(d.crossings) == 8
    t = kh(d)
    assert t.max_degree() == 6
    assert t.degree_dim(6) == 2
    assert t.support(6) == {18: 1, 16: 1}


@pytest.mark.slow
def test_c06_slow_trefoil_cable():
    """Criterion 6 (slow variant): trefoil cable, 20 crossings, windowed: dim KH^14 = 2 at j = 42, 40"""
    d = SLOW_CABLE
    assert len(d.crossings) == 20 and d.n_minus == 0
    t = kh(d, window=(14, 14))
    assert t.window == (14, 14)
    assert t.support(14) == {42: 1, 40: 1}
    # nothing above 14 either
    assert not kh(d, window=(15, 20)).entries


def test_c07_lee_prediction():
    """Criterion 7: Lee dims = subset-count prediction on T22, T24, T33, T44 and K(2,6); total = 2^components"""
    cases = [torus(2, 2), torus(2, 4), torus(3, 3), torus(4, 4), cable_diagram(KINK, 2, 4)]
    for d in cases:
        meta = metadata(d)
        got = lee_betti(d, mode="exact")
        assert got == lee_dims_predicted(meta)
        assert lee_dims_predicted(meta) == lee_dims_by_subsets(meta.linking_matrix())
        assert sum(got.values()) == 2 ** d.components


def test_c08_skein_sequence():
    """Criterion 8: long exact sequence holds at every crossing of Hopf, trefoil, T(3,3) and at (2,1) of D_{3,4}"""
    for d in (torus(2, 2), torus(2, 3), torus(3, 3)):
        for c in range(len(d.crossings)):
            r = les_check(d, c, mode="exact")
            assert r.passed, (c, r.as_dict())
    word = torus_braid(3, 4)
    c = braid_crossing(word, 2, 1)
    r = les_check(braid_closure(word), c, mode="exact")
    assert r.passed, r.as_dict()


def test_c09_whitehead_double():
    """Criterion 9: KH^0(L(O,2)) = Q exactly at j = -3, -1; s(L(O,2)) = -2 by Lee filtration and by KH^0"""
    d = whitehead_double(UNKNOT, 2)
    t = kh(d)
    assert t.support(0) == {-3: 1, -1: 1}
    assert s_invariant(d) == -2
    assert s_from_kh0(t) == -2
    assert double_s(0, 0, 2) == -2


def test_c10_s_invariant():
    """Criterion 10: s(unknot) = 0, s(trefoil) = 2 = c + 1 - s_0, s(mirror trefoil) = -2"""
    assert s_invariant(braid_closure(UNKNOT)) == 0
    tref = braid_closure(TREFOIL)
    assert s_invariant(tref) == 2
    assert knot_s_positive(metadata(tref)) == 2
    assert s_invariant(mirror(tref)) == -2


def test_c11_thickness():
    """Criterion 11: hw(T(3,3)) >= 3, hw(figure-eight) = 2, dealternating bound = hw - 2"""
    hw, bound = thickness(kh(torus(3, 3)))
    assert hw >= 3 and bound == hw - 2
    hw, bound = thickness(kh(braid_closure(FIGURE_EIGHT)))
    assert hw == 2 and bound == 0


@pytest.mark.slow
def test_c12a_windowed_instrumentation():
    """Criterion 12a: windowed slow cable touches only degrees near the band (both engines)"""
    d = SLOW_CABLE
    lo, hi = 14, 14
    stats = TangleStats()
    h = tangle_homology(d, (lo, hi), stats=stats)
    # unnormalized q; j = q + n_+ for this positive diagram
    assert {q + d.n_plus for (i, q) in h if i == 14} == {42, 40}
    assert stats.final_degrees <= {lo - 1, lo, hi, hi + 1}
    for low, high, remaining in stats.step_degrees:
        assert high <= hi + 1
        assert low + remaining >= lo - 1
    cx = ChainComplexSlice(d, (lo, hi))
    assert cx.materialized == {13, 14, 15}
    with pytest.raises(BudgetExceeded):
        betti(d, window=(lo, hi), engine="cube")


def test_c12b_modular_matches_exact():
    """Criterion 12b: two-prime modular ranks equal exact ranks on 100 random corpus blocks"""
    rng = random.Random(7)
    blocks = []
    for name, d in corpus():
        cx = ChainComplexSlice(d)
        for i in cx.degrees():
            for q in cx.gradings(i):
                if cx.dim(i + 1, q):
                    blocks.append((name, cx, i, q))
    picked = rng.sample(blocks, 100)
    for name, cx, i, q in picked:
        m = cx.differential(i, q)
        assert certified_rank(m, rng.randrange(1 << 30)) == exact_rank(m), (name, i, q)


def test_c13_predictors_symbolic():
    """Criterion 13: closed-form predictors match the published formulas at 20 random tuples each"""
    rng = random.Random(13)
    k, n, l, lp, lm, f, q = sympy.symbols("k n l l_p l_m f q", integer=True)

    even = sympy.Piecewise((2 * k**2 * (n - l + 1) + l * (2 * k)**2, n >= l), (l * (2 * k)**2, True))
    odd = sympy.Piecewise((2 * k * (k + 1) * (n - l + 1) + l * (2 * k + 1)**2, n >= l),
                          (l * (2 * k + 1)**2, True))
    for parity, expr in (("even", even), ("odd", odd)):
        for _ in range(20):
            vals = {k: rng.randint(1, 30), n: rng.randint(0, 60), l: rng.randint(0, 40)}
            assert cable_vanishing_bound(vals[k], vals[n], vals[l], parity) == expr.subs(vals)

    low = 2 * k * (k + 1) * (n + f)
    for _ in range(20):
        vals = {k: rng.randint(1, 30), lp: rng.randint(0, 20), lm: rng.randint(0, 20)}
        vals[n] = rng.randint(vals[lp] + vals[lm], 80)
        vals[f] = vals[lp] - vals[lm]
        got = cable_maxdeg_window(vals[k], vals[n], vals[f], vals[lp])
        assert got == (low.subs(vals), (low + lp).subs(vals))
    assert cable_maxdeg_window(1, 2, 3, 3) is None  # n < l

    c, s0 = sympy.symbols("c s0", integer=True)
    centre = -s0 + c + 1
    for _ in range(20):
        strands = rng.randint(2, 6)
        word = BraidWord(strands, tuple(rng.randint(1, strands - 1) for _ in range(rng.randint(1, 25))))
        meta = metadata(braid_closure(word))
        vals = {c: meta.crossings, s0: meta.seifert_circles}
        assert kh0_positive_prediction(meta) == {
            (0, int((centre - 1).subs(vals))), (0, int((centre + 1).subs(vals)))}

    top_lee = sympy.binomial(2 * k + 2, k + 1)
    for _ in range(20):
        kv, nv = rng.randint(1, 3), rng.randint(1, 4)
        p = 2 * kv + 1
        pred = lee_dims_predicted(metadata(torus(p, p * nv)))
        assert pred[2 * kv * (kv + 1) * nv] == top_lee.subs(k, kv)
        comps = rng.randint(1, 7)
        lk = np.zeros((comps, comps), dtype=int)
        for a in range(comps):
            for b in range(a + 1, comps):
                lk[a, b] = lk[b, a] = rng.randint(-4, 4)
        meta = LinkMetadata(comps, lk, 0, 0, 0, comps)
        assert lee_dims_predicted(meta) == lee_dims_by_subsets(lk.tolist())

    ras = sympy.Piecewise((-2, sympy.Eq(q, 2 * n)), (0, sympy.Eq(q, 2 * n + 1)),
                          (0, sympy.Eq(q, -2 * n)), (2, sympy.Eq(q, -2 * n + 1)))
    for _ in range(20):
        lpv, lmv = rng.randint(0, 15), rng.randint(0, 15)
        nv = rng.randint(lpv + lmv + 1, 60)
        qv = rng.choice((2 * nv, 2 * nv + 1, -2 * nv, -2 * nv + 1))
        assert double_s(lpv, lmv, qv) == ras.subs({n: nv, q: qv})
    assert double_s(1, 1, 4) is None  # n = l is outside the proven range

