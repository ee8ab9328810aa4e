"""Independent reference computations used by the tests.

Nothing here imports the package's homology code: the Jones polynomial is
evaluated from the Kauffman bracket, with circles counted by walking the
smoothed diagram rather than by union-find.
"""

from fractions import Fraction
from itertools import product

import sympy

A, t = sympy.symbols("A t")


def _circles(crossings, loops, choices):
    """Count closed curves of a smoothing by walking slot to slot.

    Each crossing is a counterclockwise 4-tuple of edge labels with the
    incoming under-strand first. Choice 0 joins slots (0,1),(2,3) and choice 1
    joins (0,3),(1,2).
    """
    partner = {}
    ends = {}
    for c, (edges, ch) in enumerate(zip(crossings, choices)):
        pairs = ((0, 1), (2, 3)) if ch == 0 else ((0, 3), (1, 2))
        for s, u in pairs:
            partner[(c, s)] = (c, u)
            partner[(c, u)] = (c, s)
        for s, e in enumerate(edges):
            ends.setdefault(e, []).append((c, s))
    other_end = {}
    for e, slots in ends.items():
        x, y = slots
        other_end[x] = y
        other_end[y] = x
    seen = set()
    count = 0
    for start in partner:
        if start in seen:
            continue
        count += 1
        cur = start
        while cur not in seen:
            seen.add(cur)
            mate = partner[cur]
            seen.add(mate)
            cur = other_end[mate]
    return count + loops


def kauffman_bracket(crossings, loops=0):
    """<D> as a sympy expression in A (normalised so that <O> = 1)."""
    n = len(crossings)
    if n == 0:
        return sympy.expand((-A**2 - A**-2) ** (loops - 1))
    total = 0
    for choices in product((0, 1), repeat=n):
        zeros = choices.count(0)
        k = _circles(crossings, loops, choices)
        total += A ** (zeros - (n - zeros)) * (-A**2 - A**-2) ** (k - 1)
    return sympy.expand(total)


def jones_oracle(crossings, signs, loops=0):
    """Jones polynomial as {exponent of t: coefficient}, exponents as Fractions.

    The smoothing that joins the incoming under-strand to the next edge
    counterclockwise is the A-smoothing.
    """
    w = sum(signs)
    v = sympy.expand((-A**3) ** (-w) * kauffman_bracket(crossings, loops))
    out = {}
    for term in sympy.Add.make_args(v):
        coeff, e = term.as_coeff_exponent(A)
        # A = t^(-1/4)
        te = Fraction(int(-e), 4)
        out[te] = out.get(te, 0) + Fraction(int(coeff.p), int(coeff.q))
    return {e: c for e, c in out.items() if c}


def jones_of_diagram(d):
    """Convenience wrapper reading the plain PD data off a diagram object."""
    return jones_oracle([x.edges for x in d.crossings], [x.sign for x in d.crossings], d.loops)


def hopf_chain_dims():
    """Hand enumeration of the positive Hopf complex: generators per degree.

    States 00 and 11 resolve into two circles, 01 and 10 into one.
    """
    circles = {(0, 0): 2, (1, 0): 1, (0, 1): 1, (1, 1): 2}
    dims = {}
    for state, k in circles.items():
        dims[sum(state)] = dims.get(sum(state), 0) + 2 ** k
    return dims


def lee_dims_by_subsets(linking):
    """2 * #{E subset of {2..n} : sum over j in E, k not in E of 2 lk(j,k) = i}.

    Written directly from the subset formula, as a check on the package's
    predictor.
    """
    n = len(linking)
    out = {}
    for bits in product((0, 1), repeat=n - 1):
        inside = [0] + [j + 1 for j, b in enumerate(bits) if b]
        inside = set(inside[1:])
        i = sum(2 * linking[j][k] for j in inside for k in range(n) if k not in inside)
        out[i] = out.get(i, 0) + 2
    return out
