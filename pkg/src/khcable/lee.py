"""Lee homology, orientation cycles, and the Rasmussen s-invariant.

The deformed complex uses m(X*X) = 1 and Delta(X) = X*X + 1*1 on top of the
Khovanov maps. Its homology has dimension 2^(components), concentrated in
degrees fixed by linking numbers, and the q-filtration on degree 0 of a
knot gives s.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

from .cube import ChainComplexSlice, CubeTables, _resolve, normalize_indices
from .diagrams import LinkMetadata, PlanarDiagram
from .exactla import (
    SparseExactMatrix,
    Vector,
    _reduce_frac,
    certified_rank,
    exact_rank,
    in_image,
    kernel_basis,
)
from .homology import BettiTable

MAX_COMPONENTS = 20


class NotAKnotError(ValueError):
    pass


def lee_complex(d: PlanarDiagram, window: tuple[int, int] | None = None,
                budget: int | None = None) -> ChainComplexSlice:
    return ChainComplexSlice(d, window, lee=True, budget=budget)


def lee_betti(d: PlanarDiagram, mode: str = "modular", seed: int = 0,
              budget: int | None = None) -> dict[int, int]:
    """Normalized homological degree -> dim of Lee homology (nonzero only)."""
    cx = lee_complex(d, budget=budget)
    ranks = {}
    for i in cx.degrees():
        if i + 1 in cx.groups:
            m = cx.lee_differential(i)
            ranks[i] = exact_rank(m) if mode == "exact" else certified_rank(m, seed + i)
    out = {}
    for i in cx.degrees():
        h = cx.dim(i) - ranks.get(i, 0) - ranks.get(i - 1, 0)
        if h:
            out[i - d.n_minus] = h
    return out


def lee_dims_predicted(meta: LinkMetadata) -> dict[int, int]:
    """2 * #{E in {2..n} : sum_{j in E, k not in E} 2 lk(S_j, S_k) = i}."""
    n = meta.components
    if n > MAX_COMPONENTS:
        raise ValueError(f"{n} components is too many for subset enumeration")
    lk = meta.linking_matrix()
    out: dict[int, int] = {}
    for size in range(n):
        for subset in combinations(range(1, n), size):
            inside = set(subset)
            i = sum(2 * lk[j][k] for j in inside for k in range(n) if k not in inside)
            out[i] = out.get(i, 0) + 2
    return dict(sorted(out.items()))


# ---------------------------------------------------------------------------
# orientation cycles


@dataclass(frozen=True)
class OrientationClass:
    """A re-orientation of the link (components in ``flipped`` reversed)
    together with its canonical Lee cycle.

    ``cycle`` maps label masks of the resolution ``state`` to coefficients;
    ``degree`` is the unnormalized homological degree of that resolution.
    """

    flipped: frozenset[int]
    state: int
    degree: int
    colors: tuple[int, ...]
    cycle: dict

    def as_vector(self, cx: ChainComplexSlice) -> Vector:
        """The cycle in the whole-degree basis of a Lee slice."""
        offsets, _ = cx.full_index(self.degree)
        out = {}
        for mask, c in self.cycle.items():
            q, idx = cx.locate(self.degree, self.state, mask)
            out[offsets[q] + idx] = c
        return out

    def is_cycle(self, cx: ChainComplexSlice) -> bool:
        if self.degree + 1 not in cx.groups:
            return True
        return not cx.lee_differential(self.degree).apply(self.as_vector(cx))


def orientation_classes(d: PlanarDiagram) -> list[OrientationClass]:
    """One Lee cycle per orientation of the link's components.

    For each orientation, take its oriented resolution and colour the
    Seifert circles properly (circles meeting at a crossing differ). Colour
    0 is 1 + X and colour 1 is 1 - X; since their product vanishes, every
    merge leaving the resolution kills the cycle.
    """
    tables = CubeTables(d)
    comp = d.edge_components
    n_edge_comps = len(set(comp.values()))
    edges = sorted(d.edges)
    out = []
    for flips in product((0, 1), repeat=d.components):
        flipped = frozenset(c for c, f in enumerate(flips) if f)
        state = 0
        for c, x in enumerate(d.crossings):
            over, under = comp[x.edges[1]], comp[x.edges[0]]
            sign = x.sign * (-1 if (over in flipped) != (under in flipped) else 1)
            if sign < 0:
                state |= 1 << c
        rs = _resolve(tables, state)
        # Seifert graph: circles adjacent through crossings
        adj: dict[int, list[int]] = {j: [] for j in range(rs.circles)}
        for c in range(len(d.crossings)):
            (u, _), (v, _) = tables.pairs[c][(state >> c) & 1]
            a, b = rs.circle_of_arc[u], rs.circle_of_arc[v]
            adj[a].append(b)
            adj[b].append(a)
        colors = [-1] * rs.circles
        for start in range(rs.circles):
            if colors[start] >= 0:
                continue
            # base colour from the orientation of the component through this piece
            arc = rs.circle_min_arc[start]
            if arc < tables.n_edges:
                base = flips[comp[edges[arc]]]
            else:
                base = flips[n_edge_comps + arc - tables.n_edges]
            colors[start] = base
            stack = [start]
            while stack:
                a = stack.pop()
                for b in adj[a]:
                    if colors[b] < 0:
                        colors[b] = 1 - colors[a]
                        stack.append(b)
                    elif colors[b] == colors[a]:
                        raise AssertionError("Seifert graph is not bipartite")
        cycle = {}
        for bits in product((0, 1), repeat=rs.circles):
            coeff = 1
            for j, bit in enumerate(bits):
                if bit and colors[j]:
                    coeff = -coeff
            mask = sum(bit << j for j, bit in enumerate(bits))
            cycle[mask] = coeff
        out.append(OrientationClass(flipped, state, bin(state).count("1"), tuple(colors), cycle))
    return out


# ---------------------------------------------------------------------------
# the s-invariant


class _Span:
    """Exact span of a growing family of vectors (echelon by lowest coordinate)."""

    def __init__(self, base: SparseExactMatrix | None = None):
        self.pivots: dict[int, Vector] = {}
        if base is not None:
            for col in base.columns():
                self.add(col)

    def reduce(self, v: Vector) -> Vector:
        v = {r: Fraction(x) for r, x in v.items() if x != 0}
        while v:
            low = max(v)
            pv = self.pivots.get(low)
            if pv is None:
                break
            _reduce_frac(v, pv, low)
        return v

    def add(self, v: Vector) -> bool:
        v = self.reduce(v)
        if not v:
            return False
        self.pivots[max(v)] = v
        return True

    def copy(self) -> "_Span":
        out = _Span()
        out.pivots = dict(self.pivots)
        return out


class _FilteredDegree:
    """Degree-0 Lee homology of a knot with its q-filtration."""

    def __init__(self, d: PlanarDiagram, budget: int | None = None):
        i0 = d.n_minus
        self.diagram = d
        self.degree = i0
        self.cx = lee_complex(d, (i0, i0), budget=budget)
        _, self.q_of = self.cx.full_index(i0)
        n = self.cx.dim(i0)
        if i0 + 1 in self.cx.groups:
            self.d_out = self.cx.lee_differential(i0)
        else:
            self.d_out = SparseExactMatrix(0, n)
        if i0 - 1 in self.cx.groups:
            self.d_in = self.cx.lee_differential(i0 - 1)
        else:
            self.d_in = SparseExactMatrix(n, 0)
        self.boundaries = _Span(self.d_in)
        self.levels = sorted(set(self.q_of))
        self._dims: dict[int, int] = {}

    def filtered_dim(self, q: int) -> int:
        """dim of the image of F_q (generators with q_un >= q) in homology."""
        if q not in self._dims:
            keep = [c for c, g in enumerate(self.q_of) if g >= q]
            sub = self.d_out.restrict_columns(keep)
            span = self.boundaries.copy()
            count = 0
            for z in kernel_basis(sub):
                if span.add({keep[c]: x for c, x in z.items()}):
                    count += 1
            self._dims[q] = count
        return self._dims[q]

    def highest_level(self, at_least: int) -> int:
        """Largest filtration level whose image has dimension >= at_least
        (binary search; the dimension does not increase with q)."""
        lo, hi = 0, len(self.levels) - 1
        if self.filtered_dim(self.levels[lo]) < at_least:
            raise ArithmeticError("Lee homology in degree 0 is too small")
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.filtered_dim(self.levels[mid]) >= at_least:
                lo = mid
            else:
                hi = mid - 1
        return self.levels[lo]

    def class_grading(self, v: Vector) -> int:
        """Filtration grading of the homology class of a cycle: the largest q
        with v in F_q + boundaries, decided by image membership of the part
        of v below q."""
        best = None
        for q in self.levels:
            low = [r for r, g in enumerate(self.q_of) if g < q]
            pos = {r: k for k, r in enumerate(low)}
            v_low = {pos[r]: x for r, x in v.items() if r in pos}
            rows = [{pos[r]: x for r, x in col.items() if r in pos} for col in self.d_in.columns()]
            m = SparseExactMatrix(len(low), len(rows), rows)
            if in_image(v_low, m):
                best = q
            else:
                break
        return best

    def normalize(self, q: int) -> int:
        return normalize_indices(self.degree, q, self.diagram.n_plus, self.diagram.n_minus)[1]


def _require_knot(d: PlanarDiagram) -> None:
    if d.components != 1:
        raise NotAKnotError(f"s is defined here for knots only ({d.components} components)")


def s_invariant(d: PlanarDiagram, budget: int | None = None) -> int:
    """Rasmussen's s from the filtered Lee homology in degree 0."""
    _require_knot(d)
    fd = _FilteredDegree(d, budget)
    g_max = fd.highest_level(1)
    g_min = fd.highest_level(2)
    s2 = fd.normalize(g_max) + fd.normalize(g_min)
    if s2 % 2:
        raise ArithmeticError("filtration gradings of different parity")
    return s2 // 2


def s_from_orientation_cycle(d: PlanarDiagram) -> int:
    """s as 1 + the filtration grading of the canonical cycle of the given
    orientation (that cycle realizes the minimal grading)."""
    _require_knot(d)
    fd = _FilteredDegree(d)
    (cls, _) = orientation_classes(d)
    return fd.normalize(fd.class_grading(cls.as_vector(fd.cx))) + 1


def s_from_kh0(t: BettiTable) -> int | None:
    """s when KH^0 is two-dimensional with support {a-1, a+1}; None otherwise."""
    if not t.covers(0):
        raise ValueError("table does not cover degree 0")
    sup = t.support(0)
    if sum(sup.values()) != 2 or len(sup) != 2:
        return None
    lo, hi = sorted(sup)
    if hi - lo != 2:
        return None
    return lo + 1


def double_s(l_plus: int, l_minus: int, q: int) -> int | None:
    """s of the q-twisted Whitehead double of a diagram with l_plus positive
    and l_minus negative crossings; None outside the proven range n > l."""
    if l_plus < 0 or l_minus < 0:
        raise ValueError("crossing counts must be non-negative")
    l = l_plus + l_minus
    if q >= 0:
        n, value = (q // 2, -2) if q % 2 == 0 else ((q - 1) // 2, 0)
    else:
        n, value = (-q // 2, 0) if q % 2 == 0 else ((1 - q) // 2, 2)
    if n <= l:
        return None
    return value


def knot_s_positive(meta: LinkMetadata) -> int:
    """c + 1 - s_0 for a positive knot diagram."""
    if meta.n_minus:
        raise ValueError("formula applies to positive diagrams only")
    return meta.crossings + 1 - meta.seifert_circles

