"""The cube of resolutions and the Khovanov (or Lee) chain complex.

States are bitmasks: bit ``c`` is the smoothing chosen at crossing ``c``.
An enhanced generator is a state plus a label mask over its circles, bit
``j`` set meaning circle ``j`` carries ``X`` (unset: ``1``). Circles are
numbered by their minimal arc (edge) id; free loops come last.

The complex can be restricted to a window of homological degrees. Chain
groups are materialized as ordered state lists with per-grading offsets;
individual generators and differential blocks are produced on demand.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Iterator

import numpy as np

from .diagrams import PlanarDiagram
from .exactla import SparseExactMatrix


class WindowError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    """The requested window has more generators than the configured budget."""


DEFAULT_BUDGET = 50_000_000


# ---------------------------------------------------------------------------
# resolutions


class CubeTables:
    """Per-diagram lookup tables used by every resolution."""

    def __init__(self, d: PlanarDiagram):
        self.diagram = d
        self.n = len(d.crossings)
        # arcs are edge ids ranked in increasing order; loops act as extra
        # isolated arcs after all edges
        rank = {e: k for k, e in enumerate(sorted(d.edges))}
        self.n_edges = len(rank)
        self.n_arcs = self.n_edges + d.loops

        def ranked(pairs):
            return tuple((rank[u], rank[v]) for u, v in pairs)

        self.pairs = [
            (ranked(x.smoothing_pairs(0)), ranked(x.smoothing_pairs(1))) for x in d.crossings
        ]


@dataclass(frozen=True)
class ResolvedState:
    state: int
    weight: int
    circles: int
    circle_of_arc: tuple[int, ...]
    circle_min_arc: tuple[int, ...] = field(repr=False)

    def touching(self, tables: CubeTables, c: int) -> tuple[int, ...]:
        """Circle ids met by the smoothing arcs at crossing ``c``."""
        (u, _), (v, _) = tables.pairs[c][(self.state >> c) & 1]
        cu, cv = self.circle_of_arc[u], self.circle_of_arc[v]
        return (cu,) if cu == cv else (cu, cv)


def resolve(d: PlanarDiagram | CubeTables, state: int | tuple[int, ...]) -> ResolvedState:
    """Circle decomposition of a smoothing, by union-find over smoothing arcs.

    ``state`` is a bitmask or a 0/1 tuple with entry ``c`` for crossing ``c``.
    """
    tables = d if isinstance(d, CubeTables) else CubeTables(d)
    if isinstance(state, tuple):
        if len(state) != tables.n:
            raise WindowError(
                f"state has length {len(state)}, diagram has {tables.n} crossings"
            )
        state = sum(bit << c for c, bit in enumerate(state))
    elif state >> tables.n:
        raise WindowError(f"state {state:b} longer than {tables.n} crossings")
    return _resolve(tables, state)


def _resolve(tables: CubeTables, state: int) -> ResolvedState:
    parent = list(range(tables.n_arcs))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c, choices in enumerate(tables.pairs):
        for u, v in choices[(state >> c) & 1]:
            ru, rv = find(u), find(v)
            if ru != rv:
                if ru < rv:
                    parent[rv] = ru
                else:
                    parent[ru] = rv
    ids: dict[int, int] = {}
    circle_of_arc = []
    mins = []
    for e in range(tables.n_arcs):
        r = find(e)
        if r not in ids:
            ids[r] = len(ids)
            mins.append(e)
        circle_of_arc.append(ids[r])
    return ResolvedState(
        state, bin(state).count("1"), len(ids), tuple(circle_of_arc), tuple(mins)
    )


# ---------------------------------------------------------------------------
# edge maps


@dataclass(frozen=True)
class EdgeMap:
    """One edge of the cube: merge, split, or (states not adjacent) zero."""

    kind: str  # "merge" | "split" | "zero"
    sign: int = 0
    crossing: int = -1
    source_circles: tuple[int, ...] = ()
    target_circles: tuple[int, ...] = ()
    # image of every source circle in the target (for a merge both merged
    # circles map to the merged one; for a split the split circle maps to
    # the first of the two new circles)
    circle_map: tuple[int, ...] = ()


def edge_map(
    d: PlanarDiagram | CubeTables,
    source: ResolvedState | int | tuple,
    target: ResolvedState | int | tuple,
) -> EdgeMap:
    tables = d if isinstance(d, CubeTables) else CubeTables(d)
    if not isinstance(source, ResolvedState):
        source = resolve(tables, source)
    if not isinstance(target, ResolvedState):
        target = resolve(tables, target)
    diff = source.state ^ target.state
    if diff == 0 or diff & (diff - 1) or not (target.state & diff):
        return EdgeMap("zero")
    c = diff.bit_length() - 1
    return _edge_map(tables, source, target, c)


def _edge_map(tables: CubeTables, src: ResolvedState, tgt: ResolvedState, c: int) -> EdgeMap:
    sign = -1 if bin(src.state & ((1 << c) - 1)).count("1") % 2 else 1
    (a, _), (b, _) = tables.pairs[c][0]
    ca, cb = src.circle_of_arc[a], src.circle_of_arc[b]
    cmap = tuple(tgt.circle_of_arc[m] for m in src.circle_min_arc)
    if ca != cb:
        return EdgeMap("merge", sign, c, (ca, cb), (tgt.circle_of_arc[a],), cmap)
    (a1, _), (b1, _) = tables.pairs[c][1]
    z1, z2 = tgt.circle_of_arc[a1], tgt.circle_of_arc[b1]
    cmap = list(cmap)
    cmap[ca] = z1
    return EdgeMap("split", sign, c, (ca,), (z1, z2), tuple(cmap))


# ---------------------------------------------------------------------------
# label masks


@lru_cache(maxsize=None)
def _label_tables(k: int) -> tuple[np.ndarray, np.ndarray]:
    """(popcount, lexicographic rank within its popcount class) for every mask."""
    size = 1 << k
    masks = np.arange(size, dtype=np.int64)
    pop = np.zeros(size, dtype=np.int64)
    rev = np.zeros(size, dtype=np.int64)
    for j in range(k):
        bit = (masks >> j) & 1
        pop += bit
        rev |= bit << (k - 1 - j)
    rank = np.empty(size, dtype=np.int64)
    for x in range(k + 1):
        sel = np.nonzero(pop == x)[0]
        order = sel[np.argsort(rev[sel], kind="stable")]
        rank[order] = np.arange(len(order))
    return pop, rank


@lru_cache(maxsize=None)
def _masks_with_pop(k: int, x: int) -> np.ndarray:
    pop, rank = _label_tables(k)
    sel = np.nonzero(pop == x)[0]
    out = np.empty(len(sel), dtype=np.int64)
    out[rank[sel]] = sel
    return out


def normalize_indices(i_un: int, q_un: int, n_plus: int, n_minus: int) -> tuple[int, int]:
    """Shift unnormalized (i, q) to the link-invariant (i, j) of KH."""
    return i_un - n_minus, q_un + n_plus - 2 * n_minus


# ---------------------------------------------------------------------------
# chain groups and the complex


@dataclass
class ChainGroup:
    degree: int
    states: list[ResolvedState]
    # q -> list of (state position, number of X labels, offset in the block)
    blocks: dict[int, list[tuple[int, int, int]]]
    dims: dict[int, int]

    @property
    def total(self) -> int:
        return sum(self.dims.values())

    def gradings(self) -> list[int]:
        return sorted(self.dims)


def _build_group(tables: CubeTables, degree: int) -> ChainGroup:
    states = [
        _resolve(tables, sum(1 << c for c in combo))
        for combo in itertools.combinations(range(tables.n), degree)
    ]
    states.sort(key=lambda s: s.state)
    blocks: dict[int, list[tuple[int, int, int]]] = {}
    dims: dict[int, int] = {}
    for pos, rs in enumerate(states):
        k = rs.circles
        for x in range(k + 1):
            q = k - 2 * x + degree
            off = dims.get(q, 0)
            blocks.setdefault(q, []).append((pos, x, off))
            dims[q] = off + comb(k, x)
    return ChainGroup(degree, states, blocks, dims)


class ChainComplexSlice:
    """Khovanov (``lee=False``) or Lee (``lee=True``) complex on a degree window.

    Chain groups are built for degrees ``a-1 .. b+1`` clipped to ``0 .. n``,
    which is exactly what homology in degrees ``a .. b`` needs.
    ``materialized`` records every degree whose group was built.
    """

    def __init__(self, d: PlanarDiagram, window: tuple[int, int] | None = None,
                 lee: bool = False, budget: int | None = None):
        n = len(d.crossings)
        if window is None:
            window = (0, n)
        a, b = window
        if not 0 <= a <= b <= n:
            raise WindowError(f"window {window} outside 0..{n}")
        self.diagram = d
        self.tables = CubeTables(d)
        self.window = (a, b)
        self.lee = lee
        self.materialized: set[int] = set()
        lo, hi = max(a - 1, 0), min(b + 1, n)
        if budget is not None:
            estimate = window_generator_count(d, (lo, hi), budget)
            if estimate > budget:
                raise BudgetExceeded(
                    f"window {window} needs {estimate} generators, budget is {budget}"
                )
        self.groups: dict[int, ChainGroup] = {}
        for i in range(lo, hi + 1):
            self.groups[i] = _build_group(self.tables, i)
            self.materialized.add(i)
        self._offset_cache: dict[int, list[np.ndarray]] = {}
        self._positions = {
            i: {rs.state: p for p, rs in enumerate(g.states)} for i, g in self.groups.items()
        }

    @property
    def n(self) -> int:
        return self.tables.n

    def degrees(self) -> range:
        return range(min(self.groups), max(self.groups) + 1)

    def dim(self, i: int, q: int | None = None) -> int:
        g = self.groups.get(i)
        if g is None:
            return 0
        return g.total if q is None else g.dims.get(q, 0)

    def basis(self, i: int, q: int) -> Iterator[tuple[int, int]]:
        """Generators of ``C^{i,q}`` in order, as (state, label mask)."""
        g = self.groups[i]
        for pos, x, _ in g.blocks.get(q, []):
            rs = g.states[pos]
            for m in _masks_with_pop(rs.circles, x):
                yield rs.state, int(m)

    def gradings(self, i: int) -> list[int]:
        return self.groups[i].gradings() if i in self.groups else []

    def full_index(self, i: int) -> tuple[dict[int, int], list[int]]:
        """Offsets of the q-blocks inside the whole degree (ascending q) and
        the q-grading of every index in that order."""
        offsets = {}
        qs: list[int] = []
        for q in self.gradings(i):
            offsets[q] = len(qs)
            qs.extend([q] * self.dim(i, q))
        return offsets, qs

    def locate(self, i: int, state: int, mask: int) -> tuple[int, int]:
        """(q, index inside C^{i,q}) of the generator (state, mask)."""
        pos = self._positions[i][state]
        k = self.groups[i].states[pos].circles
        pop, rank = _label_tables(k)
        x = int(pop[mask])
        return k - 2 * x + i, int(self._block_offsets(i)[pos][x] + rank[mask])

    def resolved(self, i: int, state: int) -> ResolvedState:
        return self.groups[i].states[self._positions[i][state]]

    def _block_offsets(self, i: int) -> list[np.ndarray]:
        """For each state position in degree i, block offset indexed by #X."""
        cached = self._offset_cache.get(i)
        if cached is None:
            g = self.groups[i]
            cached = [np.zeros(rs.circles + 1, dtype=np.int64) for rs in g.states]
            for entries in g.blocks.values():
                for pos, x, off in entries:
                    cached[pos][x] = off
            self._offset_cache[i] = cached
        return cached

    # -- differentials ------------------------------------------------------

    def differential(self, i: int, q: int) -> SparseExactMatrix:
        """Khovanov ``d^i`` restricted to grading ``q``: C^{i,q} -> C^{i+1,q}."""
        if self.lee:
            raise ValueError("the Lee differential is not graded; use lee_differential")
        rows, cols, vals = self._entries(i, q)
        return SparseExactMatrix.from_coo(self.dim(i + 1, q), self.dim(i, q), rows, cols, vals)

    def lee_differential(self, i: int) -> SparseExactMatrix:
        """Lee ``d^i`` on the whole degree, bases ordered by ascending q."""
        if not self.lee:
            raise ValueError("complex was built without the Lee deformation")
        src_off, _ = self.full_index(i)
        tgt_off, _ = self.full_index(i + 1)
        rows, cols, vals = [], [], []
        for q in self.gradings(i):
            r_, c_, v_ = self._entries(i, q, tgt_offsets=tgt_off)
            rows.append(r_)
            cols.append(c_ + src_off[q])
            vals.append(v_)
        if rows:
            rows_a, cols_a, vals_a = (np.concatenate(x) for x in (rows, cols, vals))
        else:
            rows_a = cols_a = vals_a = np.zeros(0, dtype=np.int64)
        return SparseExactMatrix.from_coo(self.dim(i + 1), self.dim(i), rows_a, cols_a, vals_a)

    def _entries(self, i: int, q: int, tgt_offsets: dict[int, int] | None = None):
        """COO entries of the edge maps leaving C^{i,q}.

        Without ``tgt_offsets`` targets are indexed inside C^{i+1,q} (Khovanov
        maps preserve q). With them, targets are indexed in the whole degree
        i+1 and the Lee terms (which raise q by 4) are included.
        """
        empty = (np.zeros(0, np.int64),) * 3
        if i not in self.groups or i + 1 not in self.groups or q not in self.groups[i].dims:
            return empty
        src, tgt = self.groups[i], self.groups[i + 1]
        tgt_pos = self._positions[i + 1]
        tgt_block_off = self._block_offsets(i + 1)
        if tgt_offsets is not None:
            q0 = min(tgt_offsets)
            shift = np.zeros(max(tgt_offsets) - q0 + 1, dtype=np.int64)
            for tq, o in tgt_offsets.items():
                shift[tq - q0] = o
        rows, cols, vals = [], [], []
        for pos, x, off in src.blocks[q]:
            rs = src.states[pos]
            k = rs.circles
            masks = _masks_with_pop(k, x)
            col_idx = off + np.arange(len(masks), dtype=np.int64)
            for c in range(self.n):
                if (rs.state >> c) & 1:
                    continue
                tp = tgt_pos[rs.state | (1 << c)]
                ts = tgt.states[tp]
                em = _edge_map(self.tables, rs, ts, c)
                tpop_table, trank_table = _label_tables(ts.circles)
                for tmask, coeff, sel in _apply_edge(em, masks, k, self.lee):
                    tx = tpop_table[tmask]
                    r = tgt_block_off[tp][tx] + trank_table[tmask]
                    if tgt_offsets is not None:
                        r = r + shift[ts.circles - 2 * tx + i + 1 - q0]
                    rows.append(r)
                    cols.append(col_idx[sel])
                    vals.append(np.full(len(r), coeff * em.sign, dtype=np.int64))
        if not rows:
            return empty
        return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def _apply_edge(em: EdgeMap, masks: np.ndarray, k: int, lee: bool):
    """Yield (target masks, coefficient, selector of source masks) triples."""
    moved = np.zeros(len(masks), dtype=np.int64)
    active = set(em.source_circles)
    for j in range(k):
        if j not in active:
            moved |= ((masks >> j) & 1) << em.circle_map[j]
    if em.kind == "merge":
        a, b = em.source_circles
        (z,) = em.target_circles
        la, lb = (masks >> a) & 1, (masks >> b) & 1
        both = (la & lb).astype(bool)
        keep = ~both
        yield moved[keep] | ((la | lb)[keep] << z), 1, keep
        if lee and both.any():
            yield moved[both], 1, both  # X*X = 1
    else:
        (a,) = em.source_circles
        z1, z2 = em.target_circles
        la = ((masks >> a) & 1).astype(bool)
        one = ~la
        if one.any():
            yield moved[one] | (1 << z2), 1, one  # 1 -> 1(x)X + X(x)1
            yield moved[one] | (1 << z1), 1, one
        if la.any():
            yield moved[la] | (1 << z1) | (1 << z2), 1, la  # X -> X(x)X
            if lee:
                yield moved[la], 1, la  # + 1(x)1


def window_generator_count(d: PlanarDiagram, degrees: tuple[int, int], cap: int | None = None) -> int:
    """Sum of 2^(circles) over states with weight in ``degrees``.

    Stops early once ``cap`` is exceeded (the state count alone already
    bounds the answer from below by twice itself).
    """
    n = len(d.crossings)
    lo, hi = degrees
    n_states = sum(comb(n, i) for i in range(lo, hi + 1))
    if cap is not None and 2 * n_states > cap:
        return 2 * n_states
    tables = CubeTables(d)
    total = 0
    for i in range(lo, hi + 1):
        for combo in itertools.combinations(range(n), i):
            total += 1 << _resolve(tables, sum(1 << c for c in combo)).circles
            if cap is not None and total > cap:
                return total
    return total


def build_complex(d: PlanarDiagram, window: tuple[int, int] | None = None,
                  lee: bool = False, budget: int | None = None) -> ChainComplexSlice:
    return ChainComplexSlice(d, window, lee=lee, budget=budget)
