"""Khovanov homology by scanning the diagram one crossing at a time.

The diagram is cut into a growing tangle. Its complex has one generator per
(crossingless matching of the tangle's boundary, homological degree,
q-shift); closed circles are removed as soon as they appear by splitting a
generator into copies labelled 1 and X. Matrix entries are linear
combinations of dotted cobordisms, stored in the basis where every boundary
cycle of the cobordism bounds its own disc carrying 0 or 1 dots (a bitmask,
bit set = dotted). Any entry that is an invertible multiple of the identity
is cancelled by Gaussian elimination, which keeps the complex small.

A connected cobordism with m boundary cycles, genus g and d dots equals the
comultiplication of X^d (2X)^g into m factors: zero if d + g >= 2, every
cycle dotted if d + g = 1 (with a factor 2 for a handle), and the sum over
the ways of leaving exactly one cycle undotted if d = g = 0. A closed
component evaluates to 1 (dotted sphere), 2 (torus) or 0.

This engine computes the same groups as the cube of resolutions but its
cost grows with the width of the diagram rather than with 2^crossings, so it
handles the 20+ crossing cables and doubles.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction

from .cube import BudgetExceeded
from .diagrams import PlanarDiagram

_SMOOTHINGS = (((0, 1), (2, 3)), ((0, 3), (1, 2)))


class _UF:
    __slots__ = ("parent",)

    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


class _Surface:
    """Discs glued along boundary segments, with caps and output cycles.

    ``gluings`` are pairs of pieces (each removes 1 from the Euler
    characteristic); ``caps[k]`` is the piece an input circle lies on (a
    capping disc adds 1); ``outputs[k]`` is the piece an output cycle lies on.
    """

    __slots__ = ("comp_of_piece", "comp_of_cap", "comps", "n_pieces")

    def __init__(self, n_pieces, gluings, caps, outputs):
        uf = _UF(n_pieces)
        for a, b in gluings:
            uf.union(a, b)
        roots = {}
        for p in range(n_pieces):
            roots.setdefault(uf.find(p), len(roots))
        self.n_pieces = n_pieces
        self.comp_of_piece = [roots[uf.find(p)] for p in range(n_pieces)]
        self.comp_of_cap = [self.comp_of_piece[p] for p in caps]
        chi = [0] * len(roots)
        outs = [[] for _ in roots]
        for p in range(n_pieces):
            chi[self.comp_of_piece[p]] += 1
        for a, _ in gluings:
            chi[self.comp_of_piece[a]] -= 1
        for c in self.comp_of_cap:
            chi[c] += 1
        for k, p in enumerate(outputs):
            outs[self.comp_of_piece[p]].append(k)
        self.comps = []
        for c in range(len(roots)):
            twice_genus = 2 - chi[c] - len(outs[c])
            if twice_genus < 0 or twice_genus % 2:
                raise AssertionError("inconsistent surface")
            self.comps.append((twice_genus // 2, sum(1 << k for k in outs[c]), outs[c]))

    def evaluate(self, piece_dots: int, cap_dots: int) -> dict[int, int]:
        """Output dot mask -> coefficient for the given dots on pieces and caps."""
        dots = [0] * len(self.comps)
        if piece_dots:
            for p in range(self.n_pieces):
                if piece_dots >> p & 1:
                    dots[self.comp_of_piece[p]] += 1
        if cap_dots:
            for k, c in enumerate(self.comp_of_cap):
                if cap_dots >> k & 1:
                    dots[c] += 1
        result = {0: 1}
        for (genus, all_outs, outs), d in zip(self.comps, dots):
            e = d + genus
            if e >= 2:
                return {}
            if not outs:
                if e == 0:
                    return {}  # undotted sphere
                if genus:
                    result = {m: 2 * c for m, c in result.items()}
                continue
            if e == 1:
                factor = 2 if genus else 1
                result = {m | all_outs: factor * c for m, c in result.items()}
            else:
                result = {m | (all_outs ^ (1 << k)): c for m, c in result.items() for k in outs}
        return result


class _Matchings:
    """Interned crossingless matchings (point -> partner dicts)."""

    def __init__(self):
        self.ids: dict[tuple, int] = {}
        self.partner: list[dict[int, int]] = []
        self._cycles: dict[tuple[int, int], tuple] = {}
        self._compose: dict[tuple[int, int, int], _Surface] = {}

    def intern(self, partner: dict[int, int]) -> int:
        key = tuple(sorted((a, b) for a, b in partner.items() if a < b))
        mid = self.ids.get(key)
        if mid is None:
            mid = self.ids[key] = len(self.partner)
            self.partner.append(dict(partner))
        return mid

    def cycles(self, m1: int, m2: int) -> tuple[dict[int, int], int]:
        """Cycles of m1 followed by m2: (point -> cycle index, count), ordered
        by least point."""
        key = (m1, m2)
        hit = self._cycles.get(key)
        if hit is None:
            p1, p2 = self.partner[m1], self.partner[m2]
            of: dict[int, int] = {}
            n = 0
            for start in sorted(p1):
                if start in of:
                    continue
                x = start
                while x not in of:
                    of[x] = n
                    y = p1[x]
                    of[y] = n
                    x = p2[y]
                n += 1
            hit = self._cycles[key] = (of, n)
        return hit

    def composition(self, a: int, b: int, c: int) -> _Surface:
        key = (a, b, c)
        s = self._compose.get(key)
        if s is None:
            ab, n1 = self.cycles(a, b)
            bc, n2 = self.cycles(b, c)
            ac, n3 = self.cycles(a, c)
            gl = [(ab[u], n1 + bc[u]) for u, v in self.partner[b].items() if u < v]
            rep = {}
            for p in sorted(ac):
                rep.setdefault(ac[p], p)
            outputs = [ab[rep[k]] for k in range(n3)]
            s = self._compose[key] = _Surface(n1 + n2, gl, [], outputs)
        return s

    def compose(self, s1: dict, a: int, b: int, s2: dict, c: int) -> dict:
        """s2 after s1, for s1: a -> b and s2: b -> c."""
        surf = self.composition(a, b, c)
        shift = self.cycles(a, b)[1]
        out: dict[int, object] = {}
        for m1, c1 in s1.items():
            for m2, c2 in s2.items():
                for m, v in surf.evaluate(m1 | (m2 << shift), 0).items():
                    out[m] = out.get(m, 0) + c1 * c2 * v
        return {m: v for m, v in out.items() if v}


class TangleComplex:
    """The complex of a partial tangle, kept reduced by Gaussian elimination."""

    def __init__(self):
        self.match = _Matchings()
        empty = self.match.intern({})
        self.boundary: set[int] = set()
        self.gens: dict[int, tuple[int, int, int]] = {0: (0, 0, empty)}
        self.out: dict[int, dict[int, dict]] = {0: {}}
        self.inc: dict[int, set[int]] = {0: set()}
        self._next = 1
        self.peak = 1
        self.eliminated = 0
        self._surface_cache: dict = {}

    # -- crossing addition --------------------------------------------------

    def _glue(self, mid: int, edges: tuple[int, ...], s: int):
        """Matching M (on the current boundary) joined with smoothing s.

        Returns (new partner dict, loops) where each loop is a representative
        (kind, key): ("M", point) for an arc of M, ("S", slot) for an arc of
        the smoothing; loops are ordered by least point.
        """
        partner = self.match.partner[mid]
        arcs = [(u, v, ("M", u)) for u, v in partner.items() if u < v]
        arcs += [(edges[i], edges[j], ("S", i)) for i, j in _SMOOTHINGS[s]]
        inc: dict[int, list[int]] = defaultdict(list)
        for a, (u, v, _) in enumerate(arcs):
            inc[u].append(a)
            inc[v].append(a)

        def across(a, node):
            u, v, _ = arcs[a]
            return v if node == u else u

        def onward(a, node):
            x, y = inc[node]
            return y if x == a else x

        seen = [False] * len(arcs)
        new: dict[int, int] = {}
        for start, here in inc.items():
            if len(here) != 1 or start in new:
                continue
            a, node = here[0], start
            while True:
                seen[a] = True
                node = across(a, node)
                if len(inc[node]) == 1:
                    break
                a = onward(a, node)
            new[start] = node
            new[node] = start
        loops = []
        for first in range(len(arcs)):
            if seen[first]:
                continue
            node = arcs[first][0]
            members = [node]
            a = first
            while True:
                seen[a] = True
                node = across(a, node)
                members.append(node)
                a = onward(a, node)
                if a == first:
                    break
            loops.append((min(members), arcs[first][2]))
        loops.sort()
        return new, [tag for _, tag in loops]

    def add_crossing(self, edges: tuple[int, int, int, int], prune=None) -> None:
        """Tensor with one crossing (0-smoothing -> 1-smoothing) and reduce.

        ``prune(h)`` says whether degree h can still matter; generators for
        which it is false are dropped.
        """
        counts = defaultdict(int)
        for e in edges:
            counts[e] += 1
        shared = [e for e in edges if e in self.boundary]
        internal = {e for e, k in counts.items() if k == 2}
        new_boundary = (self.boundary - set(shared)) | {
            e for e, k in counts.items() if k == 1 and e not in self.boundary}

        glued = {}  # (old gen, s) -> (new matching id, loops)
        new_ids = {}  # (old gen, s, x) -> new gen id
        gens, out, inc = {}, {}, {}
        for g, (h, q, mid) in self.gens.items():
            for s in (0, 1):
                if prune is not None and not prune(h + s):
                    continue
                partner, loops = self._glue(mid, edges, s)
                nmid = self.match.intern(partner)
                glued[(g, s)] = (nmid, loops)
                nl = len(loops)
                for x in range(1 << nl):
                    gid = self._next
                    self._next += 1
                    gens[gid] = (h + s, q + s + nl - 2 * bin(x).count("1"), nmid)
                    out[gid] = {}
                    inc[gid] = set()
                    new_ids[(g, s, x)] = gid

        def add(src, tgt, mask, val):
            row = out[src].setdefault(tgt, {})
            v = row.get(mask, 0) + val
            if v:
                row[mask] = v
            else:
                row.pop(mask, None)
                if not row:
                    del out[src][tgt]
                    inc[tgt].discard(src)
                    return
            inc[tgt].add(src)

        # old differential, identity on the new crossing
        for g, targets in self.out.items():
            mid = self.gens[g][2]
            for g2, morph in targets.items():
                mid2 = self.gens[g2][2]
                for s in (0, 1):
                    if (g, s) not in glued or (g2, s) not in glued:
                        continue
                    surf, n_open = self._extend_surface(mid, mid2, edges, s, shared, internal,
                                                        glued[(g, s)], glued[(g2, s)])
                    loops_in = len(glued[(g, s)][1])
                    for x in range(1 << loops_in):
                        src = new_ids[(g, s, x)]
                        for mask, c in morph.items():
                            for omask, v in surf.evaluate(mask, x).items():
                                y = omask >> n_open
                                add(src, new_ids[(g2, s, y)], omask & ((1 << n_open) - 1), c * v)
        # the saddle on the new crossing
        for g, (h, q, mid) in self.gens.items():
            if (g, 0) not in glued or (g, 1) not in glued:
                continue
            surf, n_open = self._saddle_surface(mid, edges, shared, internal,
                                                glued[(g, 0)], glued[(g, 1)])
            sign = -1 if h % 2 else 1
            for x in range(1 << len(glued[(g, 0)][1])):
                src = new_ids[(g, 0, x)]
                for omask, v in surf.evaluate(0, x).items():
                    y = omask >> n_open
                    add(src, new_ids[(g, 1, y)], omask & ((1 << n_open) - 1), sign * v)

        self.gens, self.out, self.inc = gens, out, inc
        self.boundary = new_boundary
        self.peak = max(self.peak, len(gens))
        self.reduce()

    def _extend_surface(self, mid, mid2, edges, s, shared, internal, src_glue, tgt_glue):
        """Surface for (cobordism mid -> mid2) beside the identity on smoothing s."""
        key = ("ext", mid, mid2, edges, s)
        hit = self._surface_cache.get(key)
        if hit is not None:
            return hit
        cyc, nc = self.match.cycles(mid, mid2)
        arcs = _SMOOTHINGS[s]
        strip_of_slot = {}
        for k, (i, j) in enumerate(arcs):
            strip_of_slot[i] = nc + k
            strip_of_slot[j] = nc + k
        gluings = []
        for e in shared:
            i = edges.index(e)
            gluings.append((cyc[e], strip_of_slot[i]))
        for e in internal:
            i = edges.index(e)
            j = edges.index(e, i + 1)
            gluings.append((strip_of_slot[i], strip_of_slot[j]))

        def piece(tag):
            kind, key_ = tag
            return cyc[key_] if kind == "M" else strip_of_slot[key_]

        caps = [piece(t) for t in src_glue[1]]
        a, a2 = src_glue[0], tgt_glue[0]
        ocyc, no = self.match.cycles(a, a2)
        rep = {}
        for p in sorted(ocyc):
            rep.setdefault(ocyc[p], p)
        outputs = []
        for k in range(no):
            p = rep[k]
            outputs.append(cyc[p] if p in cyc else strip_of_slot[edges.index(p)])
        outputs += [piece(t) for t in tgt_glue[1]]
        hit = (_Surface(nc + 2, gluings, caps, outputs), no)
        self._surface_cache[key] = hit
        return hit

    def _saddle_surface(self, mid, edges, shared, internal, glue0, glue1):
        key = ("saddle", mid, edges)
        hit = self._surface_cache.get(key)
        if hit is not None:
            return hit
        partner = self.match.partner[mid]
        strip = {}
        n = 0
        for u in sorted(partner):
            if u not in strip:
                strip[u] = strip[partner[u]] = n
                n += 1
        saddle = n
        gluings = [(strip[e], saddle) for e in shared]
        gluings += [(saddle, saddle) for _ in internal]

        def piece(tag):
            kind, key_ = tag
            return strip[key_] if kind == "M" else saddle

        caps = [piece(t) for t in glue0[1]]
        ocyc, no = self.match.cycles(glue0[0], glue1[0])
        rep = {}
        for p in sorted(ocyc):
            rep.setdefault(ocyc[p], p)
        outputs = [strip[rep[k]] if rep[k] in strip else saddle for k in range(no)]
        outputs += [piece(t) for t in glue1[1]]
        hit = (_Surface(n + 1, gluings, caps, outputs), no)
        self._surface_cache[key] = hit
        return hit

    # -- Gaussian elimination ------------------------------------------------

    def reduce(self) -> None:
        work = [(g, t) for g, row in self.out.items() for t in row]
        while work:
            g1, g2 = work.pop()
            row = self.out.get(g1)
            if row is None or g2 not in row:
                continue
            morph = row[g2]
            h1, q1, m1 = self.gens[g1]
            h2, q2, m2 = self.gens[g2]
            if m1 != m2 or q1 != q2 or len(morph) != 1 or 0 not in morph:
                continue
            lam = morph[0]
            factor = -lam if lam in (1, -1) else Fraction(-1, 1) / lam
            ins = [(b, self.out[b][g2]) for b in self.inc[g2] if b != g1]
            outs = [(c, m) for c, m in row.items() if c != g2]
            for b, sb in ins:
                mb = self.gens[b][2]
                brow = self.out[b]
                for c, sc in outs:
                    comp = self.match.compose(sb, mb, m1, sc, self.gens[c][2])
                    if not comp:
                        continue
                    cur = brow.get(c)
                    if cur is None:
                        cur = brow[c] = {}
                        self.inc[c].add(b)
                    for mask, v in comp.items():
                        x = cur.get(mask, 0) + factor * v
                        if x:
                            cur[mask] = x
                        else:
                            cur.pop(mask, None)
                    if not cur:
                        del brow[c]
                        self.inc[c].discard(b)
                    else:
                        work.append((b, c))
            for g in (g1, g2):
                for c in self.out.pop(g):
                    self.inc[c].discard(g)
                for b in self.inc.pop(g):
                    self.out[b].pop(g, None)
                del self.gens[g]
            self.eliminated += 1


def _crossing_order(d: PlanarDiagram) -> list[int]:
    """Greedy order keeping the tangle boundary small."""
    n = len(d.crossings)
    if n == 0:
        return []
    done = [False] * n
    order = [0]
    done[0] = True
    boundary = defaultdict(int)
    for e in d.crossings[0].edges:
        boundary[e] += 1
    for _ in range(n - 1):
        best = None
        for c in range(n):
            if done[c]:
                continue
            edges = d.crossings[c].edges
            shared = sum(1 for e in edges if boundary.get(e, 0) % 2 == 1)
            key = (-shared, 4 - 2 * shared, c)
            if best is None or key < best[0]:
                best = (key, c)
        c = best[1]
        done[c] = True
        order.append(c)
        for e in d.crossings[c].edges:
            boundary[e] += 1
    return order


class TangleStats:
    """Instrumentation filled in by tangle_homology."""

    def __init__(self):
        self.peak_generators = 0
        self.final_degrees: set[int] = set()
        self.order: list[int] = []
        # (lowest degree, highest degree, crossings still to add) after each step
        self.step_degrees: list[tuple] = []


def tangle_homology(d: PlanarDiagram, window: tuple[int, int] | None = None,
                    stats: TangleStats | None = None,
                    budget: int | None = None) -> dict[tuple[int, int], int]:
    """dim H^{i,q} (unnormalized) for i in the window, by scanning.

    Partial complexes keep only degrees that can still reach the window
    (h <= hi + 1 and h + remaining crossings >= lo - 1), so the final
    complex lives in degrees lo-1..hi+1. ``budget`` caps the number of live
    generators.
    """
    n = len(d.crossings)
    lo, hi = (0, n) if window is None else window
    order = _crossing_order(d)
    tc = TangleComplex()
    for step, c in enumerate(order):
        remaining = n - step - 1

        def keep(h, remaining=remaining):
            return h <= hi + 1 and h + remaining >= lo - 1

        tc.add_crossing(d.crossings[c].edges, prune=keep)
        if budget is not None and tc.peak > budget:
            raise BudgetExceeded(f"scanning complex reached {tc.peak} generators (budget {budget})")
        if stats is not None:
            stats.step_degrees.append((min((g[0] for g in tc.gens.values()), default=None),
                                       max((g[0] for g in tc.gens.values()), default=None),
                                       remaining))
        if len(tc._surface_cache) > 200_000:
            tc._surface_cache.clear()
    if tc.boundary:
        raise AssertionError("tangle boundary not closed after all crossings")
    if any(tc.out.values()):
        raise AssertionError("differential survived elimination on a closed diagram")
    result: dict[tuple[int, int], int] = defaultdict(int)
    for h, q, _ in tc.gens.values():
        if lo <= h <= hi:
            shifts = [0]
            for _ in range(d.loops):
                shifts = [s + e for s in shifts for e in (1, -1)]
            for s in shifts:
                result[(h, q + s)] += 1
    if stats is not None:
        stats.peak_generators = tc.peak
        stats.final_degrees = {h for h, _, _ in tc.gens.values()}
        stats.order = order
    return dict(result)
