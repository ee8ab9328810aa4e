"""Combinatorial link diagrams.

A diagram is stored as a PD code: every crossing lists its four incident
edge labels counterclockwise, starting at the incoming under-strand, plus
the crossing sign. Crossingless unknotted components are kept as a count
of free loops.

Conventions used throughout the package:

* orientation at a crossing ``(a, b, c, d)``: ``a`` enters and ``c`` leaves
  along the under-strand; the over-strand runs ``d -> b`` for a positive
  crossing and ``b -> d`` for a negative one;
* the 0-smoothing joins ``a-b`` and ``c-d``, the 1-smoothing joins ``a-d``
  and ``b-c``. At a positive crossing the 0-smoothing is the oriented one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np


class DiagramError(ValueError):
    """Raised for malformed diagrams or invalid diagram operations."""


# ---------------------------------------------------------------------------
# braid words


@dataclass(frozen=True)
class BraidWord:
    """A word in the Artin generators of the braid group on ``strands`` strands.

    Letter ``w`` stands for ``sigma_|w|`` with the sign of ``w``.
    """

    strands: int
    letters: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(int(w) for w in self.letters))
        if self.strands < 1:
            raise DiagramError(f"braid needs at least one strand, got {self.strands}")
        for w in self.letters:
            if w == 0 or abs(w) >= self.strands:
                raise DiagramError(f"letter {w} invalid on {self.strands} strands")

    @classmethod
    def parse(cls, text: str, strands: int | None = None) -> "BraidWord":
        """Parse whitespace-separated signed integers, e.g. ``"1 1 -2"``."""
        try:
            letters = tuple(int(tok) for tok in text.replace(",", " ").split())
        except ValueError as exc:
            raise DiagramError(f"cannot parse braid word {text!r}") from exc
        if strands is None:
            strands = max((abs(w) for w in letters), default=0) + 1
        return cls(strands, letters)

    def mirror(self) -> "BraidWord":
        return BraidWord(self.strands, tuple(-w for w in self.letters))

    def permutation(self) -> list[int]:
        """Where the strand starting at each position ends up."""
        where = list(range(self.strands))  # position -> starting strand
        for w in self.letters:
            i = abs(w) - 1
            where[i], where[i + 1] = where[i + 1], where[i]
        end = [0] * self.strands
        for pos, strand in enumerate(where):
            end[strand] = pos
        return end

    def closure_components(self) -> int:
        perm = self.permutation()
        seen = [False] * self.strands
        count = 0
        for s in range(self.strands):
            if not seen[s]:
                count += 1
                while not seen[s]:
                    seen[s] = True
                    s = perm[s]
        return count

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return " ".join(str(w) for w in self.letters)


def torus_braid(p: int, q: int) -> BraidWord:
    """The word ``(sigma_1 ... sigma_{p-1})^q``."""
    if p < 1 or q < 0:
        raise DiagramError(f"torus braid needs p >= 1 and q >= 0, got ({p}, {q})")
    return BraidWord(p, tuple(range(1, p)) * q)


# ---------------------------------------------------------------------------
# planar diagrams


@dataclass(frozen=True)
class Crossing:
    edges: tuple[int, int, int, int]
    sign: int

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(int(e) for e in self.edges))
        if len(self.edges) != 4:
            raise DiagramError(f"crossing needs four edges, got {self.edges}")
        if self.sign not in (1, -1):
            raise DiagramError(f"crossing sign must be +1 or -1, got {self.sign}")

    def incoming(self, slot: int) -> bool:
        if slot == 0:
            return True
        if slot == 2:
            return False
        return (slot == 3) == (self.sign > 0)

    def smoothing_pairs(self, choice: int) -> tuple[tuple[int, int], tuple[int, int]]:
        a, b, c, d = self.edges
        if choice == 0:
            return (a, b), (c, d)
        return (a, d), (b, c)


class _UnionFind:
    def __init__(self, items: Iterable[int] = ()):
        self.parent = {x: x for x in items}

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            if rx < ry:
                self.parent[ry] = rx
            else:
                self.parent[rx] = ry


@dataclass(frozen=True)
class LinkMetadata:
    components: int
    linking: np.ndarray = field(compare=False)
    writhe: int
    n_plus: int
    n_minus: int
    seifert_circles: int

    @property
    def crossings(self) -> int:
        return self.n_plus + self.n_minus

    def linking_matrix(self) -> list[list[int]]:
        return self.linking.astype(int).tolist()

    def as_dict(self) -> dict:
        return {
            "components": self.components,
            "linking": self.linking_matrix(),
            "writhe": self.writhe,
            "n_plus": self.n_plus,
            "n_minus": self.n_minus,
            "seifert_circles": self.seifert_circles,
        }


@dataclass(frozen=True)
class PlanarDiagram:
    """An oriented link diagram in PD form; crossing order is list order."""

    crossings: tuple[Crossing, ...] = ()
    loops: int = 0

    def __post_init__(self):
        object.__setattr__(self, "crossings", tuple(self.crossings))
        if self.loops < 0:
            raise DiagramError("negative loop count")

    # -- basic counts -------------------------------------------------------

    def __len__(self) -> int:
        return len(self.crossings)

    @property
    def n_plus(self) -> int:
        return sum(1 for x in self.crossings if x.sign > 0)

    @property
    def n_minus(self) -> int:
        return sum(1 for x in self.crossings if x.sign < 0)

    @property
    def writhe(self) -> int:
        return self.n_plus - self.n_minus

    @cached_property
    def edges(self) -> tuple[int, ...]:
        return tuple(sorted({e for x in self.crossings for e in x.edges}))

    @cached_property
    def occurrences(self) -> dict[int, list[tuple[int, int]]]:
        """Edge label -> the two (crossing, slot) places where it ends."""
        occ: dict[int, list[tuple[int, int]]] = {}
        for c, x in enumerate(self.crossings):
            for s, e in enumerate(x.edges):
                occ.setdefault(e, []).append((c, s))
        return occ

    @cached_property
    def edge_components(self) -> dict[int, int]:
        """Component label of every edge; components numbered by first appearance."""
        uf = _UnionFind(self.edges)
        for x in self.crossings:
            a, b, c, d = x.edges
            uf.union(a, c)
            uf.union(b, d)
        labels: dict[int, int] = {}
        out = {}
        for x in self.crossings:
            for e in x.edges:
                root = uf.find(e)
                if root not in labels:
                    labels[root] = len(labels)
                out[e] = labels[root]
        return out

    @property
    def components(self) -> int:
        return len(set(self.edge_components.values())) + self.loops

    def is_positive(self) -> bool:
        return all(x.sign > 0 for x in self.crossings)

    # -- validation ---------------------------------------------------------

    def validate(self) -> None:
        """Check edge pairing, orientation consistency and planarity."""
        for e, occ in self.occurrences.items():
            if len(occ) != 2:
                raise DiagramError(f"edge {e} appears {len(occ)} times, expected 2")
            ins = [self.crossings[c].incoming(s) for c, s in occ]
            if sorted(ins) != [False, True]:
                raise DiagramError(
                    f"edge {e} is not oriented consistently (check crossing signs)"
                )
        if self.crossings:
            faces = _count_faces(self)
            pieces = len(set(_crossing_graph_pieces(self)))
            if len(self.crossings) - 2 * len(self.crossings) + faces != 2 * pieces:
                raise DiagramError("PD code is not planar")

    # -- serialization ------------------------------------------------------

    def to_pd(self) -> list[dict]:
        return [{"edges": list(x.edges), "sign": x.sign} for x in self.crossings]

    def to_json(self) -> str:
        return json.dumps({"crossings": self.to_pd(), "loops": self.loops})

    @classmethod
    def from_pd(cls, data) -> "PlanarDiagram":
        """Build from a list of ``{"edges": [a,b,c,d], "sign": 1|-1}`` records.

        A dict with keys ``crossings`` and optional ``loops`` is accepted too.
        """
        loops = 0
        if isinstance(data, dict):
            loops = int(data.get("loops", 0))
            data = data["crossings"]
        crossings = []
        for rec in data:
            try:
                crossings.append(Crossing(tuple(rec["edges"]), int(rec["sign"])))
            except (KeyError, TypeError) as exc:
                raise DiagramError(f"bad crossing record {rec!r}") from exc
        d = cls(tuple(crossings), loops)
        d.validate()
        return canonical(d)

    def canonical_key(self) -> str:
        return canonical(self).to_json()


def _count_faces(d: PlanarDiagram) -> int:
    """Faces of the 4-valent crossing graph using the counterclockwise rotation."""
    occ = d.occurrences
    seen = set()
    faces = 0
    for c in range(len(d.crossings)):
        for s in range(4):
            if (c, s) in seen:
                continue
            faces += 1
            cur = (c, s)
            while cur not in seen:
                seen.add(cur)
                e = d.crossings[cur[0]].edges[cur[1]]
                a, b = occ[e]
                other = b if a == cur else a
                cur = (other[0], (other[1] - 1) % 4)
    return faces


def _crossing_graph_pieces(d: PlanarDiagram) -> list[int]:
    uf = _UnionFind(range(len(d.crossings)))
    for occ in d.occurrences.values():
        uf.union(occ[0][0], occ[1][0])
    return [uf.find(c) for c in range(len(d.crossings))]


def canonical(d: PlanarDiagram) -> PlanarDiagram:
    """Relabel edges 0, 1, ... in order of first appearance."""
    relabel: dict[int, int] = {}
    crossings = []
    for x in d.crossings:
        new = []
        for e in x.edges:
            if e not in relabel:
                relabel[e] = len(relabel)
            new.append(relabel[e])
        crossings.append(Crossing(tuple(new), x.sign))
    return PlanarDiagram(tuple(crossings), d.loops)


def _orient(
    raw: Sequence[tuple[int, int, int, int]],
    loops: int,
    prefer_in: Callable[[int, int], bool] | None = None,
) -> PlanarDiagram:
    """Orient an unoriented PD.

    ``raw[c]`` lists the edges counterclockwise starting at *either* end of
    the under-strand. Each component is traversed from its first
    (crossing, slot) occurrence; ``prefer_in(c, s)`` says whether that slot
    should be incoming (default: yes).
    """
    occ: dict[int, list[tuple[int, int]]] = {}
    for c, edges in enumerate(raw):
        for s, e in enumerate(edges):
            occ.setdefault(e, []).append((c, s))
    for e, places in occ.items():
        if len(places) != 2:
            raise DiagramError(f"edge {e} appears {len(places)} times, expected 2")

    incoming: dict[tuple[int, int], bool] = {}
    for c in range(len(raw)):
        for s in range(4):
            if (c, s) in incoming:
                continue
            want_in = True if prefer_in is None else prefer_in(c, s)
            start = (c, s) if want_in else (c, (s + 2) % 4)
            cur = start
            while True:
                incoming[cur] = True
                out = (cur[0], (cur[1] + 2) % 4)
                incoming[out] = False
                e = raw[out[0]][out[1]]
                a, b = occ[e]
                cur = b if a == out else a
                if cur == start:
                    break

    crossings = []
    for c, edges in enumerate(raw):
        if not incoming[(c, 0)]:
            edges = edges[2:] + edges[:2]
            sign = 1 if incoming[(c, 1)] else -1
        else:
            sign = 1 if incoming[(c, 3)] else -1
        crossings.append(Crossing(tuple(edges), sign))
    return canonical(PlanarDiagram(tuple(crossings), loops))


# ---------------------------------------------------------------------------
# constructions


class _BraidBuilder:
    """Stack braid letters upward on a row of strand positions."""

    def __init__(self, strands: int):
        self.start = list(range(strands))
        self.cur = list(range(strands))
        self.next_label = strands
        self.raw: list[tuple[int, int, int, int]] = []

    def fresh(self) -> int:
        self.next_label += 1
        return self.next_label - 1

    def letter(self, w: int) -> None:
        i = abs(w) - 1
        in_l, in_r = self.cur[i], self.cur[i + 1]
        out_l, out_r = self.fresh(), self.fresh()
        # slots listed counterclockwise from an under-strand end:
        # positive: under runs SE->NW, over SW->NE.
        if w > 0:
            self.raw.append((in_r, out_r, out_l, in_l))
        else:
            self.raw.append((in_l, in_r, out_r, out_l))
        self.cur[i], self.cur[i + 1] = out_l, out_r

    def word(self, letters: Iterable[int]) -> None:
        for w in letters:
            self.letter(w)

    def close(self, skip: Iterable[int] = ()) -> tuple[list, int]:
        """Join the top of each position to its bottom; return (raw, loops)."""
        skip = set(skip)
        rename = {}
        loops = 0
        for p in range(len(self.cur)):
            if p in skip:
                continue
            if self.cur[p] == self.start[p]:
                loops += 1
            else:
                rename[self.cur[p]] = self.start[p]
        raw = [tuple(rename.get(e, e) for e in edges) for edges in self.raw]
        return raw, loops


def braid_closure(b: BraidWord) -> PlanarDiagram:
    """Closure of a braid, strands oriented along the word.

    Positive letters give positive crossings; crossings are listed in word
    order.
    """
    builder = _BraidBuilder(b.strands)
    builder.word(b.letters)
    raw, loops = builder.close()
    # every raw tuple starts at the incoming under end
    return _orient(raw, loops, lambda c, s: s == 0)


def _cabled_letters(w: int, p: int) -> list[int]:
    """Letters of the p-parallel of one crossing (p^2 crossings, same sign)."""
    i = abs(w) - 1
    base = i * p  # first 0-based position of the left block
    sign = 1 if w > 0 else -1
    out = []
    # move the left block across the right block, rightmost strand first
    for t in range(p):
        start = base + p - 1 - t  # 0-based position of the moving strand
        for g in range(start, start + p):
            out.append(sign * (g + 1))
    return out


def cable_braid(k: BraidWord, p: int, q: int) -> BraidWord:
    """Braid word of D(p, q + p*f): p-parallel of ``k`` followed by D_{p,q}."""
    letters: list[int] = []
    for w in k.letters:
        letters.extend(_cabled_letters(w, p))
    letters.extend(torus_braid(p, q).letters)
    return BraidWord(k.strands * p, tuple(letters))


def _require_knot(k: BraidWord) -> None:
    if k.closure_components() != 1:
        raise DiagramError(f"closure of braid [{k}] on {k.strands} strands is not a knot")


def cable_diagram(k: BraidWord, p: int, q: int) -> PlanarDiagram:
    """Diagram of the (p, q + p*f)-cable of the closure of ``k`` (f = writhe).

    All components run parallel to the companion.
    """
    _require_knot(k)
    if p < 2 or q < 0:
        raise DiagramError(f"cable needs p >= 2 and q >= 0, got p={p}, q={q}")
    return braid_closure(cable_braid(k, p, q))


def whitehead_double(k: BraidWord, q: int) -> PlanarDiagram:
    """Twisted Whitehead double L(D, q) of the closure ``D`` of ``k``.

    For q >= 0: the 2-parallel of D, q twist crossings and a two-crossing
    clasp (4l + q + 2 crossings). For q < 0 this is the mirror of the
    (1 - q)-double of the mirrored companion.
    """
    _require_knot(k)
    if q < 0:
        return mirror(whitehead_double(k.mirror(), -q + 1))
    builder = _BraidBuilder(2 * k.strands)
    for w in k.letters:
        builder.word(_cabled_letters(w, 2))
    builder.word([1] * q)
    # The clasp sits on top of positions 0 and 1: an arc A joins the two
    # incoming ends and hooks an arc B joining the two closing arcs.
    a1, a3 = builder.cur[0], builder.cur[1]
    b1, b3 = builder.start[0], builder.start[1]
    a2, b2 = builder.fresh(), builder.fresh()
    raw, loops = builder.close(skip=(0, 1))
    raw.append((a2, b1, a1, b2))  # left clasp crossing, B over
    raw.append((b3, a2, b2, a3))  # right clasp crossing, A over
    return _orient(raw, loops)


def mirror(d: PlanarDiagram) -> PlanarDiagram:
    """Swap over and under at every crossing (all signs flip)."""
    crossings = []
    for x in d.crossings:
        a, b, c, e = x.edges
        if x.sign > 0:  # over-strand enters at d
            crossings.append(Crossing((e, a, b, c), -1))
        else:  # over-strand enters at b
            crossings.append(Crossing((b, c, e, a), 1))
    return PlanarDiagram(tuple(crossings), d.loops)


def disjoint_union_unknot(d: PlanarDiagram) -> PlanarDiagram:
    return PlanarDiagram(d.crossings, d.loops + 1)


def smooth(d: PlanarDiagram, c: int, choice: int) -> PlanarDiagram:
    """Replace crossing ``c`` by its 0- or 1-smoothing.

    The surviving crossings keep their order. Each component of the result
    keeps the old direction at its first surviving crossing slot; where the
    smoothing is not orientation-compatible the rest of that component is
    re-oriented to match.
    """
    if not 0 <= c < len(d.crossings):
        raise DiagramError(f"crossing {c} out of range for {len(d.crossings)} crossings")
    if choice not in (0, 1):
        raise DiagramError(f"smoothing choice must be 0 or 1, got {choice}")
    uf = _UnionFind(d.edges)
    removed = d.crossings[c]
    for u, v in removed.smoothing_pairs(choice):
        uf.union(u, v)
    keep = [x for i, x in enumerate(d.crossings) if i != c]
    raw = [tuple(uf.find(e) for e in x.edges) for x in keep]
    present = {e for edges in raw for e in edges}
    new_loops = len({uf.find(e) for e in removed.edges} - present)
    return _orient(raw, d.loops + new_loops, lambda i, s: keep[i].incoming(s))


# ---------------------------------------------------------------------------
# measurements


def oriented_state(d: PlanarDiagram) -> int:
    """Bitmask of the oriented resolution: bit c set iff crossing c is negative."""
    mask = 0
    for c, x in enumerate(d.crossings):
        if x.sign < 0:
            mask |= 1 << c
    return mask


def count_circles(d: PlanarDiagram, state: int) -> int:
    uf = _UnionFind(d.edges)
    for c, x in enumerate(d.crossings):
        for u, v in x.smoothing_pairs((state >> c) & 1):
            uf.union(u, v)
    return len({uf.find(e) for e in d.edges}) + d.loops


def metadata(d: PlanarDiagram) -> LinkMetadata:
    comp = d.edge_components
    ncomp = d.components
    lk2 = np.zeros((ncomp, ncomp), dtype=np.int64)
    for x in d.crossings:
        u, v = comp[x.edges[0]], comp[x.edges[1]]
        if u != v:
            lk2[u, v] += x.sign
            lk2[v, u] += x.sign
    return LinkMetadata(
        components=ncomp,
        linking=lk2 // 2,
        writhe=d.writhe,
        n_plus=d.n_plus,
        n_minus=d.n_minus,
        seifert_circles=count_circles(d, oriented_state(d)),
    )
