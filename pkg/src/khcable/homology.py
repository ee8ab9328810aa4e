"""Betti tables of Khovanov homology, the Jones polynomial, and thickness."""

from __future__ import annotations

import json
import multiprocessing
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .cube import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    ChainComplexSlice,
    WindowError,
    normalize_indices,
    window_generator_count,
)
from .diagrams import LinkMetadata, PlanarDiagram
from .exactla import certified_rank, exact_rank
from .tangle import tangle_homology

ENGINES = ("auto", "cube", "tangle")
# auto uses the cube below this many generators in the window, scanning above
CUBE_AUTO_LIMIT = 300_000


class IncompleteTableError(ValueError):
    """An operation that needs every degree was given a windowed table."""


@dataclass
class BettiTable:
    """Nonzero dimensions of KH^{i,j} (or of unnormalized H^{i,q}).

    ``window`` is None for a complete table, otherwise the inclusive range
    of homological degrees covered, in the same indexing as the entries.
    """

    entries: dict[tuple[int, int], int] = field(default_factory=dict)
    normalized: bool = True
    window: tuple[int, int] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (i, j), v in self.entries.items():
            if v < 0:
                raise ValueError(f"negative dimension at ({i}, {j})")
            if v:
                clean[(int(i), int(j))] = int(v)
        self.entries = clean
        if self.window is not None:
            self.window = (int(self.window[0]), int(self.window[1]))

    @property
    def complete(self) -> bool:
        return self.window is None

    def __getitem__(self, key: tuple[int, int]) -> int:
        return self.entries.get(key, 0)

    def __eq__(self, other):
        if not isinstance(other, BettiTable):
            return NotImplemented
        return (self.entries, self.normalized, self.window) == (
            other.entries, other.normalized, other.window)

    def covers(self, i: int) -> bool:
        return self.window is None or self.window[0] <= i <= self.window[1]

    def degrees(self) -> list[int]:
        return sorted({i for i, _ in self.entries})

    def degree_dim(self, i: int) -> int:
        return sum(v for (a, _), v in self.entries.items() if a == i)

    def support(self, i: int) -> dict[int, int]:
        """j -> dim KH^{i,j} for one homological degree."""
        return {j: v for (a, j), v in sorted(self.entries.items()) if a == i}

    def max_degree(self) -> int | None:
        return max((i for i, _ in self.entries), default=None)

    def total(self) -> int:
        return sum(self.entries.values())

    def shifted(self, di: int, dj: int) -> "BettiTable":
        window = None if self.window is None else (self.window[0] + di, self.window[1] + di)
        return BettiTable({(i + di, j + dj): v for (i, j), v in self.entries.items()},
                          self.normalized, window, dict(self.meta))

    def restrict(self, lo: int, hi: int) -> "BettiTable":
        return BettiTable({k: v for k, v in self.entries.items() if lo <= k[0] <= hi},
                          self.normalized, (lo, hi), dict(self.meta))

    def check_knot_survivors(self) -> bool:
        """For a knot, degree 0 carries at least the two Lee survivors."""
        return not self.covers(0) or self.degree_dim(0) >= 2

    def to_dict(self) -> dict:
        return {
            "normalized": self.normalized,
            "window": None if self.window is None else list(self.window),
            "entries": [{"i": i, "j": j, "dim": v} for (i, j), v in sorted(self.entries.items())],
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: Mapping) -> "BettiTable":
        return cls(
            {(e["i"], e["j"]): e["dim"] for e in data["entries"]},
            bool(data.get("normalized", True)),
            None if data.get("window") is None else tuple(data["window"]),
            dict(data.get("meta") or {}),
        )

    @classmethod
    def from_json(cls, text: str) -> "BettiTable":
        return cls.from_dict(json.loads(text))

    def format(self) -> str:
        """Plain text grid: one row per j (descending), one column per i."""
        if not self.entries:
            return "(zero)"
        lo, hi = (self.window if self.window else (min(self.degrees()), max(self.degrees())))
        js = sorted({j for _, j in self.entries}, reverse=True)
        width = max(3, max(len(str(v)) for v in self.entries.values()) + 1)
        head = "j\\i".rjust(5) + "".join(str(i).rjust(width) for i in range(lo, hi + 1))
        lines = [head]
        for j in js:
            cells = "".join((str(self[i, j]) if self[i, j] else ".").rjust(width)
                            for i in range(lo, hi + 1))
            lines.append(str(j).rjust(5) + cells)
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# computing tables

_shared_slice: ChainComplexSlice | None = None


def _rank_seed(seed: int, i: int, q: int) -> int:
    # deterministic per block, independent of hash randomization
    return (seed * 1_000_003 + i) * 1_000_003 + q


def _ranks(cx: ChainComplexSlice, tasks: list[tuple[int, int]], mode: str, seed: int,
           jobs: int) -> dict[tuple[int, int], int]:
    global _shared_slice
    out = {}
    if jobs > 1 and len(tasks) > 1:
        _shared_slice = cx
        try:
            ctx = multiprocessing.get_context("fork")
            with ctx.Pool(jobs) as pool:
                for key, r in pool.imap_unordered(
                        _block_rank_task, [(i, q, mode, _rank_seed(seed, i, q)) for i, q in tasks]):
                    out[key] = r
        finally:
            _shared_slice = None
        return out
    for i, q in tasks:
        m = cx.differential(i, q)
        out[(i, q)] = exact_rank(m) if mode == "exact" else certified_rank(m, _rank_seed(seed, i, q))
    return out


def _block_rank_task(args):
    i, q, mode, seed = args
    m = _shared_slice.differential(i, q)
    return (i, q), (exact_rank(m) if mode == "exact" else certified_rank(m, seed))


def _homology_of_slice(cx: ChainComplexSlice, mode: str, seed: int, jobs: int) -> dict:
    a, b = cx.window
    tasks = []
    for i in range(a - 1, b + 1):
        if i in cx.groups and i + 1 in cx.groups:
            for q in cx.gradings(i):
                if cx.dim(i + 1, q):
                    tasks.append((i, q))
    ranks = _ranks(cx, tasks, mode, seed, jobs)
    out = {}
    for i in range(a, b + 1):
        for q in cx.gradings(i):
            h = cx.dim(i, q) - ranks.get((i, q), 0) - ranks.get((i - 1, q), 0)
            if h:
                out[(i, q)] = h
    return out


_CACHE: dict[tuple, dict] = {}


def _compute(d: PlanarDiagram, window, mode: str, seed: int, jobs: int,
             budget: int | None, engine: str) -> tuple[dict, str]:
    if mode not in ("modular", "exact"):
        raise ValueError(f"unknown rank mode {mode!r}")
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    n = len(d.crossings)
    win = (0, n) if window is None else (int(window[0]), int(window[1]))
    if not 0 <= win[0] <= win[1] <= n:
        raise WindowError(f"window {window} outside 0..{n}")
    key = (d.canonical_key(), mode, seed)
    full = _CACHE.get(key + ((0, n),))
    if full is not None and engine in ("auto", full[1]):
        return {k: v for k, v in full[0].items() if win[0] <= k[0] <= win[1]}, full[1]
    hit = _CACHE.get(key + (win,))
    if hit is not None and engine in ("auto", hit[1]):
        return dict(hit[0]), hit[1]
    lo, hi = max(win[0] - 1, 0), min(win[1] + 1, n)
    if engine == "auto":
        small = window_generator_count(d, (lo, hi), CUBE_AUTO_LIMIT) <= CUBE_AUTO_LIMIT
        engine = "cube" if small else "tangle"
    if engine == "cube":
        if budget is not None:
            count = window_generator_count(d, (lo, hi), budget)
            if count > budget:
                raise BudgetExceeded(
                    f"window {win} needs more than {budget} generators ({count} counted)")
        result = _homology_of_slice(ChainComplexSlice(d, win), mode, seed, jobs)
    else:
        result = tangle_homology(d, win, budget=budget)
    _CACHE[key + (win,)] = (result, engine)
    return dict(result), engine


def unnormalized_homology(d: PlanarDiagram, window: tuple[int, int] | None = None,
                          mode: str = "modular", seed: int = 0, jobs: int = 1,
                          budget: int | None = DEFAULT_BUDGET,
                          engine: str = "auto") -> dict[tuple[int, int], int]:
    """dim H^{i,q} with unnormalized indices, for i in the window.

    ``engine`` is "cube" (cube of resolutions, ranks per ``mode``),
    "tangle" (crossing-by-crossing scanning with exact elimination) or
    "auto", which takes the cube for small windows.
    """
    return _compute(d, window, mode, seed, jobs, budget, engine)[0]


def betti(d: PlanarDiagram, window: tuple[int, int] | None = None, normalized: bool = True,
          mode: str = "modular", seed: int = 0, jobs: int = 1,
          budget: int | None = DEFAULT_BUDGET, engine: str = "auto") -> BettiTable:
    """Khovanov homology table of a diagram.

    ``window`` is given in unnormalized homological degrees; the table
    covers exactly those degrees (shifted by -n_- when normalized).
    """
    raw, used = _compute(d, window, mode, seed, jobs, budget, engine)
    n = len(d.crossings)
    meta = {"crossings": n, "n_plus": d.n_plus, "n_minus": d.n_minus,
            "components": d.components, "mode": mode, "engine": used}
    win = None if window is None else (int(window[0]), int(window[1]))
    if win == (0, n):
        win = None
    if not normalized:
        return BettiTable(raw, False, win, meta)
    entries = {normalize_indices(i, q, d.n_plus, d.n_minus): v for (i, q), v in raw.items()}
    if win is not None:
        win = (win[0] - d.n_minus, win[1] - d.n_minus)
    return BettiTable(entries, True, win, meta)


# ---------------------------------------------------------------------------
# Laurent polynomials and the Jones polynomial


class LaurentPolynomial:
    """Finite sum of c * t^e with rational exponents and coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping | Iterable = ()):
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        acc: dict[Fraction, Fraction] = {}
        for e, c in items:
            e, c = Fraction(e), Fraction(c)
            acc[e] = acc.get(e, 0) + c
        self.coeffs = {e: c for e, c in acc.items() if c != 0}

    @classmethod
    def monomial(cls, e, c=1) -> "LaurentPolynomial":
        return cls({e: c})

    def __add__(self, other):
        other = _as_poly(other)
        return LaurentPolynomial(list(self.coeffs.items()) + list(other.coeffs.items()))

    __radd__ = __add__

    def __neg__(self):
        return LaurentPolynomial({e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __mul__(self, other):
        other = _as_poly(other)
        return LaurentPolynomial(
            (e1 + e2, c1 * c2) for e1, c1 in self.coeffs.items() for e2, c2 in other.coeffs.items())

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            if len(self.coeffs) != 1:
                raise ValueError("only monomials can be inverted")
            ((e, c),) = self.coeffs.items()
            return LaurentPolynomial({-e * -k: Fraction(1) / c ** -k})
        out = LaurentPolynomial({0: 1})
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = _as_poly(other)
        if not isinstance(other, LaurentPolynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def substitute_power(self, scale) -> "LaurentPolynomial":
        """t^e -> t^(scale*e)."""
        return LaurentPolynomial((e * Fraction(scale), c) for e, c in self.coeffs.items())

    def __call__(self, t):
        return sum(c * t ** e for e, c in self.coeffs.items())

    def terms(self) -> list[tuple[Fraction, Fraction]]:
        return sorted(self.coeffs.items())

    def __repr__(self):
        return f"LaurentPolynomial({self})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for e, c in self.terms():
            mag = abs(c)
            sign = "-" if c < 0 else "+"
            if e == 0:
                body = str(mag)
            else:
                exp = "" if e == 1 else f"^{e}" if e.denominator == 1 and e > 0 else f"^({e})"
                body = ("" if mag == 1 else f"{mag}*") + "t" + exp
            parts.append((sign, body))
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text


def _as_poly(x) -> LaurentPolynomial:
    if isinstance(x, LaurentPolynomial):
        return x
    return LaurentPolynomial({0: x})


def graded_euler_characteristic(t: BettiTable) -> LaurentPolynomial:
    """Sum of (-1)^i q^j dim KH^{i,j}, as a polynomial in q."""
    return LaurentPolynomial(((j, (-1) ** (i % 2) * v) for (i, j), v in t.entries.items()))


def jones_from_table(t: BettiTable) -> LaurentPolynomial:
    if not t.complete:
        raise IncompleteTableError("the Jones polynomial needs a complete table")
    chi = graded_euler_characteristic(t)
    quotient = _divide_by_q_plus_qinv(chi)
    # q = -t^(1/2)
    return LaurentPolynomial(
        (e / 2, c * (-1 if e.numerator % 2 else 1)) for e, c in quotient.coeffs.items())


def _divide_by_q_plus_qinv(p: LaurentPolynomial) -> LaurentPolynomial:
    # synthetic division by q + q^-1, from the top exponent down
    rem = dict(p.coeffs)
    out = {}
    while rem:
        e = max(rem)
        c = rem.pop(e)
        out[e - 1] = c
        v = rem.get(e - 2, 0) - c
        if v:
            rem[e - 2] = v
        else:
            rem.pop(e - 2, None)
        if rem and max(rem) < min(p.coeffs) - 2:
            raise ValueError("Euler characteristic not divisible by q + 1/q")
    check = LaurentPolynomial(out) * LaurentPolynomial({1: 1, -1: 1})
    if check != p:
        raise ValueError("Euler characteristic not divisible by q + 1/q")
    return LaurentPolynomial(out)


def jones(d: PlanarDiagram, **kwargs) -> LaurentPolynomial:
    """Jones polynomial in t, read off the graded Euler characteristic."""
    if kwargs.get("window") is not None:
        raise IncompleteTableError("the Jones polynomial needs a complete table")
    return jones_from_table(betti(d, **kwargs))


# ---------------------------------------------------------------------------
# thickness and positive-diagram predictions


def thickness(t: BettiTable) -> tuple[int, int]:
    """(homological width, lower bound on the dealternating number)."""
    if not t.complete:
        raise IncompleteTableError("thickness needs a complete table")
    if not t.entries:
        raise ValueError("empty table")
    diagonals = [j - 2 * i for i, j in t.entries]
    hw = (max(diagonals) - min(diagonals)) // 2 + 1
    return hw, max(0, hw - 2)


def kh0_positive_prediction(meta: LinkMetadata) -> set[tuple[int, int]]:
    """Predicted support of KH^0 for a positive diagram: j = c - s_0 + 1 +- 1."""
    if meta.n_minus != 0:
        raise ValueError("prediction applies to positive diagrams only")
    centre = meta.crossings - meta.seifert_circles + 1
    return {(0, centre - 1), (0, centre + 1)}
