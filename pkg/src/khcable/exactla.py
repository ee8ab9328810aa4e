"""Exact sparse linear algebra over Q.

Ranks are computed modulo two random word-size primes and only trusted
when both agree; otherwise (or on request) exact fraction-free elimination
decides. Kernels and image membership are always exact.

Vectors are the columns of a matrix, stored as dicts.
"""

from __future__ import annotations

import random
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

import numpy as np
from sympy import isprime

Vector = dict  # coordinate -> nonzero value


class DimensionError(ValueError):
    pass


class SparseExactMatrix:
    """Sparse rational matrix stored column-wise.

    Entries are ints or Fractions; zeros are never stored and each
    coordinate appears at most once.
    """

    __slots__ = ("nrows", "ncols", "_cols", "_mod_cache", "_echelon")

    def __init__(self, nrows: int, ncols: int, columns: Sequence[Vector] | None = None):
        self.nrows = nrows
        self.ncols = ncols
        if columns is None:
            columns = [{} for _ in range(ncols)]
        if len(columns) != ncols:
            raise DimensionError(f"expected {ncols} columns, got {len(columns)}")
        self._cols = [{r: v for r, v in col.items() if v != 0} for col in columns]
        for col in self._cols:
            for r in col:
                if not 0 <= r < nrows:
                    raise DimensionError(f"row index {r} outside 0..{nrows - 1}")
        self._mod_cache: dict[int, list[Vector]] = {}
        self._echelon = None

    @classmethod
    def from_coo(cls, nrows, ncols, rows, cols, vals) -> "SparseExactMatrix":
        """Build from coordinate arrays; duplicate coordinates are summed."""
        columns: list[Vector] = [{} for _ in range(ncols)]
        for r, c, v in zip(np.asarray(rows).tolist(), np.asarray(cols).tolist(),
                           vals.tolist() if isinstance(vals, np.ndarray) else list(vals)):
            if not (0 <= r < nrows and 0 <= c < ncols):
                raise DimensionError(f"entry ({r}, {c}) outside {nrows}x{ncols}")
            col = columns[c]
            col[r] = col.get(r, 0) + v
        m = cls.__new__(cls)
        m.nrows, m.ncols = nrows, ncols
        m._cols = [{r: v for r, v in col.items() if v != 0} for col in columns]
        m._mod_cache = {}
        m._echelon = None
        return m

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence]) -> "SparseExactMatrix":
        nrows = len(rows)
        ncols = len(rows[0]) if nrows else 0
        cols = [{r: rows[r][c] for r in range(nrows) if rows[r][c] != 0} for c in range(ncols)]
        return cls(nrows, ncols, cols)

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    @property
    def nnz(self) -> int:
        return sum(len(c) for c in self._cols)

    def column(self, c: int) -> Vector:
        return dict(self._cols[c])

    def columns(self) -> list[Vector]:
        return [dict(c) for c in self._cols]

    def entries(self) -> Iterable[tuple[int, int, object]]:
        for c, col in enumerate(self._cols):
            for r, v in sorted(col.items()):
                yield r, c, v

    def to_dense(self) -> list[list]:
        out = [[0] * self.ncols for _ in range(self.nrows)]
        for r, c, v in self.entries():
            out[r][c] = v
        return out

    def transpose(self) -> "SparseExactMatrix":
        rows: list[Vector] = [{} for _ in range(self.nrows)]
        for r, c, v in self.entries():
            rows[r][c] = v
        return SparseExactMatrix(self.ncols, self.nrows, rows)

    def restrict_columns(self, keep: Sequence[int]) -> "SparseExactMatrix":
        return SparseExactMatrix(self.nrows, len(keep), [self._cols[c] for c in keep])

    def hstack(self, other: "SparseExactMatrix") -> "SparseExactMatrix":
        if other.nrows != self.nrows:
            raise DimensionError("row counts differ")
        return SparseExactMatrix(self.nrows, self.ncols + other.ncols, self._cols + other._cols)

    def apply(self, v: Vector) -> Vector:
        """Matrix times a sparse column vector."""
        out: Vector = {}
        for c, x in v.items():
            for r, a in self._cols[c].items():
                out[r] = out.get(r, 0) + a * x
        return {r: x for r, x in out.items() if x != 0}

    def __matmul__(self, other: "SparseExactMatrix") -> "SparseExactMatrix":
        if self.ncols != other.nrows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        return SparseExactMatrix(self.nrows, other.ncols, [self.apply(c) for c in other._cols])

    def is_zero(self) -> bool:
        return all(not c for c in self._cols)

    def __eq__(self, other):
        if not isinstance(other, SparseExactMatrix):
            return NotImplemented
        return self.shape == other.shape and self._cols == other._cols

    def __repr__(self):
        return f"SparseExactMatrix({self.nrows}x{self.ncols}, nnz={self.nnz})"

    def mod(self, p: int) -> list[Vector] | None:
        """Columns reduced mod p, or None if a denominator vanishes mod p."""
        if p not in self._mod_cache:
            cols = []
            for col in self._cols:
                red = {}
                for r, v in col.items():
                    if isinstance(v, Fraction):
                        if v.denominator % p == 0:
                            return None
                        x = v.numerator * pow(v.denominator, -1, p) % p
                    else:
                        x = v % p
                    if x:
                        red[r] = x
                cols.append(red)
            self._mod_cache[p] = cols
        return self._mod_cache[p]


# ---------------------------------------------------------------------------
# elimination core
#
# Ranks first take every pivot that causes no fill-in: a coordinate held by a
# single vector, or a vector with a single coordinate. What remains is
# reduced column by column against a table of pivots keyed by the largest
# coordinate (the lowest nonzero row), which keeps the bookkeeping to one
# dict lookup per step.


def _singleton_pivots(vectors: list[Vector]) -> tuple[int, set[int]]:
    """Take all zero-fill pivots; returns (their number, surviving vector ids)."""
    occ: dict[int, set[int]] = {}
    for vid, v in enumerate(vectors):
        for r in v:
            occ.setdefault(r, set()).add(vid)
    alive = set(range(len(vectors)))
    stack = [(True, r) for r, s in occ.items() if len(s) == 1]
    stack += [(False, vid) for vid, v in enumerate(vectors) if len(v) == 1]
    count = 0
    while stack:
        by_coord, x = stack.pop()
        if by_coord:
            holders = occ.get(x)
            if not holders or len(holders) != 1:
                continue
            (vid,) = holders
            # only this vector reaches coordinate x: it is independent of the rest
            for c in vectors[vid]:
                s = occ[c]
                s.discard(vid)
                if len(s) == 1:
                    stack.append((True, c))
        else:
            vid = x
            if vid not in alive or len(vectors[vid]) != 1:
                continue
            (r,) = vectors[vid]
            # a unit vector: clear its coordinate everywhere else
            for other in occ.pop(r):
                if other != vid:
                    vo = vectors[other]
                    del vo[r]
                    if len(vo) == 1:
                        stack.append((False, other))
        alive.discard(vid)
        count += 1
    return count, alive


def _column_reduce(vectors: list[Vector], order, reduce, track=None) -> dict[int, int]:
    """Reduce vectors (ids from ``order``) in place; returns {coordinate: pivot id}.

    ``reduce(v, pivot, r)`` clears coordinate r of v; ``track(target,
    pivot, r)`` is called just before, with both vectors still intact.
    """
    pivots: dict[int, int] = {}
    for vid in order:
        v = vectors[vid]
        while v:
            low = max(v)
            pid = pivots.get(low)
            if pid is None:
                pivots[low] = vid
                break
            if track is not None:
                track(vid, pid, low)
            reduce(v, vectors[pid], low)
    return pivots


def _reducer_mod(p: int):
    def reduce(v: Vector, pv: Vector, r: int) -> None:
        f = v[r] * pow(pv[r], -1, p) % p
        for c, x in pv.items():
            y = (v.get(c, 0) - f * x) % p
            if y:
                v[c] = y
            else:
                v.pop(c, None)
    return reduce


def _reduce_int(v: Vector, pv: Vector, r: int) -> None:
    # fraction-free: v <- a*v - b*pv, then strip the content
    a, b = pv[r], v[r]
    g = gcd(a, b)
    a, b = a // g, b // g
    if a != 1:
        for c in v:
            v[c] *= a
    for c, x in pv.items():
        y = v.get(c, 0) - b * x
        if y:
            v[c] = y
        else:
            v.pop(c, None)
    content = 0
    for x in v.values():
        content = gcd(content, x)
        if content == 1:
            return
    if content > 1:
        for c in v:
            v[c] //= content


def _reduce_frac(v: Vector, pv: Vector, r: int) -> None:
    f = Fraction(v[r]) / pv[r]
    for c, x in pv.items():
        y = v.get(c, 0) - f * x
        if y:
            v[c] = y
        else:
            v.pop(c, None)


def _rank(vectors: list[Vector], reduce) -> int:
    count, alive = _singleton_pivots(vectors)
    return count + len(_column_reduce(vectors, sorted(alive), reduce))


def _integer_columns(m: SparseExactMatrix) -> list[Vector]:
    """Columns scaled to integer entries (rank and kernel are unchanged)."""
    out = []
    for col in m._cols:
        den = 1
        for v in col.values():
            if isinstance(v, Fraction):
                den = den * v.denominator // gcd(den, v.denominator)
        out.append({r: int(v * den) for r, v in col.items()})
    return out


# ---------------------------------------------------------------------------
# public operations


def random_primes(rng: random.Random, count: int = 2, bits: int = 31) -> list[int]:
    primes: list[int] = []
    while len(primes) < count:
        cand = rng.randrange(1 << (bits - 1), 1 << bits) | 1
        if cand not in primes and isprime(cand):
            primes.append(cand)
    return primes


def modular_rank(m: SparseExactMatrix, p: int) -> int | None:
    cols = m.mod(p)
    if cols is None:
        return None
    return _rank([dict(c) for c in cols], _reducer_mod(p))


def exact_rank(m: SparseExactMatrix) -> int:
    return _rank(_integer_columns(m), _reduce_int)


class RankStats:
    """Counters for how ranks were decided (tests use them to check the
    modular path never disagrees with exact arithmetic)."""

    modular_agreements = 0
    fallbacks = 0


def certified_rank(m: SparseExactMatrix, seed: int | random.Random | None = 0) -> int:
    """Rank over Q.

    Two distinct random 31-bit primes are drawn from ``seed``; if the
    modular ranks agree that value is returned, otherwise exact elimination
    decides.
    """
    if m.nnz == 0:
        return 0
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    ranks = []
    for p in random_primes(rng):
        ranks.append(modular_rank(m, p))
    if ranks[0] is not None and ranks[0] == ranks[1]:
        RankStats.modular_agreements += 1
        return ranks[0]
    RankStats.fallbacks += 1
    return exact_rank(m)


def kernel_basis(m: SparseExactMatrix) -> list[Vector]:
    """Exact basis of the kernel, as sparse vectors over the columns."""
    vectors = [{r: Fraction(v) for r, v in col.items()} for col in m._cols]
    combos: list[Vector] = [{c: Fraction(1)} for c in range(m.ncols)]

    def track(target: int, pivot: int, r: int) -> None:
        f = vectors[target][r] / vectors[pivot][r]
        t = combos[target]
        for c, x in combos[pivot].items():
            y = t.get(c, 0) - f * x
            if y:
                t[c] = y
            else:
                t.pop(c, None)

    pivots = _column_reduce(vectors, range(m.ncols), _reduce_frac, track)
    used = set(pivots.values())
    return [combos[c] for c in range(m.ncols) if c not in used]


class _Echelon:
    def __init__(self, m: SparseExactMatrix):
        vectors = [{r: Fraction(v) for r, v in col.items()} for col in m._cols]
        pivots = _column_reduce(vectors, range(m.ncols), _reduce_frac)
        self.pivots = {r: vectors[p] for r, p in pivots.items()}

    def reduce(self, v: Vector) -> Vector:
        v = {r: Fraction(x) for r, x in v.items() if x != 0}
        while v:
            low = max(v)
            pv = self.pivots.get(low)
            if pv is None:
                break
            _reduce_frac(v, pv, low)
        return v


def _echelon(m: SparseExactMatrix) -> _Echelon:
    if m._echelon is None:
        m._echelon = _Echelon(m)
    return m._echelon


def in_image(v: Vector | Sequence, m: SparseExactMatrix) -> bool:
    """True iff ``v`` lies in the column span of ``m`` (exact)."""
    if not isinstance(v, dict):
        if len(v) != m.nrows:
            raise DimensionError(f"vector has length {len(v)}, matrix has {m.nrows} rows")
        v = {r: x for r, x in enumerate(v) if x != 0}
    elif any(not 0 <= r < m.nrows for r in v):
        raise DimensionError("vector coordinate outside the row range")
    return not _echelon(m).reduce(v)


def rank_of_vectors(vectors: Iterable[Vector]) -> int:
    """Exact rank of a family of sparse vectors."""
    vs = [{r: Fraction(x) for r, x in v.items() if x != 0} for v in vectors]
    return _rank(vs, _reduce_frac)
