"""Skein long exact sequence checks and closed-form vanishing bounds for cables.

Smoothing crossing c of D gives a short exact sequence of complexes
0 -> C(D_1)[-1]{-1} -> C(D) -> C(D_0) -> 0, hence a long exact sequence

    ... -> H^{i-1,j-1}(D_1) -> H^{i,j}(D) -> H^{i,j}(D_0) -> H^{i,j-1}(D_1) -> ...

All tables here use unnormalized indices, which do not depend on how the
smoothed diagrams are oriented.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import multiprocessing

from .cube import DEFAULT_BUDGET
from .diagrams import BraidWord, DiagramError, PlanarDiagram, smooth
from .homology import BettiTable, betti


def braid_crossing(word: BraidWord, i: int, alpha: int) -> int:
    """Index of crossing (i, alpha) in the closure of ``word``: the alpha-th
    letter of type sigma_i, counting from the top of the word (1-based)."""
    seen = 0
    for c, w in enumerate(word.letters):
        if abs(w) == i:
            seen += 1
            if seen == alpha:
                return c
    raise DiagramError(f"braid word has no crossing ({i}, {alpha})")


@dataclass
class SkeinReport:
    crossing: int
    table: BettiTable
    table0: BettiTable
    table1: BettiTable
    euler_failures: list[int] = field(default_factory=list)
    subadditivity_failures: list[tuple[int, int]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.euler_failures and not self.subadditivity_failures

    def as_dict(self) -> dict:
        return {
            "crossing": self.crossing,
            "passed": self.passed,
            "euler_failures": self.euler_failures,
            "subadditivity_failures": [list(x) for x in self.subadditivity_failures],
            "tables": {"D": self.table.to_dict(), "D0": self.table0.to_dict(),
                       "D1": self.table1.to_dict()},
        }


def _table(args):
    d, mode, seed, budget, engine = args
    return betti(d, normalized=False, mode=mode, seed=seed, budget=budget, engine=engine)


def les_check(d: PlanarDiagram, c: int, mode: str = "modular", seed: int = 0,
              budget: int | None = DEFAULT_BUDGET, engine: str = "auto",
              jobs: int = 1) -> SkeinReport:
    """Check the long exact sequence of the skein triple at crossing ``c``.

    For every j the alternating sum over i of
    h^{i,j}(D) - h^{i,j}(D_0) - h^{i-1,j-1}(D_1) must vanish, and every
    h^{i,j}(D) is at most h^{i,j}(D_0) + h^{i-1,j-1}(D_1).
    """
    if not isinstance(c, int) or not 0 <= c < len(d.crossings):
        raise DiagramError(f"crossing {c!r} is not a crossing of a {len(d.crossings)}-crossing diagram")
    diagrams = [d, smooth(d, c, 0), smooth(d, c, 1)]
    jobs_args = [(x, mode, seed, budget, engine) for x in diagrams]
    if jobs > 1:
        with ProcessPoolExecutor(min(3, jobs), mp_context=multiprocessing.get_context("fork")) as ex:
            t, t0, t1 = ex.map(_table, jobs_args)
    else:
        t, t0, t1 = map(_table, jobs_args)
    report = SkeinReport(c, t, t0, t1)
    js = {j for tab in (t, t0) for _, j in tab.entries} | {j + 1 for _, j in t1.entries}
    for j in sorted(js):
        chi = 0
        for i in range(-1, len(d.crossings) + 2):
            a, b, e = t[i, j], t0[i, j], t1[i - 1, j - 1]
            chi += (-1) ** (i % 2) * (a - b - e)
            if a > b + e:
                report.subadditivity_failures.append((i, j))
        if chi:
            report.euler_failures.append(j)
    return report


def _check_counts(k: int, n: int, l: int) -> None:
    for name, v, least in (("k", k, 1), ("n", n, 0), ("l", l, 0)):
        if not isinstance(v, int) or isinstance(v, bool) or v < least:
            raise ValueError(f"{name} must be an integer >= {least}, got {v!r}")


def cable_vanishing_bound(k: int, n: int, l: int, parity: str) -> int:
    """Unnormalized degree above which H vanishes for the 2k-strand ("even")
    or (2k+1)-strand ("odd") cable family built on a diagram with l
    crossings and n full twists."""
    _check_counts(k, n, l)
    if parity == "even":
        p, twist = 2 * k, 2 * k * k
    elif parity == "odd":
        p, twist = 2 * k + 1, 2 * k * (k + 1)
    else:
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    if n >= l:
        return twist * (n - l + 1) + l * p * p
    return l * p * p


def cable_maxdeg_window(k: int, n: int, f: int, l_plus: int) -> tuple[int, int] | None:
    """Proven range for the top nonzero KH degree of K(2k+1, (2k+1)(n+f)),
    the cable of a knot diagram with writhe f and l_plus positive crossings.

    Returns None when n < l (outside the proven range).
    """
    _check_counts(k, n, l_plus)
    l_minus = l_plus - f
    if l_minus < 0:
        raise ValueError(f"writhe {f} exceeds the {l_plus} positive crossings")
    l = l_plus + l_minus
    if n < l:
        return None
    low = 2 * k * (k + 1) * (n + f)
    return low, low + l_plus
