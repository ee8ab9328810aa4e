"""Theorem-by-id verification: compute, compare with the predicted values,
report pass/fail per sub-claim.

Each registry entry knows its default parameter sets (cheap) and its slow
sets (opt-in). A run that would exceed the generator budget is reported as
"refused" rather than raised.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from math import comb

from .cube import DEFAULT_BUDGET, BudgetExceeded
from .diagrams import (
    BraidWord,
    DiagramError,
    PlanarDiagram,
    braid_closure,
    cable_diagram,
    metadata,
    torus_braid,
    whitehead_double,
)
from .homology import betti, kh0_positive_prediction, thickness
from .lee import (
    double_s,
    knot_s_positive,
    lee_betti,
    lee_dims_predicted,
    s_from_kh0,
    s_invariant,
)
from .skein import cable_maxdeg_window, les_check


class UnknownTheoremError(KeyError):
    pass


@dataclass
class Claim:
    name: str
    predicted: object
    computed: object
    passed: bool

    def as_dict(self) -> dict:
        return {"name": self.name, "predicted": self.predicted,
                "computed": self.computed, "passed": self.passed}


@dataclass
class VerificationReport:
    theorem_id: str
    params: dict
    status: str = "pass"  # pass | fail | refused
    claims: list[Claim] = field(default_factory=list)
    message: str = ""
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def check(self, name: str, predicted, computed, passed: bool | None = None) -> bool:
        ok = predicted == computed if passed is None else bool(passed)
        self.claims.append(Claim(name, predicted, computed, ok))
        return ok

    def as_dict(self, with_time: bool = True) -> dict:
        out = {"id": self.theorem_id, "params": self.params, "status": self.status,
               "claims": [c.as_dict() for c in self.claims], "message": self.message}
        if with_time:
            out["wall_time"] = round(self.wall_time, 3)
        return out

    def format(self) -> str:
        lines = [f"{self.theorem_id} {self.params}: {self.status.upper()}"
                 + (f" ({self.message})" if self.message else "")]
        for c in self.claims:
            mark = "ok " if c.passed else "BAD"
            lines.append(f"  [{mark}] {c.name}: computed {c.computed}, predicted {c.predicted}")
        lines.append(f"  wall time {self.wall_time:.2f}s")
        return "\n".join(lines)


@dataclass
class Settings:
    mode: str = "modular"
    seed: int = 0
    budget: int | None = DEFAULT_BUDGET
    jobs: int = 1
    engine: str = "auto"

    def betti(self, d, window=None, normalized=True):
        return betti(d, window, normalized=normalized, mode=self.mode, seed=self.seed,
                     jobs=self.jobs, budget=self.budget, engine=self.engine)


# ---------------------------------------------------------------------------
# diagram specifications used as parameters


def companion(text: str) -> BraidWord:
    """Braid word of a companion knot; "" is the crossingless unknot."""
    return BraidWord.parse(str(text))


def diagram_from_spec(spec: str) -> PlanarDiagram:
    """Build a diagram from a short text description.

    Forms: ``torus:P:Q``, ``braid:W`` (W whitespace-separated letters),
    ``cable:W:P:Q`` and ``double:W:Q`` where W is the companion braid.
    """
    kind, _, rest = str(spec).partition(":")
    parts = rest.split(":")
    try:
        if kind == "torus" and len(parts) == 2:
            return braid_closure(torus_braid(int(parts[0]), int(parts[1])))
        if kind == "braid" and len(parts) == 1:
            return braid_closure(BraidWord.parse(parts[0]))
        if kind == "cable" and len(parts) == 3:
            return cable_diagram(companion(parts[0]), int(parts[1]), int(parts[2]))
        if kind == "double" and len(parts) == 2:
            return whitehead_double(companion(parts[0]), int(parts[1]))
    except ValueError as exc:
        raise DiagramError(f"bad diagram spec {spec!r}: {exc}") from exc
    raise DiagramError(f"bad diagram spec {spec!r}")


def _crossing_counts(word: BraidWord) -> tuple[int, int]:
    plus = sum(1 for w in word.letters if w > 0)
    return plus, len(word.letters) - plus


def _top_window(d: PlanarDiagram, normalized_degree: int) -> tuple[int, int]:
    """Unnormalized window from a normalized degree up to the last crossing."""
    return normalized_degree + d.n_minus, len(d.crossings)


def _support(table, i) -> list[list[int]]:
    return [[j, v] for j, v in table.support(i).items()]


# ---------------------------------------------------------------------------
# the checks


def _newmainthm(rep: VerificationReport, p: dict, st: Settings) -> None:
    k, n = p["k"], p["n"]
    _positive(k=k, n=n)
    d = braid_closure(torus_braid(2 * k + 1, (2 * k + 1) * n))
    top = 2 * k * (k + 1) * n
    t = st.betti(d, _top_window(d, top))
    rep.check("max nonzero degree", top, t.max_degree())
    rep.check(f"dim KH^{top}", comb(2 * k + 2, k + 1), t.degree_dim(top))
    want = [6 * k * (k + 1) * n + 1 - 2 * i for i in range(k + 2)]
    have = sorted(t.support(top))
    rep.check(f"KH^{top},j nonzero for j in {want}", want, have,
              all(t[top, j] for j in want))


def _stosic_even(rep: VerificationReport, p: dict, st: Settings) -> None:
    k, n = p["k"], p["n"]
    _positive(k=k, n=n)
    d = braid_closure(torus_braid(2 * k, 2 * k * n))
    top = 2 * k * k * n
    t = st.betti(d, _top_window(d, top))
    rep.check("max nonzero degree", top, t.max_degree())
    rep.check(f"dim KH^{top}", comb(2 * k, k), t.degree_dim(top))
    want = {}
    for i in range(k + 1):
        v = comb(2 * k, k - i) - (comb(2 * k, k - i - 1) if k - i - 1 >= 0 else 0)
        if v:
            want[6 * k * k * n - 2 * i] = v
    rep.check(f"graded dims of KH^{top}", sorted(want.items()), sorted(t.support(top).items()))


def _cable_setup(p: dict):
    word = companion(p.get("companion", ""))
    k, n = p["k"], p["n"]
    _positive(k=k)
    if n < 0:
        raise ValueError("n must be >= 0")
    l_plus, l_minus = _crossing_counts(word)
    return word, k, n, l_plus, l_minus


def _newmainthm2(rep: VerificationReport, p: dict, st: Settings) -> None:
    word, k, n, l_plus, l_minus = _cable_setup(p)
    l, f = l_plus + l_minus, l_plus - l_minus
    if n < l:
        raise ValueError(f"out of proven range: n = {n} < l = {l}")
    d = cable_diagram(word, 2 * k, 2 * k * n)
    top = 2 * k * k * (n + f)
    t = st.betti(d, _top_window(d, top))
    rep.check("max nonzero degree", top, t.max_degree())
    if n > l:
        rep.check(f"dim KH^{top}", comb(2 * k, k), t.degree_dim(top))
        want = [6 * k * k * (n + f) - 2 * i for i in range(k + 1)]
        rep.check(f"KH^{top},j nonzero for j in {want}", want, sorted(t.support(top)),
                  all(t[top, j] for j in want))


def _newmainprop(rep: VerificationReport, p: dict, st: Settings) -> None:
    word, k, n, l_plus, l_minus = _cable_setup(p)
    f = l_plus - l_minus
    window = cable_maxdeg_window(k, n, f, l_plus)
    if window is None:
        raise ValueError(f"out of proven range: n = {n} < l = {l_plus + l_minus}")
    d = cable_diagram(word, 2 * k + 1, (2 * k + 1) * n)
    t = st.betti(d, _top_window(d, window[0]))
    top = t.max_degree()
    rep.check("max nonzero degree in proven window", list(window), top,
              top is not None and window[0] <= top <= window[1])


def _lem1(rep: VerificationReport, p: dict, st: Settings) -> None:
    k, n = p["k"], p["n"]
    _positive(k=k, n=n)
    d = braid_closure(torus_braid(2 * k + 1, (2 * k + 1) * n - 1))
    deg = 2 * k * (k + 1) * n
    if deg > len(d.crossings):
        rep.check(f"H^{deg} (beyond the last crossing)", 0, 0)
        return
    t = st.betti(d, (deg, deg), normalized=False)
    rep.check(f"dim H^{deg} (unnormalized)", 0, t.degree_dim(deg))


def _prop43(rep: VerificationReport, p: dict, st: Settings) -> None:
    d = diagram_from_spec(p["diagram"])
    meta = metadata(d)
    lee = lee_betti(d, mode=st.mode, seed=st.seed, budget=st.budget)
    pred = lee_dims_predicted(meta)
    rep.check("Lee dims by degree", sorted(pred.items()), sorted(lee.items()))
    rep.check("total Lee dimension", 2 ** meta.components, sum(lee.values()))


def _lem4(rep: VerificationReport, p: dict, st: Settings) -> None:
    word = companion(p.get("companion", ""))
    q = p["q"]
    l = len(word.letters)
    n = q // 2
    if q < 0 or n <= l:
        raise ValueError(f"out of proven range: need q >= 0 and n = {n} > l = {l}")
    d = whitehead_double(word, q)
    if q % 2 == 0:
        t = st.betti(d, (d.n_minus, d.n_minus))
        rep.check("KH^0 support", [[-3, 1], [-1, 1]], _support(t, 0))
    else:
        t = st.betti(d, (d.n_minus + 2, d.n_minus + 2))
        rep.check("dim KH^{2,5}", 1, t[2, 5])
        others = {j: v for j, v in t.support(2).items() if j not in (3, 5)}
        rep.check("KH^{2,j} for j not in {3, 5}", {}, others)


def _thickness(rep: VerificationReport, p: dict, st: Settings) -> None:
    family, k, n = p["family"], p["k"], p["n"]
    _positive(k=k, n=n)
    if family == "torus-even":
        d = braid_closure(torus_braid(2 * k, 2 * k * n))
        bound = k * (k - 1) * n + 2
    elif family == "torus-odd":
        d = braid_closure(torus_braid(2 * k + 1, (2 * k + 1) * n))
        bound = k * k * n + 2
    elif family == "cable":
        word = companion(p.get("companion", "1"))
        if any(w < 0 for w in word.letters):
            raise ValueError("companion must be a positive braid")
        l = len(word.letters)
        if n <= l:
            raise ValueError(f"out of proven range: n = {n} <= l = {l}")
        base = braid_closure(word)
        s = s_invariant(base, budget=st.budget)
        rep.check("s(companion) = c + 1 - s_0", knot_s_positive(metadata(base)), s)
        d = cable_diagram(word, 2 * k, 2 * k * n)
        bound = k * (k - 1) * (n + l) + 2 + k * s
    else:
        raise ValueError(f"unknown thickness family {family!r}")
    hw, dealt = thickness(st.betti(d))
    rep.check("hw >= bound", bound, hw, hw >= bound)
    rep.check("dealternating bound hw - 2", max(0, hw - 2), dealt)


def _khovanov2(rep: VerificationReport, p: dict, st: Settings) -> None:
    d = diagram_from_spec(p["diagram"])
    meta = metadata(d)
    if not d.is_positive:
        raise ValueError("diagram must be positive")
    t = st.betti(d)
    rep.check("KH^i = 0 for i < 0", [], [i for i in t.degrees() if i < 0])
    pred = sorted(j for _, j in kh0_positive_prediction(meta))
    rep.check("KH^0 support", [[j, 1] for j in pred], _support(t, 0))
    low = meta.crossings - meta.seifert_circles
    bad = sorted([i, j] for (i, j) in t.entries if i > 0 and j < low)
    rep.check(f"KH^(i,j) = 0 for i > 0, j < {low}", [], bad)


def _ras_double(rep: VerificationReport, p: dict, st: Settings) -> None:
    word = companion(p.get("companion", ""))
    q = p["q"]
    l_plus, l_minus = _crossing_counts(word)
    pred = double_s(l_plus, l_minus, q)
    if pred is None:
        raise ValueError(f"out of proven range for q = {q}, l = {l_plus + l_minus}")
    d = whitehead_double(word, q)
    s = s_invariant(d, budget=st.budget)
    rep.check("s from filtered Lee homology", pred, s)
    t = st.betti(d, (d.n_minus, d.n_minus))
    s0 = s_from_kh0(t)
    if s0 is not None:
        rep.check("s read off KH^0", s, s0)


def _les_random(rep: VerificationReport, p: dict, st: Settings) -> None:
    rng = random.Random(p["seed"])
    count = p["count"]
    if count < 1:
        raise ValueError("count must be positive")
    for _ in range(count):
        strands = rng.randint(2, 4)
        word = BraidWord(strands, tuple(rng.choice((1, -1)) * rng.randint(1, strands - 1)
                                         for _ in range(rng.randint(3, 8))))
        d = braid_closure(word)
        c = rng.randrange(len(d.crossings))
        r = les_check(d, c, mode=st.mode, seed=st.seed, budget=st.budget, engine=st.engine)
        rep.check(f"braid [{word}] on {strands} strands, crossing {c}",
                  {"euler": [], "subadditivity": []}, {
            "euler": r.euler_failures, "subadditivity": [list(x) for x in r.subadditivity_failures]
        }, r.passed)


def _positive(**values) -> None:
    for name, v in values.items():
        if not isinstance(v, int) or v < 1:
            raise ValueError(f"{name} must be a positive integer, got {v!r}")


@dataclass(frozen=True)
class Entry:
    check: object
    summary: str
    defaults: tuple
    slow: tuple = ()


REGISTRY: dict[str, Entry] = {
    "thm-newmainthm": Entry(
        _newmainthm, "top degree, its dimension and q-support for T(2k+1, (2k+1)n)",
        ({"k": 1, "n": 1}, {"k": 1, "n": 2}),
        ({"k": 1, "n": 3}, {"k": 2, "n": 1})),
    "thm-stosic-even": Entry(
        _stosic_even, "top degree and graded dimensions for T(2k, 2kn)",
        ({"k": 1, "n": 1}, {"k": 2, "n": 1}),
        ({"k": 2, "n": 2},)),
    "thm-newmainthm2": Entry(
        _newmainthm2, "top degree 2k^2(n+f) of the (2k, 2k(n+f)) cable",
        ({"companion": "1", "k": 1, "n": 2},),
        ({"companion": "1 1 1", "k": 1, "n": 4},)),
    "prop-newmainprop": Entry(
        _newmainprop, "top degree of the (2k+1, (2k+1)(n+f)) cable lies in the proven window",
        ({"companion": "", "k": 1, "n": 1}, {"companion": "1", "k": 1, "n": 1}),
        ({"companion": "1", "k": 1, "n": 2},)),
    "lemma-lem1": Entry(
        _lem1, "H^{2k(k+1)n} of the closure of D(2k+1, (2k+1)n - 1) vanishes",
        ({"k": 1, "n": 1},),
        ({"k": 1, "n": 2}, {"k": 2, "n": 1})),
    "prop-4.3": Entry(
        _prop43, "Lee homology dimensions from linking numbers",
        tuple({"diagram": s} for s in
              ("torus:2:2", "torus:2:4", "torus:3:3", "torus:4:4", "cable:1:2:4")),
        ({"diagram": "torus:3:6"},)),
    "prop-lem4": Entry(
        _lem4, "KH^0 (q even) or KH^2 (q odd) of twisted Whitehead doubles",
        ({"companion": "", "q": 2}, {"companion": "", "q": 3}),
        ({"companion": "1 1 1", "q": 8}, {"companion": "1 1 1", "q": 9})),
    "cor-thickness": Entry(
        _thickness, "homological thickness lower bounds",
        ({"family": "torus-odd", "k": 1, "n": 1},
         {"family": "torus-even", "k": 2, "n": 1},
         {"family": "cable", "companion": "1", "k": 1, "n": 2}),
        ({"family": "cable", "companion": "1 1 1", "k": 1, "n": 4},
         {"family": "torus-odd", "k": 1, "n": 2})),
    "thm-khovanov2": Entry(
        _khovanov2, "degree-0 Khovanov homology of positive diagrams",
        tuple({"diagram": s} for s in
              ("torus:2:3", "torus:3:3", "torus:3:4", "cable:1:2:4")),
        ({"diagram": "cable:1 1 1:2:8"},)),
    "cor-ras-double": Entry(
        _ras_double, "s of twisted Whitehead doubles",
        tuple({"companion": "", "q": q} for q in (2, 3, -2, -1)),
        ({"companion": "1", "q": 4}, {"companion": "1", "q": 5})),
    "les-random": Entry(
        _les_random, "skein exact sequence at random crossings of random braids",
        ({"count": 10, "seed": 0},),
        ({"count": 50, "seed": 1},)),
}


def theorem_ids() -> list[str]:
    return list(REGISTRY)


def default_params(theorem_id: str, slow: bool = False) -> list[dict]:
    entry = _entry(theorem_id)
    return [dict(p) for p in (entry.slow if slow else entry.defaults)]


def _entry(theorem_id: str) -> Entry:
    try:
        return REGISTRY[theorem_id]
    except KeyError:
        raise UnknownTheoremError(
            f"unknown theorem id {theorem_id!r}; known: {', '.join(REGISTRY)}") from None


def _merge(entry: Entry, params: dict | None) -> dict:
    base = dict(entry.defaults[0])
    if not params:
        return base
    allowed = {key for p in entry.defaults + entry.slow for key in p}
    for key in params:
        if key not in allowed:
            raise ValueError(f"unknown parameter {key!r}; expected one of {sorted(allowed)}")
    for candidate in entry.defaults + entry.slow:
        if set(params) <= set(candidate):
            base = dict(candidate)
            break
    base.update(params)
    return base


def run(theorem_id: str, params: dict | None = None, *, mode: str = "modular", seed: int = 0,
        budget: int | None = DEFAULT_BUDGET, jobs: int = 1,
        engine: str = "auto") -> VerificationReport:
    """Verify one theorem at one parameter set (the first default if None)."""
    entry = _entry(theorem_id)
    p = _merge(entry, params)
    rep = VerificationReport(theorem_id, p)
    start = time.perf_counter()
    try:
        entry.check(rep, p, Settings(mode, seed, budget, jobs, engine))
    except BudgetExceeded as exc:
        rep.status = "refused"
        rep.message = str(exc)
    else:
        rep.status = "pass" if rep.claims and all(c.passed for c in rep.claims) else "fail"
    rep.wall_time = time.perf_counter() - start
    return rep


def run_suite(theorem_id: str, slow: bool = False, **kw) -> list[VerificationReport]:
    return [run(theorem_id, p, **kw) for p in default_params(theorem_id, slow)]
