"""Command line interface: ``khcable SUBCOMMAND ...`` (see --help)."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from filelock import FileLock

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
from .homology import ENGINES, BettiTable, betti, jones_from_table, thickness
from .lee import lee_betti, lee_dims_predicted, s_from_kh0, s_invariant
from .skein import les_check
from . import verify

CACHE_ENV = "KHCABLE_CACHE"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument parsing


def _global_options(parser: argparse.ArgumentParser, with_defaults: bool) -> None:
    # subcommands repeat the global flags without defaults so that either
    # position on the command line works
    def default(value):
        return value if with_defaults else argparse.SUPPRESS

    parser.add_argument("--out", choices=("json", "text"), default=default("text"),
                        help="output format")
    parser.add_argument("--cache", metavar="DIR", default=default(None),
                        help=f"cache directory for betti tables (default ${CACHE_ENV})")
    parser.add_argument("--seed", type=int, default=default(0),
                        help="seed for the random primes of modular ranks")
    parser.add_argument("--budget", type=int, default=default(DEFAULT_BUDGET),
                        help="generator cap; larger computations are refused")
    parser.add_argument("--jobs", type=int, default=default(1),
                        help="worker processes for block ranks")
    parser.add_argument("--engine", choices=ENGINES, default=default("auto"),
                        help="cube of resolutions, tangle scanning, or automatic choice")


def _diagram_options(parser: argparse.ArgumentParser) -> None:
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--braid", metavar="W", help='braid word, e.g. "1 1 -2"')
    src.add_argument("--pd", metavar="FILE", help="JSON PD file")
    src.add_argument("--spec", metavar="S",
                     help="torus:P:Q, braid:W, cable:W:P:Q or double:W:Q")
    parser.add_argument("--strands", type=int, help="strands of the braid (default: inferred)")


def _window(text: str) -> tuple[int, int]:
    try:
        a, b = text.split(":")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like A:B, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="khcable", description="Exact Khovanov homology of cables, torus links and doubles.")
    _global_options(parser, with_defaults=True)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        _global_options(p, with_defaults=False)
        return p

    def table_options(p):
        p.add_argument("--window", type=_window, metavar="A:B",
                       help="unnormalized homological degrees to compute")
        p.add_argument("--mode", choices=("modular", "exact"), default="modular")
        p.add_argument("--unnormalized", action="store_true",
                       help="report H^{i,q} without the orientation shift")

    p = add("compute", "Khovanov homology of a diagram")
    _diagram_options(p)
    table_options(p)

    p = add("torus", "torus link T(P, Q) as a braid closure")
    p.add_argument("p", type=int)
    p.add_argument("q", type=int)
    table_options(p)

    p = add("cable", "(P, Q + P*writhe) cable of a braid closure")
    p.add_argument("--braid", required=True, metavar="W")
    p.add_argument("--strands", type=int)
    p.add_argument("-p", type=int, required=True)
    p.add_argument("-q", type=int, required=True)
    table_options(p)

    p = add("double", "twisted Whitehead double of a braid closure")
    p.add_argument("--braid", required=True, metavar="W")
    p.add_argument("--strands", type=int)
    p.add_argument("-q", type=int, required=True)
    table_options(p)

    for name, help_ in (("jones", "Jones polynomial (from the Euler characteristic)"),
                        ("s", "Rasmussen s-invariant of a knot"),
                        ("lee", "Lee homology dimensions and their prediction"),
                        ("thickness", "homological width and dealternating bound")):
        p = add(name, help_)
        _diagram_options(p)

    p = add("les", "check the skein long exact sequence at one crossing")
    _diagram_options(p)
    p.add_argument("--crossing", type=int, required=True, metavar="C")

    p = add("verify", "verify a theorem by id")
    p.add_argument("id", nargs="?", help="theorem id, or 'all'")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--slow", action="store_true", help="run the slow parameter sets")
    p.add_argument("--list", action="store_true", help="list theorem ids and exit")
    return parser


# ---------------------------------------------------------------------------
# helpers


def _braid(text: str, strands: int | None) -> BraidWord:
    return BraidWord.parse(text, strands)


def _diagram(args) -> PlanarDiagram:
    if args.braid is not None:
        return braid_closure(_braid(args.braid, args.strands))
    if args.spec is not None:
        return verify.diagram_from_spec(args.spec)
    try:
        data = json.loads(Path(args.pd).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {args.pd}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.pd} is not valid JSON: {exc}") from exc
    return PlanarDiagram.from_pd(data)


def _cache_dir(args) -> Path | None:
    path = args.cache or os.environ.get(CACHE_ENV)
    return Path(path) if path else None


def _cache_key(d: PlanarDiagram, window, normalized: bool, mode: str, engine: str) -> str:
    blob = json.dumps({"diagram": d.canonical_key(), "mode": mode,
                       "window": None if window is None else list(window),
                       "normalized": normalized, "engine": engine}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def _table(d: PlanarDiagram, args, window=None, normalized=True, mode="modular") -> BettiTable:
    """Betti table, read from or written to the cache directory if one is set."""
    def fresh():
        return betti(d, window, normalized=normalized, mode=mode, seed=args.seed,
                     jobs=args.jobs, budget=args.budget, engine=args.engine)

    cache = _cache_dir(args)
    if cache is None:
        return fresh()
    cache.mkdir(parents=True, exist_ok=True)
    path = cache / f"{_cache_key(d, window, normalized, mode, args.engine)}.json"
    with FileLock(str(path) + ".lock"):
        if path.exists():
            return BettiTable.from_json(path.read_text())
        t = fresh()
        tmp = path.with_suffix(".tmp")
        tmp.write_text(t.to_json())
        tmp.replace(path)
        return t


def _emit(args, payload: dict, text: str) -> None:
    if args.out == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _describe(d: PlanarDiagram) -> str:
    m = metadata(d)
    return (f"{len(d.crossings)} crossings ({m.n_plus}+, {m.n_minus}-), "
            f"{m.components} component(s), writhe {m.writhe}")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_table(args, d: PlanarDiagram, with_diagram: bool) -> int:
    t = _table(d, args, args.window, not args.unnormalized, args.mode)
    if args.out == "json":
        payload = t.to_dict()
        if with_diagram:
            payload = {"diagram": d.to_pd(), "loops": d.loops, "betti": payload}
        print(json.dumps(payload, sort_keys=True))
    else:
        if with_diagram:
            print(_describe(d))
        print(t.format())
    return EXIT_OK


def _cmd_compute(args):
    return _cmd_table(args, _diagram(args), with_diagram=False)


def _cmd_torus(args):
    return _cmd_table(args, braid_closure(torus_braid(args.p, args.q)), with_diagram=True)


def _cmd_cable(args):
    d = cable_diagram(_braid(args.braid, args.strands), args.p, args.q)
    return _cmd_table(args, d, with_diagram=True)


def _cmd_double(args):
    d = whitehead_double(_braid(args.braid, args.strands), args.q)
    return _cmd_table(args, d, with_diagram=True)


def _cmd_jones(args):
    d = _diagram(args)
    poly = jones_from_table(_table(d, args))
    terms = [[str(e), str(c)] for e, c in poly.terms()]
    _emit(args, {"jones": terms}, str(poly))
    return EXIT_OK


def _cmd_s(args):
    d = _diagram(args)
    s = s_invariant(d, budget=args.budget)
    kh0 = s_from_kh0(_table(d, args, (d.n_minus, d.n_minus)))
    _emit(args, {"s": s, "s_from_kh0": kh0},
          f"s = {s}" + ("" if kh0 is None else f" (KH^0 gives {kh0})"))
    return EXIT_OK


def _cmd_lee(args):
    d = _diagram(args)
    got = lee_betti(d, seed=args.seed, budget=args.budget)
    want = lee_dims_predicted(metadata(d))
    ok = got == want
    _emit(args, {"lee": {str(i): v for i, v in got.items()},
                 "predicted": {str(i): v for i, v in want.items()}, "match": ok},
          "\n".join([f"Lee^{i} = {v}" for i, v in got.items()]
                    + [f"prediction {'matches' if ok else 'DIFFERS'}: {want}"]))
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_thickness(args):
    d = _diagram(args)
    hw, bound = thickness(_table(d, args))
    _emit(args, {"hw": hw, "dealternating_bound": bound},
          f"homological width {hw}; dealternating number >= {bound}")
    return EXIT_OK


def _cmd_les(args):
    d = _diagram(args)
    r = les_check(d, args.crossing, seed=args.seed, budget=args.budget,
                  engine=args.engine, jobs=args.jobs)
    text = [f"crossing {r.crossing}: {'pass' if r.passed else 'FAIL'}"]
    if r.euler_failures:
        text.append(f"  Euler characteristic fails at j = {r.euler_failures}")
    if r.subadditivity_failures:
        text.append(f"  h(D) > h(D0) + h(D1) at {r.subadditivity_failures}")
    _emit(args, r.as_dict(), "\n".join(text))
    return EXIT_OK if r.passed else EXIT_FAIL


def _param_value(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def _cmd_verify(args):
    if args.list:
        for tid in verify.theorem_ids():
            print(f"{tid}: {verify.REGISTRY[tid].summary}")
        return EXIT_OK
    if args.id is None:
        raise UsageError("verify needs a theorem id, 'all' or --list")
    params = {}
    for item in args.param:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--param needs KEY=VALUE, got {item!r}")
        params[key] = _param_value(value)
    ids = verify.theorem_ids() if args.id == "all" else [args.id]
    kw = dict(seed=args.seed, budget=args.budget, jobs=args.jobs, engine=args.engine)
    reports = []
    for tid in ids:
        if params:
            reports.append(verify.run(tid, params, **kw))
        else:
            reports.extend(verify.run_suite(tid, slow=args.slow, **kw))
    if args.out == "json":
        print(json.dumps([r.as_dict() for r in reports], sort_keys=True))
    else:
        print("\n".join(r.format() for r in reports))
    if any(r.status == "fail" for r in reports):
        return EXIT_FAIL
    if any(r.status == "refused" for r in reports):
        return EXIT_USAGE
    return EXIT_OK


COMMANDS = {
    "compute": _cmd_compute, "torus": _cmd_torus, "cable": _cmd_cable, "double": _cmd_double,
    "jones": _cmd_jones, "s": _cmd_s, "lee": _cmd_lee, "thickness": _cmd_thickness,
    "les": _cmd_les, "verify": _cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except BudgetExceeded as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, DiagramError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
