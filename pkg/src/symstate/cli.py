"""Command-line interface.

Exit codes: 0 success, 1 fuzz failures, 2 unreadable input, 3 contract
violation, 4 evaluation error (out-of-bounds access).
"""

from __future__ import annotations

import argparse
import os
import sys

from .ainni import EMPTY, ainni, parse_context
from .bench import run_bench
from .fuzz import FuzzConfig, run_fuzz
from .machine import ConcreteState, EvalError, ImageError, dump_memory_image, evaluate, load_memory_image
from .state import Engine
from .terms import ParseError, TermError


def _read_source(value: str) -> str:
    """``-`` is stdin, an existing path is read, anything else is taken as literal text."""
    if value == "-":
        return sys.stdin.read()
    if os.path.isfile(value):
        with open(value, encoding="utf-8") as f:
            return f.read()
    return value


def _load(engine: Engine, args):
    term = engine.parse(_read_source(args.expr))
    ctx = EMPTY
    if getattr(args, "context", None):
        ctx = parse_context(engine.store, _read_source(args.context))
    return term, ctx


def cmd_simplify(args, out) -> int:
    engine = Engine()
    term, ctx = _load(engine, args)
    def trace(before, outcome):
        print(f";; {before} ==> {outcome.result}", file=sys.stderr)

    result = engine.simplify(term, ctx, trace=trace if args.trace else None)
    print(result.result, file=out)
    for h in result.side_conditions:
        print(f";; side: {h}", file=out)
    return 0


def cmd_interval(args, out) -> int:
    engine = Engine()
    term, ctx = _load(engine, args)
    r = ainni(term, ctx)
    if not r.flag:
        print("unbounded", file=out)
        return 0
    print(r.interval, file=out)
    for h in r.hyps:
        print(f";; hyp: {h}", file=out)
    return 0


def cmd_eval(args, out) -> int:
    engine = Engine()
    term, _ = _load(engine, args)
    if args.memory:
        state = load_memory_image(_read_source(args.memory))
    else:
        state = ConcreteState.blank()
    if args.i is not None:
        state = state.set_i(args.i)
    if args.s is not None:
        state = state.set_s(args.s)
    value = evaluate(term, state)
    if isinstance(value, ConcreteState):
        out.write(dump_memory_image(value))
    else:
        print(value, file=out)
    return 0


def cmd_fuzz(args, out) -> int:
    config = FuzzConfig(
        seed=args.seed, cases=args.cases, max_writes=args.max_writes,
        mixed=args.mixed == "on", max_value_depth=args.max_value_depth,
        context_noise=args.context_noise,
    )
    report = run_fuzz(config, workers=args.workers)
    out.write(report.render())
    return 1 if report.failed else 0


def cmd_bench(args, out) -> int:
    report = run_bench(args.writes, args.reads, memo=not args.no_memo, seed=args.seed, passes=args.passes)
    out.write(report.render())
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="symstate", description="Symbolic machine-state simplifier")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simplify", help="simplify a term with the state metafunctions")
    sp.add_argument("--expr", required=True, help="term text, a file holding it, or - for stdin")
    sp.add_argument("--context", help="assumption file, one (REL term N) per line")
    sp.add_argument("--trace", action="store_true", help="report every firing on stderr")
    sp.set_defaults(func=cmd_simplify)

    sp = sub.add_parser("interval", help="infer a natural interval for a term")
    sp.add_argument("--expr", required=True)
    sp.add_argument("--context")
    sp.set_defaults(func=cmd_interval)

    sp = sub.add_parser("eval", help="evaluate a term on a concrete state")
    sp.add_argument("--expr", required=True)
    sp.add_argument("--memory", help="memory image file (default: all zero)")
    sp.add_argument("--i", type=int)
    sp.add_argument("--s", type=int)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("fuzz", help="differential test against the concrete machine")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--cases", type=int, default=100)
    sp.add_argument("--max-writes", type=int, default=6)
    sp.add_argument("--mixed", choices=("on", "off"), default="on")
    sp.add_argument("--max-value-depth", type=int, default=2)
    sp.add_argument("--context-noise", type=float, default=0.0)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_fuzz)

    sp = sub.add_parser("bench", help="time a write/read chain with and without memoization")
    sp.add_argument("--writes", type=int, default=1000)
    sp.add_argument("--reads", type=int, default=1000)
    sp.add_argument("--no-memo", action="store_true")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--passes", type=int, default=2)
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    args = build_parser().parse_args(argv)
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))
    try:
        return args.func(args, out)
    except (ParseError, ImageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TermError, ValueError) as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return 3
    except EvalError as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
