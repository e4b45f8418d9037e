"""Syntactic MOD simplification and interval-based inequality decisions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .ainni import EMPTY, Context, ainni, _merge
from .machine import floor_mod
from .terms import Term, quote_normal, syntactic_integer


@dataclass(frozen=True)
class SimplifyOutcome:
    """``result`` equals the input in every state where all side conditions hold."""

    result: Term
    side_conditions: tuple = ()
    fired: bool = True

    @classmethod
    def no_fire(cls, term: Term) -> "SimplifyOutcome":
        return cls(term, (), False)


def flatten_sum(t: Term) -> list[Term]:
    if t.op != "+":
        return [t]
    return flatten_sum(t.args[0]) + flatten_sum(t.args[1])


def build_sum(store, summands) -> Term:
    """Right-associated binary sum of a non-empty sequence."""
    acc = summands[-1]
    for s in reversed(summands[:-1]):
        acc = store.app("+", s, acc)
    return acc


def _below(x: Term, k: int, ctx: Context):
    r = ainni(x, ctx)
    if r.flag and r.hi < k:
        return r.hyps
    return None


def meta_mod(x: Term, ctx: Context = EMPTY) -> SimplifyOutcome:
    """Apply the first matching MOD rule to ``(MOD e k)`` with constant ``k``."""
    if x.op != "MOD" or not x.args[1].is_const:
        return SimplifyOutcome.no_fire(x)
    store = x.store
    e, kt = x.args
    k = kt.value

    def done(t, hyps=()):
        return SimplifyOutcome(quote_normal(t), tuple(hyps))

    if k == 0:
        return done(e) if syntactic_integer(e) else SimplifyOutcome.no_fire(x)
    if e.is_const:
        return done(store.const(floor_mod(e.value, k)))
    if k < 0:
        return SimplifyOutcome.no_fire(x)

    if e.op == "MOD" and e.args[1].is_const:
        z, j = e.args[0], e.args[1].value
        if 0 < j <= k:
            return done(e)
        if j >= 0 and j % k == 0 and syntactic_integer(z):
            return done(store.app("MOD", z, kt))

    if e.op == "R" and 256 ** e.args[1].value <= k:
        return done(e)

    if e.op == "+":
        summands = flatten_sum(e)
        if all(syntactic_integer(s) for s in summands):
            changed = False
            for i, s in enumerate(summands):
                if (s.op == "MOD" and s.args[1].is_const and s.args[1].value >= 0
                        and s.args[1].value % k == 0 and syntactic_integer(s.args[0])):
                    summands[i] = s.args[0]
                    changed = True
            if changed:
                new_sum = build_sum(store, summands)
                hyps = _below(new_sum, k, ctx)
                if hyps is not None:
                    return done(new_sum, hyps)
                return done(store.app("MOD", new_sum, kt))

    hyps = _below(e, k, ctx)
    if hyps is not None:
        return done(e, hyps)
    return SimplifyOutcome.no_fire(x)


@dataclass(frozen=True)
class LessVerdict:
    """Outcome of deciding ``(< x y)``: ``value`` is True, False, or None for unknown."""

    value: Optional[bool]
    hyps: tuple = ()


def meta_less(x: Term, y: Term, ctx: Context = EMPTY) -> LessVerdict:
    if x.is_const and y.is_const:
        return LessVerdict(x.value < y.value)
    rx = ainni(x, ctx)
    if not rx.flag:
        return LessVerdict(None)
    ry = ainni(y, ctx)
    if not ry.flag:
        return LessVerdict(None)
    if rx.hi < ry.lo:
        return LessVerdict(True, _merge(rx.hyps, ry.hyps))
    if ry.hi <= rx.lo:
        return LessVerdict(False, _merge(rx.hyps, ry.hyps))
    return LessVerdict(None)
