"""Natural-number interval inference over arithmetic/logical terms.

:func:`ainni` walks a term bottom-up, applying a bounder per operator.  At
``(R a n ST)`` leaves the default range ``[0, 256**n - 1]`` is narrowed by
matching context assumptions, and every assumption that narrowed a bound is
returned as a hypothesis the interval depends on.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

from .machine import ConcreteState, evaluate
from .terms import ParseError, Term, TermStore, build, read_sexpr

RELATIONS = ("<", "<=", ">=", ">")


@dataclass(frozen=True)
class Hyp:
    """A hypothesis ``(< x y)`` that must evaluate true (or false, when not positive)."""

    term: Term
    positive: bool = True

    def holds(self, state: ConcreteState) -> bool:
        return (evaluate(self.term, state) != 0) == self.positive

    def __str__(self):
        x, y = self.term.args
        flip = x.is_const and not y.is_const
        if self.positive:
            return f"(> {y} {x})" if flip else f"(< {x} {y})"
        return f"(<= {y} {x})" if flip else f"(NOT {self.term})"


def parse_hyp(store: TermStore, text: str) -> Hyp:
    form = read_sexpr(text)
    if not isinstance(form, list) or len(form) not in (2, 3) or not isinstance(form[0], str):
        raise ParseError(f"not a comparison: {text.strip()}")
    head = form[0].upper()
    if (head == "NOT") != (len(form) == 2):
        raise ParseError(f"not a comparison: {text.strip()}")
    if head == "NOT":
        inner = build(store, form[1])
        if inner.op != "<":
            raise ParseError("NOT must wrap a < comparison")
        return Hyp(inner, False)
    x, y = build(store, form[1]), build(store, form[2])
    if head == "<":
        return Hyp(store.app("<", x, y), True)
    if head == ">":
        return Hyp(store.app("<", y, x), True)
    if head == "<=":
        return Hyp(store.app("<", y, x), False)
    if head == ">=":
        return Hyp(store.app("<", x, y), False)
    raise ParseError(f"unknown relation {form[0]!r}")


@dataclass(frozen=True)
class Assumption:
    subject: Term
    relation: str
    bound: int

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")
        if self.bound < 0:
            raise ValueError("assumption bounds are naturals")

    def hyp(self) -> Hyp:
        store = self.subject.store
        n = store.const(self.bound)
        rel = self.relation
        if rel == "<":
            return Hyp(store.app("<", self.subject, n), True)
        if rel == ">":
            return Hyp(store.app("<", n, self.subject), True)
        if rel == "<=":
            return Hyp(store.app("<", n, self.subject), False)
        return Hyp(store.app("<", self.subject, n), False)

    def __str__(self):
        return f"({self.relation} {self.subject} {self.bound})"


@dataclass(frozen=True)
class Context:
    """Ordered inequality assumptions about subterms; exact duplicates are dropped."""

    assumptions: tuple = ()

    def __post_init__(self):
        seen = dict.fromkeys(self.assumptions)
        if len(seen) != len(self.assumptions):
            object.__setattr__(self, "assumptions", tuple(seen))

    def __len__(self):
        return len(self.assumptions)

    def __str__(self):
        return "\n".join(str(a) for a in self.assumptions)

    def add(self, assumption: Assumption) -> "Context":
        return Context(self.assumptions + (assumption,))

    @cached_property
    def _by_subject(self) -> dict:
        index: dict = {}
        for a in self.assumptions:
            index.setdefault(a.subject, []).append(a)
        return index

    def bounds(self, subject: Term):
        """Tightest (lo, lo_assumption, hi, hi_assumption) known for ``subject``.

        Missing bounds come back as ``None``.  Ties keep the earliest assumption.
        """
        lo = hi = lo_a = hi_a = None
        for a in self._by_subject.get(subject, ()):
            if a.relation == "<":
                b, upper = a.bound - 1, True
            elif a.relation == "<=":
                b, upper = a.bound, True
            elif a.relation == ">":
                b, upper = a.bound + 1, False
            else:
                b, upper = a.bound, False
            if upper and (hi is None or b < hi):
                hi, hi_a = b, a
            elif not upper and (lo is None or b > lo):
                lo, lo_a = b, a
        return lo, lo_a, hi, hi_a


EMPTY = Context()


def parse_context(store: TermStore, text: str) -> Context:
    """One ``(REL term N)`` per line; blank lines and ``;`` comments are skipped."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        form = read_sexpr(line)
        if not isinstance(form, list) or len(form) != 3 or form[0] not in RELATIONS:
            raise ParseError(f"line {lineno}: expected (REL term N), got {line!r}")
        subject = build(store, form[1])
        bound = form[2]
        if not isinstance(bound, str) or not bound.isdigit():
            raise ParseError(f"line {lineno}: bound must be a decimal natural")
        out.append(Assumption(subject, form[0], int(bound)))
    return Context(tuple(out))


@dataclass(frozen=True)
class Interval:
    lo: int
    hi: int

    def __post_init__(self):
        if not 0 <= self.lo <= self.hi:
            raise ValueError(f"bad natural interval [{self.lo}, {self.hi}]")

    def __contains__(self, x):
        return self.lo <= x <= self.hi

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"


@dataclass(frozen=True)
class InferenceResult:
    flag: bool
    hyps: tuple = ()
    interval: Optional[Interval] = None

    @property
    def lo(self):
        return self.interval.lo

    @property
    def hi(self):
        return self.interval.hi


UNBOUNDED = InferenceResult(False)


def _merge(*hyp_lists):
    out = []
    for hs in hyp_lists:
        for h in hs:
            if h not in out:
                out.append(h)
    return tuple(out)


def ainni(x: Term, ctx: Context = EMPTY) -> InferenceResult:
    """Infer a natural interval containing ``x``; ``flag`` is False when none can be found."""
    store = x.store
    memo: dict[Term, Optional[tuple]] = {}

    def leaf(t):
        n = t.args[1].value
        if n <= 0:
            return None
        top = 256 ** n - 1
        lo, lo_a, hi, hi_a = ctx.bounds(t)
        used = []
        new_lo, new_hi = 0, top
        if lo is not None and lo > 0:
            new_lo = lo
            used.append(lo_a.hyp())
        if hi is not None and hi < top:
            new_hi = hi
            used.append(hi_a.hyp())
        if new_lo > new_hi:
            # unsatisfiable assumptions: any interval is vacuously sound
            new_lo = new_hi = max(0, min(new_lo, top))
        return new_lo, new_hi, tuple(used)

    def walk(t):
        if t in memo:
            return memo[t]
        got = infer(t)
        memo[t] = got
        return got

    def infer(t):
        op = t.op
        if op == "CONST":
            return (t.value, t.value, ()) if t.value >= 0 else None
        if op in ("HIDE", "IFIX"):
            return walk(t.args[0])
        if op == "R":
            return leaf(t) if t.args[2] is store.st else None
        if op in ("ASH", "MOD"):
            k = t.args[1]
            if not k.is_const:
                return None
            r = walk(t.args[0])
            if r is None:
                return None
            lo, hi, hs = r
            c = k.value
            if op == "ASH":
                if c >= 0:
                    return lo << c, hi << c, hs
                return lo >> -c, hi >> -c, hs
            if c == 0:
                return r
            if c < 0:
                return None
            return (lo, hi, hs) if hi < c else (0, c - 1, hs)
        if op in ("+", "-", "*", "LOGAND", "LOGIOR", "LOGXOR"):
            r1 = walk(t.args[0])
            if r1 is None:
                return None
            r2 = walk(t.args[1])
            if r2 is None:
                return None
            lo1, hi1, h1 = r1
            lo2, hi2, h2 = r2
            if op == "+":
                return lo1 + lo2, hi1 + hi2, _merge(h1, h2)
            if op == "*":
                return lo1 * lo2, hi1 * hi2, _merge(h1, h2)
            if op == "-":
                nonneg = Hyp(store.app("<", t.args[0], t.args[1]), False)
                return max(0, lo1 - hi2), max(0, hi1 - lo2), _merge(h1, h2, (nonneg,))
            if op == "LOGAND":
                return 0, min(hi1, hi2), _merge(h1, h2)
            bits = max(hi1.bit_length(), hi2.bit_length())
            return 0, (1 << bits) - 1, _merge(h1, h2)
        return None

    r = walk(x)
    if r is None:
        return UNBOUNDED
    lo, hi, hs = r
    return InferenceResult(True, hs, Interval(lo, hi))


def bound_read_span(a: Term, n: int, ctx: Context = EMPTY) -> InferenceResult:
    """Interval of byte addresses touched by reading ``n`` bytes at ``a``."""
    if n < 1:
        raise ValueError("byte count must be positive")
    r = ainni(a, ctx)
    if not r.flag:
        return r
    return InferenceResult(True, r.hyps, Interval(r.lo, r.hi + n - 1))
