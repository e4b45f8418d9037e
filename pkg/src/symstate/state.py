"""Metafunctions for state accessors and updaters, and the memoizing engine.

Updaters (``!R``, ``!I``, ``!S``) applied to ``ST`` or to a hidden state
produce a single hidden nest of writes, newest first, with perfectly
shadowed writes removed.  Accessors (``R``, ``I``, ``S``) applied to a hidden
nest are resolved against the writes; a read that mixes bytes from several
writes and the base state is assembled little-endian from shifted and
truncated pieces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .ainni import EMPTY, Context, ainni, _merge
from .arith import SimplifyOutcome, meta_less, meta_mod
from .terms import (
    FOLDABLE, STATE_READERS, STATE_UPDATERS, Term, TermError, TermStore,
    quote_normal, strip_hides, syntactic_integer, term_sort_key,
)


class ContractError(TermError):
    """A metafunction precondition that is not merely a no-fire case."""


_KIND = {"!R": "MEM", "!I": "ICTR", "!S": "STAT"}
_OP = {v: k for k, v in _KIND.items()}


@dataclass
class WriteEntry:
    kind: str
    value: Term
    addr: Optional[Term] = None
    count: Optional[int] = None


@dataclass
class WriteNest:
    """Decoded state expression: updater entries, newest first, over ``ST``."""

    entries: list = field(default_factory=list)

    @classmethod
    def decode(cls, sigma: Term) -> "WriteNest":
        entries = []
        for node in spine(sigma)[0]:
            if node.op == "!R":
                entries.append(WriteEntry("MEM", node.args[2], node.args[0], node.args[1].value))
            else:
                entries.append(WriteEntry(_KIND[node.op], node.args[0]))
        return cls(entries)

    def encode(self, store: TermStore) -> Term:
        t = store.st
        for e in reversed(self.entries):
            if e.kind == "MEM":
                t = store.app("!R", e.addr, store.const(e.count), e.value, t)
            else:
                t = store.app(_OP[e.kind], e.value, t)
        return t


def spine(sigma: Term):
    """Updater nodes of a state term, newest first, and whether any inner HIDE was seen."""
    nodes = []
    clean = True
    t = sigma
    while t.op != "ST":
        if t.op == "HIDE":
            if t is not sigma:
                clean = False
            t = t.args[0]
            continue
        nodes.append(t)
        t = t.args[-1]
    return nodes, clean


def _rebuild(store: TermStore, nodes, clean: bool, drop: Optional[int]) -> Term:
    """Re-encode a spine without entry ``drop``, sharing the untouched tail."""
    if clean and drop is None:
        return nodes[0] if nodes else store.st
    if clean:
        tail = nodes[drop].args[-1]
        start = drop - 1
    else:
        tail = store.st
        start = len(nodes) - 1
    for i in range(start, -1, -1):
        if i == drop:
            continue
        node = nodes[i]
        tail = store.app(node.op, *node.args[:-1], tail)
    return tail


def _unhide(sigma: Term) -> Optional[Term]:
    """The nest under a hidden state, ``ST`` for ``ST``; None when not in normal form."""
    if sigma.op == "ST":
        return sigma
    if sigma.op == "HIDE":
        return sigma.args[0]
    return None


def settled(t: Term) -> bool:
    """True when ``t`` has nothing left for the rewriter to do."""
    memo = t.store.table("settled")
    st = t.store.st

    def walk(u):
        got = memo.get(u)
        if got is None:
            op = u.op
            if op == "IF" or op in STATE_UPDATERS:
                got = False
            elif op in STATE_READERS:
                sigma = u.args[-1]
                got = sigma is st and all(walk(a) for a in u.args[:-1])
            else:
                got = all(walk(a) for a in u.args)
            memo[u] = got
        return got

    return walk(t)


def present(value: Term) -> Term:
    """Hide policy for extracted values: constants and plain reads of ST stay bare."""
    value = quote_normal(value)
    if value.is_const:
        return value
    if value.op in STATE_READERS and value.args[-1] is value.store.st:
        return value
    return value.store.app("HIDE", value)


def address_frame(a: Term):
    """Split an address into a base (sorted non-constant summands) and a constant offset."""
    memo = a.store.table("address_frame")
    got = memo.get(a)
    if got is not None:
        return got
    base, offset = [], 0
    stack = [a]
    while stack:
        t = stack.pop()
        if t.is_const:
            offset += t.value
        elif t.op == "+":
            stack.extend(t.args)
        elif t.op == "-" and t.args[1].is_const:
            offset -= t.args[1].value
            stack.append(t.args[0])
        else:
            base.append(t)
    got = (tuple(sorted(base, key=term_sort_key)), offset)
    memo[a] = got
    return got


def relative_offset(a: Term, b: Term) -> Optional[int]:
    """``d`` with ``b == a + d`` when both share a syntactic base, else None."""
    if a is b:
        return 0
    base_a, off_a = address_frame(a)
    base_b, off_b = address_frame(b)
    if len(base_a) == len(base_b) and all(x is y for x, y in zip(base_a, base_b)):
        return off_b - off_a
    return None


def offset_address(a: Term, o: int) -> Term:
    """An address term denoting ``a + o``, keeping the shape of ``a`` where possible."""
    store = a.store
    if o == 0:
        return a
    if a.is_const:
        return store.const(a.value + o)
    if a.op == "+":
        x, y = a.args
        if x.is_const:
            c = x.value + o
            return y if c == 0 else store.app("+", store.const(c), y)
        if y.is_const:
            c = y.value + o
            return x if c == 0 else store.app("+", x, store.const(c))
    return store.app("+", store.const(o), a)


def _fits(e: Term, m: int) -> bool:
    r = ainni(e)
    return r.flag and not r.hyps and r.hi < 256 ** m


def _segment_from_write(store: TermStore, w: Term, src: int, m: int) -> Term:
    e = w if syntactic_integer(w) else store.app("IFIX", w)
    if src:
        e = store.app("ASH", e, store.const(-8 * src))
    if not _fits(e, m):
        e = store.app("MOD", e, store.const(256 ** m))
    e = quote_normal(e)
    if e.op == "MOD":
        out = meta_mod(e)
        if out.fired and not out.side_conditions:
            e = out.result
    return e


# ---------------------------------------------------------------------------
# updaters

def _meta_bang_field(t: Term, op: str) -> SimplifyOutcome:
    if t.op != op:
        return SimplifyOutcome.no_fire(t)
    v, sigma = t.args
    nest = _unhide(sigma)
    if nest is None:
        return SimplifyOutcome.no_fire(t)
    v = strip_hides(v)
    if not settled(v):
        return SimplifyOutcome.no_fire(t)
    store = t.store
    nodes, clean = spine(nest)
    drop = next((i for i, node in enumerate(nodes) if node.op == op), None)
    rest = _rebuild(store, nodes, clean, drop)
    return SimplifyOutcome(quote_normal(store.app("HIDE", store.app(op, v, rest))))


def meta_bang_i(t: Term) -> SimplifyOutcome:
    return _meta_bang_field(t, "!I")


def meta_bang_s(t: Term) -> SimplifyOutcome:
    return _meta_bang_field(t, "!S")


def _same_address(a: Term, b: Term, ra, ctx: Context):
    """Hypotheses under which ``a`` and ``b`` are equal, or None if not shown."""
    if relative_offset(a, b) == 0:
        return ()
    if ra is not None and ra.flag and ra.lo == ra.hi:
        rb = ainni(b, ctx)
        if rb.flag and rb.lo == rb.hi == ra.lo:
            return _merge(ra.hyps, rb.hyps)
    return None


def meta_bang_r(t: Term, ctx: Context = EMPTY) -> SimplifyOutcome:
    if t.op != "!R":
        return SimplifyOutcome.no_fire(t)
    a, nt, v, sigma = t.args
    n = nt.value
    if n < 1:
        raise ContractError(f"byte count must be positive: {t}")
    nest = _unhide(sigma)
    if nest is None:
        return SimplifyOutcome.no_fire(t)
    a, v = strip_hides(a), strip_hides(v)
    if not settled(a) or not settled(v):
        return SimplifyOutcome.no_fire(t)
    store = t.store
    nodes, clean = spine(nest)
    ra = None if a.is_const else ainni(a, ctx)
    drop, side = None, ()
    for i, node in enumerate(nodes):
        if node.op != "!R" or node.args[1] is not nt:
            continue
        hyps = _same_address(a, node.args[0], ra, ctx)
        if hyps is not None:
            drop, side = i, hyps
            break
    rest = _rebuild(store, nodes, clean, drop)
    top = store.app("!R", a, nt, v, rest)
    return SimplifyOutcome(quote_normal(store.app("HIDE", top)), side)


# ---------------------------------------------------------------------------
# accessors

def _meta_field(t: Term, op: str) -> SimplifyOutcome:
    if t.op != op:
        return SimplifyOutcome.no_fire(t)
    sigma = t.args[0]
    if sigma.op != "HIDE":
        return SimplifyOutcome.no_fire(t)
    writer = "!" + op
    for node in spine(sigma.args[0])[0]:
        if node.op == writer:
            return SimplifyOutcome(present(node.args[0]))
    return SimplifyOutcome(t.store.app(op, t.store.st))


def meta_i(t: Term) -> SimplifyOutcome:
    return _meta_field(t, "I")


def meta_s(t: Term) -> SimplifyOutcome:
    return _meta_field(t, "S")


def meta_r(t: Term, ctx: Context = EMPTY) -> SimplifyOutcome:
    if t.op != "R":
        return SimplifyOutcome.no_fire(t)
    a, nt, sigma = t.args
    n = nt.value
    if n < 1:
        raise ContractError(f"byte count must be positive: {t}")
    if sigma.op != "HIDE":
        return SimplifyOutcome.no_fire(t)
    a = strip_hides(a)
    if not settled(a):
        return SimplifyOutcome.no_fire(t)
    store = t.store

    # sources[o] is None (base state) or (node, byte offset within that write)
    sources: list = [None] * n
    uncovered = set(range(n))
    side: tuple = ()
    ra = None
    for node in spine(sigma.args[0])[0]:
        if not uncovered:
            break
        if node.op != "!R":
            continue
        b, k = node.args[0], node.args[1].value
        d = relative_offset(a, b)
        if d is not None:
            for o in [o for o in uncovered if d <= o < d + k]:
                sources[o] = (node, o - d)
                uncovered.discard(o)
            continue
        if ra is None:
            ra = ainni(a, ctx)
        if not ra.flag:
            return SimplifyOutcome.no_fire(t)
        rb = ainni(b, ctx)
        if not rb.flag:
            return SimplifyOutcome.no_fire(t)
        read_lo, read_hi = ra.lo + min(uncovered), ra.hi + max(uncovered)
        if read_hi < rb.lo or rb.hi + k - 1 < read_lo:
            side = _merge(side, ra.hyps, rb.hyps)
            continue
        return SimplifyOutcome.no_fire(t)

    # group bytes into maximal runs drawn contiguously from one source
    runs = []
    for o, src in enumerate(sources):
        if runs:
            start, length, first = runs[-1]
            prev = sources[o - 1]
            if src is None and prev is None:
                runs[-1] = (start, length + 1, first)
                continue
            if (src is not None and prev is not None and src[0] is prev[0]
                    and src[1] == prev[1] + 1):
                runs[-1] = (start, length + 1, first)
                continue
        runs.append((o, 1, src))

    summands = []
    for o, m, src in runs:
        if src is None:
            seg = store.app("R", offset_address(a, o), store.const(m), store.st)
        else:
            node, p = src
            seg = _segment_from_write(store, node.args[2], p, m)
        if o:
            seg = store.app("ASH", seg, store.const(8 * o))
        summands.append(quote_normal(seg))
    summands.sort(key=term_sort_key)
    acc = summands[-1]
    for s in reversed(summands[:-1]):
        acc = store.app("+", s, acc)
    return SimplifyOutcome(present(acc), side)


# ---------------------------------------------------------------------------
# engine

@dataclass
class MemoStats:
    hits: int = 0
    misses: int = 0
    evaluations: int = 0


class Engine:
    """A term store plus memo tables for the expensive metafunctions.

    Inputs are copied into the engine's store before lookup, so structurally
    equal terms built elsewhere still hit the cache.
    """

    def __init__(self, store: Optional[TermStore] = None, memo: bool = True):
        self.store = store if store is not None else TermStore()
        self.memo = memo
        self.stats = MemoStats()
        self._tables: dict[str, dict] = {}
        self._contexts: dict[Context, int] = {}

    def parse(self, text: str) -> Term:
        return self.store.parse(text)

    def hons_copy(self, t: Term) -> Term:
        return self.store.copy(t)

    def intern_context(self, ctx: Context) -> Context:
        if any(a.subject.store is not self.store for a in ctx.assumptions):
            from .ainni import Assumption
            ctx = Context(tuple(
                Assumption(self.hons_copy(a.subject), a.relation, a.bound) for a in ctx.assumptions
            ))
        return ctx

    def context_id(self, ctx: Context) -> int:
        cid = self._contexts.get(ctx)
        if cid is None:
            cid = self._contexts[ctx] = len(self._contexts)
        return cid

    def _memoized(self, name, fn, key, *args):
        if self.memo:
            table = self._tables.setdefault(name, {})
            got = table.get(key)
            if got is not None:
                self.stats.hits += 1
                return got
            self.stats.misses += 1
        self.stats.evaluations += 1
        got = fn(*args)
        if self.memo:
            table[key] = got
        return got

    def memoizable_meta_r(self, t: Term, ctx: Context = EMPTY) -> SimplifyOutcome:
        t, ctx = self.hons_copy(t), self.intern_context(ctx)
        return self._memoized("meta_r", meta_r, (t.id, self.context_id(ctx)), t, ctx)

    def memoizable_meta_bang_r(self, t: Term, ctx: Context = EMPTY) -> SimplifyOutcome:
        t, ctx = self.hons_copy(t), self.intern_context(ctx)
        return self._memoized("meta_bang_r", meta_bang_r, (t.id, self.context_id(ctx)), t, ctx)

    def memoizable_meta_mod(self, t: Term, ctx: Context = EMPTY) -> SimplifyOutcome:
        t, ctx = self.hons_copy(t), self.intern_context(ctx)
        return self._memoized("meta_mod", meta_mod, (t.id, self.context_id(ctx)), t, ctx)

    def memoizable_meta_less(self, x: Term, y: Term, ctx: Context = EMPTY):
        x, y, ctx = self.hons_copy(x), self.hons_copy(y), self.intern_context(ctx)
        return self._memoized("meta_less", meta_less, (x.id, y.id, self.context_id(ctx)), x, y, ctx)

    def meta(self, t: Term, ctx: Context = EMPTY) -> SimplifyOutcome:
        """Dispatch ``t`` to the metafunction for its head symbol."""
        op = t.op
        if op == "R":
            return self.memoizable_meta_r(t, ctx)
        if op == "!R":
            return self.memoizable_meta_bang_r(t, ctx)
        if op == "I":
            return meta_i(t)
        if op == "S":
            return meta_s(t)
        if op == "!I":
            return meta_bang_i(t)
        if op == "!S":
            return meta_bang_s(t)
        if op == "MOD":
            return self.memoizable_meta_mod(t, ctx)
        if op == "<":
            verdict = self.memoizable_meta_less(t.args[0], t.args[1], ctx)
            if verdict.value is None:
                return SimplifyOutcome.no_fire(t)
            return SimplifyOutcome(self.store.const(int(verdict.value)), verdict.hyps)
        return SimplifyOutcome.no_fire(t)

    def simplify(self, t: Term, ctx: Context = EMPTY, trace=None) -> SimplifyOutcome:
        """Rewrite inside-out, calling metafunctions only; HIDE'd subterms are left alone.

        ``trace``, when given, is called as ``trace(before, outcome)`` for every firing.
        """
        t = self.hons_copy(t)
        ctx = self.intern_context(ctx)
        store = self.store
        side: list = []
        memo: dict[Term, Term] = {}
        fired = False

        def rw(u):
            nonlocal fired
            got = memo.get(u)
            if got is not None:
                return got
            if not u.args or u.op == "HIDE":
                memo[u] = u
                return u
            args = [rw(x) for x in u.args]
            cur = u if all(x is y for x, y in zip(args, u.args)) else store.app(u.op, *args)
            while True:
                if cur.op in FOLDABLE and all(x.is_const for x in cur.args):
                    out = SimplifyOutcome(quote_normal(cur))
                else:
                    out = self.meta(cur, ctx)
                if not out.fired:
                    break
                fired = True
                if trace is not None:
                    trace(cur, out)
                for h in out.side_conditions:
                    if h not in side:
                        side.append(h)
                nxt = out.result
                # MOD rewrites can enable further MOD rules; everything else is final
                if nxt.op != "MOD" or nxt is cur:
                    cur = nxt
                    break
                cur = nxt
            memo[u] = cur
            return cur

        result = rw(t)
        if not fired:
            return SimplifyOutcome.no_fire(t)
        return SimplifyOutcome(result, tuple(side))
