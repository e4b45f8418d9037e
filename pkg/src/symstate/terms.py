"""Hash-consed terms over the machine-state grammar.

Every term lives in a :class:`TermStore`.  Structurally equal terms built in
the same store are the same Python object, so identity comparison (``is``)
is structural equality and terms can be used directly as dictionary keys.
"""

from __future__ import annotations

import re
from functools import cmp_to_key
from itertools import count

from .machine import VALUE_OPS

ARITY = {
    "R": 3, "!R": 4, "I": 1, "!I": 2, "S": 1, "!S": 2, "HIDE": 1,
    "+": 2, "-": 2, "*": 2, "MOD": 2, "ASH": 2,
    "LOGAND": 2, "LOGIOR": 2, "LOGXOR": 2, "IFIX": 1, "IF": 3, "<": 2,
}
STATE_READERS = frozenset({"R", "I", "S"})
STATE_UPDATERS = frozenset({"!R", "!I", "!S"})
# position of the state-sorted argument of each state operator
STATE_ARG = {"R": 2, "!R": 3, "I": 0, "!I": 1, "S": 0, "!S": 1}
FOLDABLE = frozenset(VALUE_OPS)

STATE = "state"
VALUE = "value"


class TermError(Exception):
    """A term violates the grammar (arity, sorts, byte counts)."""


class ParseError(TermError):
    pass


class Term:
    """An interned term.  Never construct directly; use a :class:`TermStore`."""

    __slots__ = ("op", "args", "value", "id", "store", "size", "depth", "sort", "has_hide")

    def __init__(self, op, args, value, id_, store):
        self.op = op
        self.args = args
        self.value = value
        self.id = id_
        self.store = store
        self.size = 1 + sum(a.size for a in args)
        self.depth = 1 + max((a.depth for a in args), default=0)
        self.has_hide = op == "HIDE" or any(a.has_hide for a in args)
        if op in STATE_UPDATERS or op == "ST":
            self.sort = STATE
        elif op == "HIDE":
            self.sort = args[0].sort
        else:
            self.sort = VALUE

    @property
    def is_const(self) -> bool:
        return self.op == "CONST"

    def __str__(self):
        return to_sexpr(self)

    def __repr__(self):
        return f"Term({to_sexpr(self)!r})"

    def __reduce__(self):
        raise TypeError("terms are bound to their store; serialize with to_sexpr")


class TermStore:
    """Interning table.  One store and its terms form one isolation unit."""

    def __init__(self):
        self._table: dict[tuple, Term] = {}
        self._ids = count()
        self.nodes_created = 0
        self.intern_hits = 0
        # per-store memo tables for pure derived data, keyed by term
        self.memo: dict[str, dict] = {}
        self.st = self._intern(("ST",), "ST", (), None)

    def __len__(self):
        return len(self._table)

    def _intern(self, key, op, args, value):
        term = self._table.get(key)
        if term is not None:
            self.intern_hits += 1
            return term
        term = Term(op, args, value, next(self._ids), self)
        self._table[key] = term
        self.nodes_created += 1
        return term

    def table(self, name: str) -> dict:
        tab = self.memo.get(name)
        if tab is None:
            tab = self.memo[name] = {}
        return tab

    def const(self, value: int) -> Term:
        value = int(value)
        return self._intern(("CONST", value), "CONST", (), value)

    def app(self, op: str, *args: Term) -> Term:
        arity = ARITY.get(op)
        if arity is None:
            raise TermError(f"unknown operator {op!r}")
        if len(args) != arity:
            raise TermError(f"{op} expects {arity} arguments, got {len(args)}")
        assert all(a.store is self for a in args), "term from a different store"
        state_pos = STATE_ARG.get(op)
        for pos, arg in enumerate(args):
            if op == "HIDE":
                break
            want = STATE if pos == state_pos else VALUE
            if arg.sort != want:
                raise TermError(f"argument {pos} of {op} must be a {want} term: {to_sexpr(arg)}")
        if op in ("R", "!R") and not args[1].is_const:
            raise TermError(f"byte count of {op} must be a constant: {to_sexpr(args[1])}")
        return self._intern((op,) + tuple(a.id for a in args), op, tuple(args), None)

    def copy(self, term: Term) -> Term:
        """Re-intern ``term`` (possibly from another store) into this store."""
        if term.store is self:
            return term
        memo: dict[Term, Term] = {}

        def walk(t):
            got = memo.get(t)
            if got is None:
                if t.op == "CONST":
                    got = self.const(t.value)
                elif t.op == "ST":
                    got = self.st
                else:
                    got = self.app(t.op, *(walk(a) for a in t.args))
                memo[t] = got
            return got

        return walk(term)

    def parse(self, text: str) -> Term:
        return parse(self, text)


_TOKEN = re.compile(r"\(|\)|[^\s()]+")
_INT = re.compile(r"-?[0-9]+$")


def read_sexpr(text: str):
    """Read one s-expression into nested lists of atom strings."""
    tokens = _TOKEN.findall(text)
    if not tokens:
        raise ParseError("empty input")
    stack: list[list] = []
    result = None
    for pos, tok in enumerate(tokens):
        if tok == "(":
            stack.append([])
            continue
        if tok == ")":
            if not stack:
                raise ParseError("unbalanced ')'")
            item = stack.pop()
        else:
            item = tok
        if stack:
            stack[-1].append(item)
        else:
            if pos != len(tokens) - 1:
                raise ParseError("trailing input after expression")
            result = item
    if stack:
        raise ParseError("unterminated list")
    return result


def build(store: TermStore, form) -> Term:
    """Turn a form produced by :func:`read_sexpr` into an interned term."""
    if isinstance(form, str):
        if _INT.match(form):
            return store.const(int(form))
        if form.upper() == "ST":
            return store.st
        raise ParseError(f"unknown symbol {form!r}")
    if not form:
        raise ParseError("empty application")
    head = form[0]
    if not isinstance(head, str):
        raise ParseError("operator position holds a list")
    op = head.upper()
    if op not in ARITY:
        raise ParseError(f"unknown operator {head!r}")
    args = [build(store, f) for f in form[1:]]
    try:
        return store.app(op, *args)
    except TermError as exc:
        raise ParseError(str(exc)) from None


def parse(store: TermStore, text: str) -> Term:
    return build(store, read_sexpr(text))


def to_sexpr(term: Term) -> str:
    parts: list[str] = []

    def emit(t):
        if t.op == "CONST":
            parts.append(str(t.value))
        elif t.op == "ST":
            parts.append("ST")
        else:
            parts.append("(" + t.op)
            for a in t.args:
                parts.append(" ")
                emit(a)
            parts.append(")")

    emit(term)
    return "".join(parts)


def quote_normal(term: Term) -> Term:
    """Fold every arithmetic/logical application whose arguments are all constants."""
    store = term.store
    memo = store.table("quote_normal")

    def walk(t):
        got = memo.get(t)
        if got is not None:
            return got
        if not t.args:
            got = t
        else:
            args = [walk(a) for a in t.args]
            if t.op in FOLDABLE and all(a.op == "CONST" for a in args):
                got = store.const(VALUE_OPS[t.op](*(a.value for a in args)))
            elif all(x is y for x, y in zip(args, t.args)):
                got = t
            else:
                got = store.app(t.op, *args)
        memo[t] = got
        return got

    return walk(term)


_ALWAYS_INTEGER = frozenset({"CONST", "R", "I", "LOGAND", "LOGIOR", "LOGXOR", "MOD", "IFIX"})


def syntactic_integer(term: Term) -> bool:
    """True when the shape of ``term`` alone shows it is integer valued."""
    memo = term.store.table("syntactic_integer")

    def walk(t):
        got = memo.get(t)
        if got is None:
            op = t.op
            if op in _ALWAYS_INTEGER:
                got = True
            elif op in ("+", "-", "*"):
                got = walk(t.args[0]) and walk(t.args[1])
            elif op in ("ASH", "HIDE"):
                got = walk(t.args[0])
            else:
                got = False
            memo[t] = got
        return got

    return walk(term)


def strip_hides(term: Term) -> Term:
    """Remove every HIDE wrapper.  Subterms without a HIDE are shared, not copied."""
    if not term.has_hide:
        return term
    store = term.store
    memo = store.table("strip_hides")

    def walk(t):
        if not t.has_hide:
            return t
        got = memo.get(t)
        if got is None:
            if t.op == "HIDE":
                got = walk(t.args[0])
            else:
                got = store.app(t.op, *(walk(a) for a in t.args))
            memo[t] = got
        return got

    return walk(term)


def _op_rank(t: Term):
    if t.op == "CONST":
        return (0, t.value, "")
    if t.op == "ST":
        return (1, 0, "")
    return (2, 0, t.op)


def term_order(t1: Term, t2: Term) -> int:
    """Deterministic total order: -1, 0 or 1.

    Smaller trees come first; ties break on the head (constants by value,
    then ST, then operators by name) and then on the arguments left to right.
    """
    if t1 is t2:
        return 0
    if t1.size != t2.size:
        return -1 if t1.size < t2.size else 1
    r1, r2 = _op_rank(t1), _op_rank(t2)
    if r1 != r2:
        return -1 if r1 < r2 else 1
    for a, b in zip(t1.args, t2.args):
        c = term_order(a, b)
        if c:
            return c
    return 0


term_sort_key = cmp_to_key(term_order)
