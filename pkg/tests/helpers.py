"""Random generators shared by the property tests."""

import random

from symstate.ainni import Assumption, Context
from symstate.machine import M_SIZE, ConcreteState, evaluate

ARITH_OPS = ("+", "-", "*", "LOGAND", "LOGIOR", "LOGXOR")


def random_state(rng: random.Random) -> ConcreteState:
    return ConcreteState(rng.randrange(1 << 16), rng.randrange(-500, 500), rng.randbytes(M_SIZE))


def random_read(store, rng, max_addr=256):
    n = rng.choice((1, 2, 4, 8))
    return store.app("R", store.const(rng.randrange(max_addr)), store.const(n), store.st)


def random_arith(store, rng, depth, reads, unsupported=0.0):
    """A random term over the operators interval inference understands."""
    c = store.const
    if depth == 0 or rng.random() < 0.3:
        roll = rng.random()
        if roll < unsupported:
            return store.app("S", store.st)
        if roll < 0.4:
            return c(rng.choice((0, 1, 3, 7, 31, 255, rng.randrange(1 << 20))))
        return rng.choice(reads)
    op = rng.choice(ARITH_OPS + ("ASH", "MOD", "IFIX", "HIDE"))
    sub = depth - 1
    if op in ("IFIX", "HIDE"):
        return store.app(op, random_arith(store, rng, sub, reads, unsupported))
    if op == "ASH":
        return store.app("ASH", random_arith(store, rng, sub, reads, unsupported), c(rng.randrange(-20, 9)))
    if op == "MOD":
        return store.app("MOD", random_arith(store, rng, sub, reads, unsupported), c(rng.choice((0, 1, 2, 10, 256, 1000))))
    return store.app(op, random_arith(store, rng, sub, reads, unsupported),
                     random_arith(store, rng, sub, reads, unsupported))


def consistent_context(store, rng, reads, state, noise=0.0):
    """Assumptions on the given reads that hold in ``state`` (unless noisy)."""
    out = []
    for r in reads:
        if rng.random() < 0.5:
            continue
        v = evaluate(r, state)
        rel = rng.choice(("<", "<=", ">", ">="))
        slack = rng.choice((0, 1, 5, 100))
        if rng.random() < noise:
            bound = rng.randrange(0, 1 << 16)
        elif rel == "<":
            bound = v + 1 + slack
        elif rel == "<=":
            bound = v + slack
        elif rel == ">":
            if v == 0:
                continue
            bound = max(0, v - 1 - slack)
        else:
            bound = max(0, v - slack)
        out.append(Assumption(r, rel, bound))
    return Context(tuple(out))


def random_state_term(store, rng, depth):
    """A random state term over constant in-bounds addresses."""
    if depth == 0 or rng.random() < 0.25:
        return store.st
    inner = random_state_term(store, rng, depth - 1)
    roll = rng.random()
    if roll < 0.15:
        return store.app("!I", random_value_term(store, rng, depth - 1), inner)
    if roll < 0.3:
        return store.app("!S", random_value_term(store, rng, depth - 1), inner)
    if roll < 0.4:
        return store.app("HIDE", inner)
    n = rng.choice((1, 2, 4, 8))
    return store.app("!R", store.const(rng.randrange(64)), store.const(n),
                     random_value_term(store, rng, depth - 1), inner)


def random_value_term(store, rng, depth):
    """A random value term over the whole grammar; always evaluable."""
    c = store.const
    if depth == 0 or rng.random() < 0.3:
        roll = rng.random()
        if roll < 0.5:
            return c(rng.randrange(-300, 300))
        if roll < 0.8:
            n = rng.choice((1, 2, 4, 8))
            return store.app("R", c(rng.randrange(64)), c(n), random_state_term(store, rng, min(depth, 1)))
        return store.app(rng.choice(("I", "S")), random_state_term(store, rng, min(depth, 1)))
    sub = depth - 1
    op = rng.choice(("+", "-", "*", "MOD", "ASH", "LOGAND", "LOGIOR", "LOGXOR", "IFIX", "HIDE", "IF", "<"))
    if op in ("IFIX", "HIDE"):
        return store.app(op, random_value_term(store, rng, sub))
    if op == "IF":
        return store.app("IF", random_value_term(store, rng, sub), random_value_term(store, rng, sub),
                         random_value_term(store, rng, sub))
    if op == "ASH":
        return store.app("ASH", random_value_term(store, rng, sub), c(rng.randrange(-16, 17)))
    return store.app(op, random_value_term(store, rng, sub), random_value_term(store, rng, sub))


def agree(before, after, side_conditions=(), trials=200, seed=0, prepare=None):
    """Count states (satisfying the side conditions) where both terms evaluate equal.

    Returns (checked, mismatches).  ``prepare`` may adjust each random state so
    that side conditions are likely to hold.
    """
    rng = random.Random(seed)
    checked = mismatches = 0
    for _ in range(trials):
        state = random_state(rng)
        if prepare is not None:
            state = prepare(rng, state)
        if not all(h.holds(state) for h in side_conditions):
            continue
        checked += 1
        a, b = evaluate(before, state), evaluate(after, state)
        if isinstance(a, ConcreteState):
            same = (a.i, a.s, a.mem) == (b.i, b.s, b.mem)
        else:
            same = a == b
        mismatches += not same
    return checked, mismatches


def nest_entries(state_term):
    """Decoded entries of a produced state term (under its single HIDE)."""
    from symstate.state import WriteNest
    assert state_term.op == "HIDE"
    return WriteNest.decode(state_term.args[0]).entries


def shadow_free(state_term) -> bool:
    from symstate.state import relative_offset
    entries = nest_entries(state_term)
    mem = [e for e in entries if e.kind == "MEM"]
    for i, x in enumerate(mem):
        for y in mem[i + 1:]:
            if x.count == y.count and relative_offset(x.addr, y.addr) == 0:
                return False
    kinds = [e.kind for e in entries]
    return kinds.count("ICTR") <= 1 and kinds.count("STAT") <= 1


def probe_equal(t1, t2, state, rng, probes=64, max_addr=M_SIZE - 8):
    """Observational equality of two state terms at random (addr, len) probes and I/S."""
    s1, s2 = evaluate(t1, state), evaluate(t2, state)
    if (s1.i, s1.s) != (s2.i, s2.s):
        return False
    for _ in range(probes):
        a, n = rng.randint(0, max_addr), rng.randint(1, 8)
        if s1.read(a, n) != s2.read(a, n):
            return False
    return True


def shadow_case(store, rng):
    """A write, arbitrary later writes, then a perfectly shadowing write.

    Returns (input term, address term, count) with the shadowing write on top
    of a hidden nest that still holds the shadowed one.
    """
    c = store.const
    index = store.app("R", c(5200 + rng.randrange(100)), c(1), store.st)
    symbolic = rng.random() < 0.5

    def addr(off):
        if symbolic:
            return store.app("+", c(64 + off), store.app("*", c(8), index))
        return c(off)

    def value():
        roll = rng.random()
        if roll < 0.5:
            return c(rng.randrange(-2**40, 2**64))
        if roll < 0.8:
            return store.app("R", c(rng.randrange(4000)), c(rng.choice((1, 2, 4, 8))), store.st)
        return store.app("+", store.app("I", store.st), c(rng.randrange(1000)))

    n = rng.choice((1, 2, 4, 8))
    a_off = rng.randrange(40)
    nest = store.app("!R", addr(a_off), c(n), value(), store.st)
    for _ in range(rng.randint(0, 5)):
        roll = rng.random()
        if roll < 0.15:
            nest = store.app("!I", value(), nest)
        elif roll < 0.3:
            nest = store.app("!S", value(), nest)
        else:
            # intervening writes may overlap the shadowed one in any way
            off = rng.randrange(max(0, a_off - 8), a_off + 10)
            nest = store.app("!R", addr(off), c(rng.choice((1, 2, 4, 8))), value(), nest)
    shadowed_count = sum(1 for _ in _mem_nodes(nest))
    top = store.app("!R", addr(a_off), c(n), value(), store.app("HIDE", nest))
    return top, shadowed_count


def _mem_nodes(t):
    while t.op != "ST":
        if t.op == "!R":
            yield t
        t = t.args[-1]


SAMPLE = "(+ 288 (* 8 (LOGAND 31 (ASH (R 4520 8 ST) -3))))"

# (rule, input, expected result, context lines); "6+7" is rule 6 followed by rule 7
RULE_CASES = [
    ("1", "(MOD (+ (R 0 4 ST) 9) 0)", "(+ (R 0 4 ST) 9)", ""),
    ("2", "(MOD 10 4)", "2", ""),
    ("2", "(MOD -10 4)", "2", ""),
    ("3", "(MOD (MOD (R 0 1 ST) 8) 16)", "(MOD (R 0 1 ST) 8)", ""),
    ("3", "(MOD (MOD (S ST) 16) 16)", "(MOD (S ST) 16)", ""),
    ("4", "(MOD (MOD (R 0 4 ST) 4096) 256)", "(MOD (R 0 4 ST) 256)", ""),
    ("4", "(MOD (MOD (LOGXOR (I ST) (R 0 8 ST)) 65536) 16)", "(MOD (LOGXOR (I ST) (R 0 8 ST)) 16)", ""),
    ("5", "(MOD (R 4 1 ST) 256)", "(R 4 1 ST)", ""),
    ("5", "(MOD (R 4 2 ST) 100000)", "(R 4 2 ST)", ""),
    ("6", "(MOD (+ (MOD (R 0 8 ST) 4096) (R 8 8 ST)) 256)", "(MOD (+ (R 0 8 ST) (R 8 8 ST)) 256)", ""),
    ("6", "(MOD (+ (I ST) (+ (MOD (R 0 8 ST) 512) (MOD (R 8 8 ST) 1024))) 512)",
        "(MOD (+ (I ST) (+ (R 0 8 ST) (R 8 8 ST))) 512)", ""),
    ("6+7", "(MOD (+ (MOD (R 0 1 ST) 512) (R 1 1 ST)) 512)", "(+ (R 0 1 ST) (R 1 1 ST))", ""),
    ("6+7", "(MOD (+ (MOD (R 0 1 ST) 2048) (* 4 (R 8 4 ST))) 1024)", "(+ (R 0 1 ST) (* 4 (R 8 4 ST)))",
        "(< (R 8 4 ST) 100)"),
    ("7", f"(MOD {SAMPLE} 1024)", SAMPLE, ""),
    ("7", "(MOD (LOGAND (R 0 4 ST) 255) 256)", "(LOGAND (R 0 4 ST) 255)", ""),
    ("7", "(MOD (+ 3200 (* 8 (R 16 4 ST))) 4096)", "(+ 3200 (* 8 (R 16 4 ST)))", "(<= (R 16 4 ST) 15)"),
]


def mod_case_prepare(context):
    """State adjuster that makes a rule case's context assumption true."""
    if "(R 8 4 ST)" in context:
        return lambda rng, s: s.write(8, 4, rng.randrange(100))
    if "(R 16 4 ST)" in context:
        return lambda rng, s: s.write(16, 4, rng.randrange(16))
    return None
