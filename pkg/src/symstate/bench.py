"""Memoization and hash-consing benchmark over a long chain of writes and reads."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from .state import Engine, meta_bang_i, spine
from .terms import strip_hides, to_sexpr

SLOTS = 48
FRAME_START = 512
INDEX_CELL = 4000
# values built from earlier reads are restarted once they get this deep
MAX_VALUE_DEPTH = 24


@dataclass
class PassStats:
    seconds: float
    hits: int
    lookups: int

    @property
    def hit_rate(self) -> float:
        return self.hits / self.lookups if self.lookups else 0.0


@dataclass
class BenchReport:
    writes: int
    reads: int
    memo: bool
    seed: int
    passes: list = field(default_factory=list)
    hits: int = 0
    misses: int = 0
    evaluations: int = 0
    nodes: int = 0
    intern_hits: int = 0
    nest_depth: int = 0
    reparse_new_nodes: int = 0

    @property
    def total_seconds(self) -> float:
        return sum(p.seconds for p in self.passes)

    def render(self) -> str:
        lines = [f"bench: writes={self.writes} reads={self.reads} memo={'on' if self.memo else 'off'} seed={self.seed}"]
        for i, p in enumerate(self.passes, 1):
            lines.append(f"pass {i}: {p.seconds:.4f} s, memo hit rate {100 * p.hit_rate:.1f}% ({p.hits}/{p.lookups})")
        lines += [
            f"total: {self.total_seconds:.4f} s",
            f"memo: hits={self.hits} misses={self.misses} evaluations={self.evaluations}",
            f"store: nodes={self.nodes} intern-hits={self.intern_hits}",
            f"final nest depth: {self.nest_depth}",
            f"reparse of final state: {self.reparse_new_nodes} new nodes",
        ]
        return "\n".join(lines) + "\n"


def _script(writes: int, reads: int, seed: int):
    """The operation stream; identical on every pass."""
    rng = random.Random(seed)
    kinds = ["w"] * writes + ["r"] * reads
    rng.shuffle(kinds)
    ops = []
    for kind in kinds:
        framed = rng.random() < 0.2
        if kind == "w":
            roll = rng.random()
            if roll < 0.03:
                ops.append(("i", rng.randrange(1 << 16)))
                continue
            slot, n = rng.randrange(SLOTS), rng.choice((4, 8))
            ops.append(("w", framed, 8 * slot, n, rng.randrange(1 << 16)))
        else:
            ops.append(("r", framed, 8 * rng.randrange(SLOTS) + rng.randrange(8), rng.choice((1, 2, 4, 8))))
    return ops


def run_bench(writes: int = 1000, reads: int = 1000, memo: bool = True, seed: int = 0, passes: int = 2) -> BenchReport:
    engine = Engine(memo=memo)
    s = engine.store
    index = s.app("R", s.const(INDEX_CELL), s.const(1), s.st)
    frame = s.app("*", s.const(8), index)
    ops = _script(writes, reads, seed)

    def address(framed, off):
        if framed:
            return s.app("+", s.const(FRAME_START + off), frame)
        return s.const(off)

    report = BenchReport(writes, reads, memo, seed)
    state = s.st
    for _ in range(passes):
        state = s.st
        last = s.app("R", s.const(0), s.const(4), s.st)
        before_hits = engine.stats.hits
        before_lookups = engine.stats.hits + engine.stats.misses if memo else engine.stats.evaluations
        start = time.perf_counter()
        for op in ops:
            if op[0] == "i":
                state = meta_bang_i(s.app("!I", s.const(op[1]), state)).result
            elif op[0] == "w":
                _, framed, off, n, c = op
                base = strip_hides(last)
                if base.depth > MAX_VALUE_DEPTH:
                    base = s.app("R", s.const(off), s.const(4), s.st)
                value = s.app("+", base, s.const(c))
                t = s.app("!R", address(framed, off), s.const(n), value, state)
                out = engine.memoizable_meta_bang_r(t)
                if out.fired:
                    state = out.result
            else:
                _, framed, off, n = op
                out = engine.memoizable_meta_r(s.app("R", address(framed, off), s.const(n), state))
                if out.fired:
                    last = out.result
        elapsed = time.perf_counter() - start
        lookups = (engine.stats.hits + engine.stats.misses if memo else engine.stats.evaluations) - before_lookups
        report.passes.append(PassStats(elapsed, engine.stats.hits - before_hits, lookups))

    report.hits = engine.stats.hits
    report.misses = engine.stats.misses
    report.evaluations = engine.stats.evaluations
    report.nest_depth = len(spine(state)[0])
    text = to_sexpr(state)
    created = s.nodes_created
    if engine.parse(text) is not state:
        raise AssertionError("re-parsed state is not the interned original")
    report.reparse_new_nodes = s.nodes_created - created
    report.nodes = s.nodes_created
    report.intern_hits = s.intern_hits
    return report
