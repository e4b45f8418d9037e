"""Differential fuzzing of the metafunctions against the concrete machine."""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .ainni import Assumption, Context
from .machine import M_SIZE, ConcreteState, evaluate
from .state import Engine, settled
from .terms import Term, TermStore, strip_hides

# address regions; the symbolic frame never reaches LOW or HIGH
LOW = 0
FRAME_MIN, FRAME_MAX = 64, 2900
HIGH = 5120
INDEX_MIN, INDEX_MAX = 5200, 5300
WINDOW = 24


@dataclass(frozen=True)
class FuzzConfig:
    seed: int = 0
    cases: int = 100
    max_writes: int = 6
    mixed: bool = True
    max_value_depth: int = 2
    # probability that a context bound is drawn at random instead of from the state
    context_noise: float = 0.0

    def __post_init__(self):
        if self.cases < 1:
            raise ValueError("cases must be at least 1")
        if self.max_writes < 1:
            raise ValueError("max_writes must be at least 1")
        if self.seed < 0 or self.max_value_depth < 0:
            raise ValueError("seed and max_value_depth are naturals")


@dataclass
class Case:
    state: ConcreteState
    context: Context
    state_term: Term
    reads: list


@dataclass
class CaseResult:
    index: int
    checks: int = 0
    fired: int = 0
    resolved: int = 0
    vacuous: bool = False
    failure: Optional[str] = None


class CaseGenerator:
    def __init__(self, store: TermStore, rng: random.Random, config: FuzzConfig):
        self.s = store
        self.rng = rng
        self.config = config
        self.prefixes: list[Term] = []

    def c(self, v):
        return self.s.const(v)

    def app(self, op, *args):
        return self.s.app(op, *args)

    def generate(self) -> Case:
        rng, cfg = self.rng, self.config
        state = ConcreteState(rng.randrange(1 << 16), rng.randrange(-1000, 1000), rng.randbytes(M_SIZE))

        index_cell = rng.randrange(INDEX_MIN, INDEX_MAX)
        self.index = self.app("R", self.c(index_cell), self.c(1), self.s.st)
        scale = rng.choice((1, 4, 8))
        self.frame_base = self.index if scale == 1 else self.app("*", self.c(scale), self.index)
        self.frame_start = rng.randrange(FRAME_MIN, FRAME_MAX)

        assumptions = []
        if rng.random() < 0.85:
            actual = state.mem[index_cell]
            if rng.random() < cfg.context_noise:
                bound = rng.randrange(256)
            else:
                bound = min(255, actual + rng.choice((0, 0, 1, 2, 7, 40)))
            if rng.random() < 0.5:
                assumptions.append(Assumption(self.index, "<=", bound))
            else:
                assumptions.append(Assumption(self.index, "<", bound + 1))
        context = Context(tuple(assumptions))

        term = self.s.st
        self.prefixes = [term]
        self.written = []
        for _ in range(rng.randint(1, cfg.max_writes)):
            roll = rng.random()
            if roll < 0.1:
                term = self.app("!I", self.value(cfg.max_value_depth), term)
            elif roll < 0.2:
                term = self.app("!S", self.value(cfg.max_value_depth), term)
            else:
                a, n = self.location(reuse=0.3)
                self.written.append((a, n))
                term = self.app("!R", a, self.c(n), self.value(cfg.max_value_depth), term)
            self.prefixes.append(term)

        reads = []
        for _ in range(rng.randint(2, 4)):
            a, n = self.location(reuse=0.3)
            reads.append(self.app("R", a, self.c(n), term))
        reads.append(self.app("I", term))
        reads.append(self.app("S", term))
        return Case(state, context, term, reads)

    def location(self, reuse: float = 0.0):
        """A random (address term, byte count) pair, sometimes one already written."""
        rng = self.rng
        if self.written and rng.random() < reuse:
            return rng.choice(self.written)
        weights = (4, 2, 4, 1) if self.config.mixed else (4, 2, 4, 0)
        region = rng.choices(("low", "high", "frame", "inside"), weights)[0]
        if self.config.mixed:
            off, n = rng.randrange(WINDOW), rng.choice((1, 2, 4, 8))
        else:
            off, n = 8 * rng.randrange(WINDOW // 8), 8
        if region == "low":
            return self.c(LOW + off), n
        if region == "high":
            return self.c(HIGH + off), n
        if region == "inside":
            # a constant address inside the frame's possible span
            return self.c(self.frame_start + off), n
        return self.app("+", self.c(self.frame_start + off), self.frame_base), n

    def value(self, depth: int) -> Term:
        rng = self.rng
        if depth == 0 or rng.random() < 0.35:
            roll = rng.random()
            if roll < 0.25:
                return self.c(rng.randrange(300))
            if roll < 0.4:
                return self.c(rng.randrange(1 << 64))
            if roll < 0.45:
                return self.c(-rng.randrange(1, 1 << 20))
            if roll < 0.65:
                return self.app("R", self.c(LOW + rng.randrange(64)), self.c(rng.choice((1, 2, 4, 8))), self.s.st)
            if roll < 0.72:
                return self.app("I", self.s.st)
            if roll < 0.8:
                return self.app("S", self.s.st)
            a, n = self.location()
            return self.app("R", a, self.c(n), rng.choice(self.prefixes))
        sub = depth - 1
        op = rng.choice(("+", "-", "*", "LOGAND", "LOGIOR", "LOGXOR", "ASH", "MOD", "IFIX", "HIDE"))
        if op == "HIDE":
            # HIDE marks finished terms, so only settled values get one
            inner = self.value(sub)
            return self.app("HIDE", inner) if settled(inner) else inner
        if op == "IFIX":
            return self.app(op, self.value(sub))
        if op == "ASH":
            return self.app("ASH", self.value(sub), self.c(rng.randrange(-12, 13)))
        if op == "MOD":
            return self.app("MOD", self.value(sub), self.c(rng.choice((0, 2, 256, 1000, 65536))))
        return self.app(op, self.value(sub), self.value(sub))


def run_case(config: FuzzConfig, index: int) -> CaseResult:
    rng = random.Random(f"{config.seed}:{index}")
    engine = Engine()
    case = CaseGenerator(engine.store, rng, config).generate()
    result = CaseResult(index)
    for term in [case.state_term] + case.reads:
        result.checks += 1
        out = engine.simplify(term, case.context)
        if not out.fired:
            continue
        result.fired += 1
        if not all(h.holds(case.state) for h in out.side_conditions):
            result.vacuous = True
            continue
        expected = evaluate(term, case.state)
        got = evaluate(out.result, case.state)
        if settled(strip_hides(out.result)):
            result.resolved += 1
        if expected != got:
            result.failure = _describe(index, term, out, case.context, expected, got)
            break
    return result


def _describe(index, term, out, context, expected, got):
    if isinstance(expected, ConcreteState):
        expected, got = "(state)", "(different state)"
    lines = [
        f"first counterexample (case {index}):",
        f"  input:   {term}",
        f"  output:  {out.result}",
        f"  context: {' '.join(str(a) for a in context.assumptions) or '(none)'}",
        f"  side:    {' '.join(str(h) for h in out.side_conditions) or '(none)'}",
        f"  expected {expected}, got {got}",
    ]
    return "\n".join(lines)


def _run_chunk(args):
    config, indices = args
    return [run_case(config, i) for i in indices]


@dataclass
class FuzzReport:
    config: FuzzConfig
    results: list = field(default_factory=list)

    @property
    def failed(self):
        return [r for r in self.results if r.failure]

    @property
    def vacuous(self):
        return [r for r in self.results if r.vacuous and not r.failure]

    @property
    def passed(self):
        return [r for r in self.results if not r.vacuous and not r.failure]

    def render(self) -> str:
        cfg = self.config
        checks = sum(r.checks for r in self.results)
        fired = sum(r.fired for r in self.results)
        resolved = sum(r.resolved for r in self.results)
        lines = [
            f"fuzz: seed={cfg.seed} cases={cfg.cases} mixed={'on' if cfg.mixed else 'off'} "
            f"max-writes={cfg.max_writes} max-value-depth={cfg.max_value_depth}",
            f"checks: {checks} terms, {fired} fired, {resolved} fully resolved",
            f"{len(self.passed)} passed, {len(self.failed)} failed, {len(self.vacuous)} vacuous",
        ]
        if self.failed:
            lines.append(self.failed[0].failure)
        return "\n".join(lines) + "\n"


def run_fuzz(config: FuzzConfig, workers: int = 1) -> FuzzReport:
    indices = list(range(config.cases))
    if workers <= 1:
        results = [run_case(config, i) for i in indices]
    else:
        chunks = [(config, indices[w::workers]) for w in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            results = [r for chunk in pool.map(_run_chunk, chunks) for r in chunk]
        results.sort(key=lambda r: r.index)
    return FuzzReport(config, results)
