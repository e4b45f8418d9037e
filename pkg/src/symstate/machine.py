"""Concrete machine: the ground-truth evaluator for every grammar operator."""

from __future__ import annotations

import operator
import re
from dataclasses import dataclass, field

M_SIZE = 5312


class EvalError(Exception):
    pass


class BoundsError(EvalError):
    pass


class DomainError(EvalError):
    pass


class ImageError(ValueError):
    pass


def floor_mod(x: int, y: int) -> int:
    # MOD by zero is the identity
    return x if y == 0 else x % y


def ash(x: int, c: int) -> int:
    return x << c if c >= 0 else x >> -c


VALUE_OPS = {
    "+": operator.add,
    "-": operator.sub,
    "*": operator.mul,
    "MOD": floor_mod,
    "ASH": ash,
    "LOGAND": operator.and_,
    "LOGIOR": operator.or_,
    "LOGXOR": operator.xor,
    "IFIX": lambda x: x,
    "<": lambda x, y: int(x < y),
}


@dataclass(frozen=True)
class ConcreteState:
    i: int = 0
    s: int = 0
    mem: bytes = field(default=bytes(M_SIZE), repr=False)
    m_size: int = M_SIZE

    def __post_init__(self):
        if len(self.mem) != self.m_size:
            raise ValueError(f"memory holds {len(self.mem)} bytes, expected {self.m_size}")
        if not isinstance(self.mem, bytes):
            object.__setattr__(self, "mem", bytes(self.mem))

    @classmethod
    def blank(cls, m_size: int = M_SIZE, i: int = 0, s: int = 0) -> "ConcreteState":
        return cls(i, s, bytes(m_size), m_size)

    def _check(self, addr: int, n: int):
        if n <= 0:
            raise DomainError(f"byte count must be positive, got {n}")
        if addr < 0 or addr + n > self.m_size:
            raise BoundsError(f"access [{addr}, {addr + n}) outside memory of {self.m_size} bytes")

    def read(self, addr: int, n: int) -> int:
        self._check(addr, n)
        return int.from_bytes(self.mem[addr:addr + n], "little")

    def write(self, addr: int, n: int, value: int) -> "ConcreteState":
        self._check(addr, n)
        mem = bytearray(self.mem)
        mem[addr:addr + n] = (value % (1 << (8 * n))).to_bytes(n, "little")
        return ConcreteState(self.i, self.s, bytes(mem), self.m_size)

    def set_i(self, value: int) -> "ConcreteState":
        return ConcreteState(value, self.s, self.mem, self.m_size)

    def set_s(self, value: int) -> "ConcreteState":
        return ConcreteState(self.i, value, self.mem, self.m_size)


def evaluate(term, state: ConcreteState):
    """Evaluate ``term`` in ``state``.

    Value terms yield an ``int``; state terms yield a new :class:`ConcreteState`.
    Shared subterms are evaluated once per call.
    """
    cache: dict = {}

    def state_of(t):
        spine = []
        while True:
            got = cache.get(t)
            if got is not None:
                cur = got
                break
            if t.op == "ST":
                cur = state
                break
            spine.append(t)
            t = t.args[-1] if t.op != "HIDE" else t.args[0]
        for node in reversed(spine):
            op = node.op
            if op == "!R":
                a, n, v = (value_of(x) for x in node.args[:3])
                cur = cur.write(a, n, v)
            elif op == "!I":
                cur = cur.set_i(value_of(node.args[0]))
            elif op == "!S":
                cur = cur.set_s(value_of(node.args[0]))
            cache[node] = cur
        return cur

    def value_of(t):
        got = cache.get(t)
        if got is not None:
            return got
        op = t.op
        if op == "CONST":
            return t.value
        if op == "HIDE":
            got = value_of(t.args[0])
        elif op == "R":
            a = value_of(t.args[0])
            n = value_of(t.args[1])
            got = state_of(t.args[2]).read(a, n)
        elif op == "I":
            got = state_of(t.args[0]).i
        elif op == "S":
            got = state_of(t.args[0]).s
        elif op == "IF":
            got = value_of(t.args[1]) if value_of(t.args[0]) != 0 else value_of(t.args[2])
        else:
            got = VALUE_OPS[op](*(value_of(a) for a in t.args))
        cache[t] = got
        return got

    if term.sort == "state":
        return state_of(term)
    return value_of(term)


_LINE = re.compile(r"^(I|S|[0-9]+) (-?[0-9]+)$")


def load_memory_image(text: str, m_size: int = M_SIZE) -> ConcreteState:
    """Parse ``ADDR BYTE`` lines plus optional ``I N`` / ``S N`` headers."""
    mem = bytearray(m_size)
    i = s = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise ImageError(f"line {lineno}: malformed {raw!r}")
        key, val = m.group(1), int(m.group(2))
        if key == "I":
            i = val
        elif key == "S":
            s = val
        else:
            addr = int(key)
            if addr >= m_size:
                raise ImageError(f"line {lineno}: address {addr} outside memory of {m_size} bytes")
            if not 0 <= val <= 255:
                raise ImageError(f"line {lineno}: byte value {val} out of range")
            mem[addr] = val
    return ConcreteState(i, s, bytes(mem), m_size)


def dump_memory_image(state: ConcreteState) -> str:
    lines = []
    if state.i:
        lines.append(f"I {state.i}")
    if state.s:
        lines.append(f"S {state.s}")
    lines.extend(f"{addr} {byte}" for addr, byte in enumerate(state.mem) if byte)
    return "\n".join(lines) + ("\n" if lines else "")
