import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symstate.machine import (
    M_SIZE, BoundsError, ConcreteState, DomainError, ImageError, dump_memory_image, evaluate,
    load_memory_image,
)
from symstate.terms import TermStore


def ev(text, state=None):
    store = TermStore()
    return evaluate(store.parse(text), state or ConcreteState.blank())


def test_little_endian_read():
    state = load_memory_image("0 1\n1 2")
    assert ev("(R 0 2 ST)", state) == 513


@pytest.mark.parametrize("v", [0, 1, 255, 2**32 - 1, 2**32, 2**40 + 7, -1, -2**33 + 5])
def test_read_after_write_truncates(v):
    assert ev(f"(R 8 4 (!R 8 4 {v} ST))") == v % 2**32


@pytest.mark.parametrize("text,value", [
    ("(ASH -5 -1)", -3), ("(ASH 3 4)", 48), ("(MOD -7 4)", 1), ("(MOD 9 0)", 9),
    ("(LOGAND -1 255)", 255), ("(LOGIOR 12 3)", 15), ("(LOGXOR -1 0)", -1),
    ("(IF 0 1 2)", 2), ("(IF 5 1 2)", 1), ("(< 1 2)", 1), ("(< 2 2)", 0),
    ("(HIDE (IFIX 4))", 4), ("(I (!I 9 (!S 3 ST)))", 9), ("(S (!I 9 (!S -3 ST)))", -3),
])
def test_operators(text, value):
    assert ev(text) == value


def test_if_is_lazy():
    # the untaken branch would be out of bounds
    assert ev("(IF 1 7 (R 6000 1 ST))") == 7


@pytest.mark.parametrize("text,exc", [
    ("(R 5310 4 ST)", BoundsError), ("(R -1 1 ST)", BoundsError),
    ("(R 0 0 ST)", DomainError), ("(R 0 -2 ST)", DomainError),
    ("(R 0 1 (!R 5312 1 0 ST))", BoundsError),
])
def test_access_errors(text, exc):
    with pytest.raises(exc):
        ev(text)


def test_state_terms_yield_states():
    out = ev("(HIDE (!R 0 2 772 (!I 4 ST)))")
    assert isinstance(out, ConcreteState)
    assert (out.i, out.mem[0], out.mem[1]) == (4, 4, 3)


def _random_state(seed):
    rng = random.Random(seed)
    return rng, ConcreteState(rng.randrange(100), rng.randrange(-50, 50), rng.randbytes(M_SIZE))


@given(st.integers(0, 2**32), st.integers(0, M_SIZE - 8), st.sampled_from([1, 2, 3, 4, 8]),
       st.integers(-2**70, 2**70))
@settings(max_examples=200, deadline=None)
def test_read_after_write_identity(seed, a, n, v):
    _, state = _random_state(seed)
    assert ev(f"(R {a} {n} (!R {a} {n} {v} ST))", state) == v % 256**n


@given(st.integers(0, 2**32))
@settings(max_examples=200, deadline=None)
def test_disjoint_frame_and_field_independence(seed):
    rng, state = _random_state(seed)
    a, n = rng.randrange(M_SIZE - 8), rng.choice((1, 2, 4, 8))
    b, k = rng.randrange(M_SIZE - 8), rng.choice((1, 2, 4, 8))
    v = rng.randrange(-2**64, 2**64)
    if a + n <= b or b + k <= a:
        assert ev(f"(R {a} {n} (!R {b} {k} {v} ST))", state) == state.read(a, n)
    assert ev(f"(R {a} {n} (!I {v} (!S {v} ST)))", state) == state.read(a, n)
    assert ev(f"(I (!R {b} {k} {v} ST))", state) == state.i
    assert ev(f"(S (!R {b} {k} {v} ST))", state) == state.s


@given(st.integers(0, 2**32))
@settings(max_examples=100, deadline=None)
def test_byte_decomposition(seed):
    rng, state = _random_state(seed)
    a, n = rng.randrange(M_SIZE - 8), rng.randint(1, 8)
    whole = ev(f"(R {a} {n} ST)", state)
    assert whole == sum(256**i * ev(f"(R {a + i} 1 ST)", state) for i in range(n))


def test_image_empty_and_round_trip():
    blank = load_memory_image("")
    assert blank == ConcreteState.blank()
    state = ConcreteState.blank().write(10, 2, 0xABCD).set_i(7).set_s(-2)
    text = dump_memory_image(state)
    assert load_memory_image(text) == state
    shuffled = "\n".join(reversed(text.splitlines()))
    assert load_memory_image(shuffled) == state


@pytest.mark.parametrize("text", ["6000 1", "5312 0", "0 256", "0 -1", "x 1", "0 1 2", "I"])
def test_image_errors(text):
    with pytest.raises(ImageError):
        load_memory_image(text)
