"""Symbolic byte-addressed machine states with syntactic read-over-write simplification."""

from .ainni import Assumption, Context, EMPTY, Hyp, InferenceResult, Interval, ainni, bound_read_span, parse_context
from .arith import LessVerdict, SimplifyOutcome, meta_less, meta_mod
from .machine import M_SIZE, ConcreteState, evaluate, load_memory_image, dump_memory_image
from .state import (
    Engine, WriteNest, meta_bang_i, meta_bang_r, meta_bang_s, meta_i, meta_r, meta_s, settled,
)
from .terms import Term, TermStore, parse, quote_normal, strip_hides, syntactic_integer, term_order, to_sexpr

__all__ = [
    "Assumption", "ConcreteState", "Context", "EMPTY", "Engine", "Hyp", "InferenceResult", "Interval",
    "LessVerdict", "M_SIZE", "SimplifyOutcome", "Term", "TermStore", "WriteNest",
    "ainni", "bound_read_span", "dump_memory_image", "evaluate", "load_memory_image",
    "meta_bang_i", "meta_bang_r", "meta_bang_s", "meta_i", "meta_less", "meta_mod", "meta_r", "meta_s",
    "parse", "parse_context", "quote_normal", "settled", "strip_hides", "syntactic_integer",
    "term_order", "to_sexpr",
]
