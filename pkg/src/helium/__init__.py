"""A compiler from the HEDSL language to homomorphic-encryption circuits.

Typical use::

    from helium import compile_source, evaluate
    result = compile_source(open("prog.he").read())
    outputs = evaluate(result.circuit, {"Party0": {"a": 3}}).outputs
"""
from .backend import Circuit, KeyInterface, emit, key_interface, max_plain_bits, read_circuit, write_circuit
from .compiler import CompileResult, compile_graph, compile_program, compile_source
from .elaborate import elaborate
from .errors import CompileError, HeliumError, InternalError
from .frontend import parse_source, pretty_print, tokenize
from .heir import CompGraph, Op, multiplicative_depth
from .oracle import oracle_evaluate
from .passes import run_pipeline
from .sim import CostModel, LabeledValue, OpCounts, evaluate

__all__ = [
    "Circuit", "CompGraph", "CompileError", "CompileResult", "CostModel", "HeliumError",
    "InternalError", "KeyInterface", "LabeledValue", "Op", "OpCounts", "compile_graph", "compile_program",
    "compile_source", "elaborate", "emit", "evaluate", "key_interface", "max_plain_bits",
    "multiplicative_depth", "oracle_evaluate", "parse_source", "pretty_print", "read_circuit",
    "run_pipeline", "tokenize", "write_circuit",
]
