"""End-to-end compilation: source text to circuit."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .backend import DEFAULT_INPUT_BITS, Circuit, emit
from .elaborate import elaborate
from .frontend import parse_source
from .frontend.syntax import Program
from .heir import CompGraph
from .passes import PassReport, run_pipeline


@dataclass
class CompileResult:
    program: Program
    graph: CompGraph                 # after the pipeline
    reports: list[PassReport]
    circuit: Circuit | None          # None when the pass list skipped PRE insertion
    warnings: list[str] = field(default_factory=list)


def compile_source(source: str, passes: Sequence[str] | None = None, naive: bool = False,
                   input_bits: int | Mapping[str, int] = DEFAULT_INPUT_BITS,
                   verify_each: bool = True) -> CompileResult:
    return compile_program(parse_source(source), passes, naive, input_bits, verify_each)


def compile_program(program: Program, passes: Sequence[str] | None = None, naive: bool = False,
                    input_bits: int | Mapping[str, int] = DEFAULT_INPUT_BITS,
                    verify_each: bool = True) -> CompileResult:
    return compile_graph(program, elaborate(program), passes, naive, input_bits, verify_each)


def compile_graph(program: Program, graph: CompGraph, passes: Sequence[str] | None = None,
                  naive: bool = False, input_bits: int | Mapping[str, int] = DEFAULT_INPUT_BITS,
                  verify_each: bool = True) -> CompileResult:
    """Optimize and emit an already elaborated ``graph``, which is modified in place."""
    reports = run_pipeline(graph, passes, naive=naive, verify_each=verify_each)
    warnings = list(dict.fromkeys(w for r in reports for w in r.warnings))
    keyed = naive or any(r.name == "pre" for r in reports)
    circuit = emit(graph, input_bits, reports) if keyed else None
    return CompileResult(program, graph, reports, circuit, warnings)
