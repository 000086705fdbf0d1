"""Differential checks of the compiler against the plaintext oracle.

For one generated program, every stage of the default pipeline is lowered to
a circuit (missing PRE insertion is supplied on a copy) and simulated; all
payloads must equal the oracle's interpretation of the source AST.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from helium.backend import emit, key_interface
from helium.compiler import compile_program
from helium.elaborate import elaborate
from helium.errors import KeyMismatchError
from helium.frontend import parse_source
from helium.heir import CompGraph, Op
from helium.oracle import oracle_evaluate
from helium.passes import DEFAULT_PIPELINE, PASSES, dead_code_eliminate, insert_pre
from helium.sim import evaluate

from progen import GeneratedProgram


@dataclass
class Outcome:
    stages_checked: int = 0
    key_mismatches: int = 0
    failures: list[str] = field(default_factory=list)


def _has_pre(g: CompGraph) -> bool:
    return any(n.op is Op.PRE for n in g.nodes.values())


def _simulate(g: CompGraph, bundles, expected, stage: str, out: Outcome) -> None:
    if not _has_pre(g):
        g = g.copy()
        dead_code_eliminate(g)
        insert_pre(g)
    g.verify(keyed=True)
    circuit = emit(g)
    for bundle, want in zip(bundles, expected):
        try:
            got = {name: v.payload for name, v in evaluate(circuit, bundle).outputs.items()}
        except KeyMismatchError as exc:
            out.key_mismatches += 1
            out.failures.append(f"{stage}: key mismatch: {exc}")
            return
        if got != want:
            out.failures.append(f"{stage}: simulator {got} != oracle {want}")
            return
        if oracle_evaluate(g, bundle) != want:
            out.failures.append(f"{stage}: graph oracle disagrees with source oracle")
            return
    out.stages_checked += 1


def check_program(prog: GeneratedProgram, rng: random.Random, n_bundles: int = 4) -> Outcome:
    """Simulate after elaboration, after each pass and end to end."""
    out = Outcome()
    ast = parse_source(prog.source)
    bundles = [prog.random_bundle(rng) for _ in range(n_bundles)]
    expected = [oracle_evaluate(ast, b) for b in bundles]
    g = elaborate(ast)
    _simulate(g, bundles, expected, "elaborated", out)
    for i, name in enumerate(DEFAULT_PIPELINE):
        PASSES[name](g)
        g.verify(keyed=_has_pre(g))
        _simulate(g, bundles, expected, f"after {name}#{i}", out)
    end_to_end = compile_program(ast).circuit
    for bundle, want in zip(bundles, expected):
        got = {name: v.payload for name, v in evaluate(end_to_end, bundle).outputs.items()}
        if got != want:
            out.failures.append(f"end to end: simulator {got} != oracle {want}")
            break
    else:
        out.stages_checked += 1
    return out


def pre_bounds(prog: GeneratedProgram) -> tuple[int, int, int, int]:
    """(pre_count, p_min, naive pre_count, ciphertext input count)."""
    ast = parse_source(prog.source)
    opt = key_interface(compile_program(ast).circuit)
    naive = key_interface(compile_program(ast, naive=True).circuit)
    return opt.pre_count, opt.p_min, naive.pre_count, naive.p_naive
