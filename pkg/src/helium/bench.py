"""The tumor-recurrence program family and the PRE-count sweep over it.

Dataset ``i`` contributes a bit ``a_i`` (recurrence) and a bit vector
``b_i`` (mutations present). The program outputs the two sums whose
quotient is the per-mutation recurrence rate; the division happens in
the clear after decryption.
"""
from __future__ import annotations

import csv
import gc
import io
import random
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Sequence

from .compiler import compile_graph
from .elaborate import elaborate
from .errors import ConfigError
from .frontend import parse_source
from .heir import CompGraph, Op
from .sim import CostModel, evaluate, random_inputs

DEFAULT_VECTOR_LEN = 1000
OUTPUT_KEY = "Key_Out"
OUTPUT_PARTY = "Party_Out"


def tumor_program(n: int, k: int | None = None, vector_len: int = DEFAULT_VECTOR_LEN,
                  shared_key: str | None = None) -> str:
    """HEDSL source for ``n`` datasets spread evenly over ``k`` keys.

    Datasets ``i*n/k`` up to ``(i+1)*n/k - 1`` share ``Key{i}``. With
    ``shared_key`` every input is encrypted under that single key instead.
    """
    k = n if k is None else k
    if n < 1 or k < 1 or n % k:
        raise ConfigError(f"{k} keys cannot be spread evenly over {n} datasets")
    per_key = n // k
    lines = []
    for i in range(n):
        key = shared_key or f"Key{i // per_key}"
        lines.append(f"input a{i}: int @{key} <= Party{i};")
        lines.append(f"input b{i}: int[{vector_len}] @{key} <= Party{i};")
    lines.append("")
    products = " + ".join(f"a{i}*b{i}" for i in range(n))
    totals = " + ".join(f"b{i}" for i in range(n))
    lines.append(f"output R => {OUTPUT_PARTY} @{OUTPUT_KEY}:\n    {products};")
    lines.append(f"output n => {OUTPUT_PARTY} @{OUTPUT_KEY}:\n    {totals};")
    return "\n".join(lines) + "\n"


def rekey_inputs(g: CompGraph, key: str) -> CompGraph:
    """Move every ciphertext input of an elaborated, not yet optimized graph under ``key``."""
    if any(n.op is Op.PRE for n in g.nodes.values()):
        raise ConfigError("inputs can only be rekeyed before PRE insertion")
    for nid in g.inputs:
        if g[nid].is_cipher:
            g[nid].key = key
    return g


def recurrence_rate(R: Sequence[int], n: Sequence[int]) -> list[Fraction | None]:
    """Client-side division; ``None`` where no patient has the mutation."""
    return [Fraction(r, d) if d else None for r, d in zip(R, n)]


@dataclass
class BenchRow:
    n: int
    k: int
    ratio: int
    p_naive: int
    p_opt: int
    reduction: Fraction
    cost_naive: Fraction
    cost_opt: Fraction
    cost_nopre: Fraction
    seed: int

    def as_csv(self) -> dict:
        row = asdict(self)
        for name in ("reduction", "cost_naive", "cost_opt", "cost_nopre"):
            row[name] = format_number(row[name])
        return row


CSV_FIELDS = ("n", "k", "ratio", "p_naive", "p_opt", "reduction",
              "cost_naive", "cost_opt", "cost_nopre", "seed")


def format_number(x: Fraction) -> str:
    """Exact decimal when one exists, else six decimals."""
    if x.denominator == 1:
        return str(x.numerator)
    d = x.denominator
    while d % 2 == 0:
        d //= 2
    while d % 5 == 0:
        d //= 5
    if d == 1:
        return str(float(x)) if abs(x) < 1e15 else f"{float(x):.6f}"
    return f"{float(x):.6f}"


def bench_cell(n: int, ratio: int, cost: CostModel, vector_len: int, seed: int) -> BenchRow:
    if ratio < 1 or n % ratio:
        raise ConfigError(f"ratio {ratio} does not divide n={n}")
    k = n // ratio
    program = parse_source(tumor_program(n, k, vector_len))
    # key labels only live on input nodes, so one elaboration serves all three
    # variants; the sweep checks the final graphs, not every intermediate one
    base = elaborate(program)
    opt = compile_graph(program, base.copy(), verify_each=False).circuit
    naive = compile_graph(program, base.copy(), naive=True, verify_each=False).circuit
    nopre = compile_graph(program, rekey_inputs(base, OUTPUT_KEY), verify_each=False).circuit
    inputs = random_inputs(opt, random.Random(seed))
    results = [evaluate(c, inputs, cost) for c in (opt, naive, nopre)]
    reference = results[0].outputs
    for r in results[1:]:
        if {k: v.payload for k, v in r.outputs.items()} != {k: v.payload for k, v in reference.items()}:
            raise AssertionError(f"bench circuits disagree at n={n}, ratio={ratio}")
    p_opt, p_naive = opt.metrics["pre_count"], naive.metrics["pre_count"]
    return BenchRow(
        n=n, k=k, ratio=ratio, p_naive=p_naive, p_opt=p_opt,
        reduction=(1 - Fraction(p_opt, p_naive)) * 100,
        cost_naive=results[1].total_cost, cost_opt=results[0].total_cost,
        cost_nopre=results[2].total_cost, seed=seed,
    )


@contextmanager
def _collector_paused():
    # graphs refer to nodes by integer id, so compiling creates almost no
    # reference cycles; the cyclic collector only burns time on large sweeps
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was_enabled:
            gc.enable()


def sweep_bench(n_list: Sequence[int], ratio_list: Sequence[int], cost: CostModel | None = None,
                vector_len: int = 16, seed: int = 0) -> list[BenchRow]:
    """One row per (n, ratio), ordered by n then ratio.

    Each cell compiles the tumor program with optimized and with naive PRE
    placement, plus a baseline where every input already uses the output
    key, and evaluates all three on the same seeded random bits.
    """
    cost = cost or CostModel()
    bad = [(n, r) for n in n_list for r in ratio_list if r < 1 or n % r]
    if bad:
        raise ConfigError(f"ratio {bad[0][1]} does not divide n={bad[0][0]}")
    with _collector_paused():
        return [bench_cell(n, r, cost, vector_len, seed)
                for n in sorted(n_list) for r in sorted(ratio_list)]


def rows_to_csv(rows: Sequence[BenchRow]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.as_csv())
    return buf.getvalue()
