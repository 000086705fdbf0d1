import csv
import io
import re
from fractions import Fraction

import pytest

from helium.bench import (
    CSV_FIELDS, format_number, rekey_inputs, rows_to_csv, sweep_bench, tumor_program,
)
from helium.compiler import compile_graph, compile_source
from helium.elaborate import elaborate
from helium.errors import ConfigError
from helium.frontend import parse_source
from helium.frontend.syntax import InputStmt
from helium.sim import CostModel


def test_tumor_program_shape():
    source = tumor_program(4, 2, vector_len=1000)
    prog = parse_source(source)
    inputs = [s for s in prog.statements if isinstance(s, InputStmt)]
    assert len(inputs) == 8
    assert [s.key_label for s in inputs] == ["Key0"] * 4 + ["Key1"] * 4
    assert [s.party for s in inputs[::2]] == ["Party0", "Party1", "Party2", "Party3"]
    assert "output R => Party_Out @Key_Out:" in source
    assert "input b3: int[1000] @Key1 <= Party3;" in source


@pytest.mark.parametrize("n, k", [(3, 2), (0, 1), (4, 0)])
def test_tumor_program_needs_even_split(n, k):
    with pytest.raises(ConfigError):
        tumor_program(n, k)


def test_rekey_inputs_moves_every_ciphertext_input():
    g = rekey_inputs(elaborate(parse_source(tumor_program(4) + "input p: plain int;")), "Key_Out")
    assert {g[i].key for i in g.inputs} == {"Key_Out", None}
    assert [g[i].name for i in g.inputs if g[i].key is None] == ["p"]


def test_rekeyed_graph_matches_rekeyed_source():
    source = tumor_program(4, 2, vector_len=3)
    from_graph = compile_graph(parse_source(source),
                               rekey_inputs(elaborate(parse_source(source)), "Key_Out")).circuit
    from_source = compile_source(re.sub(r"@Key\d", "@Key_Out", source)).circuit
    assert from_graph == from_source
    assert from_graph.metrics["pre_count"] == 0


def test_rekey_refuses_keyed_graph():
    g = compile_source(tumor_program(2, vector_len=2)).graph
    with pytest.raises(ConfigError):
        rekey_inputs(g, "Key_Out")


@pytest.mark.parametrize("ratio, reduction", [(1, 0), (2, 50), (4, 75), (8, Fraction(175, 2))])
def test_reduction_per_ratio(ratio, reduction):
    (row,) = sweep_bench([16], [ratio], vector_len=2)
    assert row.reduction == reduction
    assert (row.p_naive, row.p_opt) == (32, 2 * (16 // ratio))


def test_ratio_one_means_no_saving():
    (row,) = sweep_bench([8], [1], vector_len=2)
    assert row.p_opt == row.p_naive and row.cost_opt == row.cost_naive


def test_non_dividing_ratio_is_rejected():
    with pytest.raises(ConfigError):
        sweep_bench([12], [8])
    with pytest.raises(ConfigError):
        sweep_bench([8], [0])


def test_rows_are_ordered_and_costs_consistent():
    rows = sweep_bench([16, 8], [4, 1, 2], vector_len=2)
    assert [(r.n, r.ratio) for r in rows] == [(8, 1), (8, 2), (8, 4), (16, 1), (16, 2), (16, 4)]
    for r in rows:
        assert r.cost_opt - r.cost_nopre == r.p_opt * 30
        assert r.cost_naive >= r.cost_opt
        assert r.seed == 0


def test_custom_cost_model_changes_costs_only():
    default = sweep_bench([8], [2], vector_len=2)[0]
    cheap = sweep_bench([8], [2], CostModel({"pre": Fraction(1)}), vector_len=2)[0]
    assert (cheap.p_opt, cheap.p_naive) == (default.p_opt, default.p_naive)
    assert cheap.cost_opt == cheap.p_opt and cheap.cost_nopre == 0


def test_csv_schema():
    text = rows_to_csv(sweep_bench([8], [1, 8], vector_len=2))
    rows = list(csv.DictReader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_FIELDS
    assert [r["reduction"] for r in rows] == ["0", "87.5"]


@pytest.mark.parametrize("x, text", [
    (Fraction(3), "3"), (Fraction(175, 2), "87.5"), (Fraction(1, 3), "0.333333"), (Fraction(-5, 4), "-1.25"),
])
def test_format_number(x, text):
    assert format_number(x) == text
