import random
from collections import Counter

import pytest

from helium.bench import tumor_program
from helium.compiler import compile_source
from helium.elaborate import elaborate
from helium.errors import ConfigError, FoldOverflowError, KeyResolutionError, VerifyError
from helium.frontend import parse_source
from helium.heir import CompGraph, Op, levels, multiplicative_depth
from helium.oracle import oracle_evaluate
from helium.passes import (
    DEFAULT_PIPELINE, constant_fold, dead_code_eliminate, insert_pre, parse_pass_list, rebalance,
    run_pipeline,
)
from helium.passes.keys import propagate_keys
from helium.types import Secrecy, ValueType

from progen import generate_bounded

CT = ValueType(Secrecy.CIPHER)


def graph_of(source):
    return elaborate(parse_source(source))


def ops(g, op):
    return [n for n in g.topo_order() if g[n].op is op]


def pre_count(g):
    return len(ops(g, Op.PRE))


def chain(keys, op=Op.ADD, out_key="K0"):
    """Left-leaning chain over one input per entry of ``keys``."""
    g = CompGraph()
    xs = [g.add_input(f"x{i}", CT, "P", k) for i, k in enumerate(keys)]
    acc = xs[0]
    for x in xs[1:]:
        acc = g.add_op(op, [acc, x])
    g.add_output("o", acc, "Q", out_key)
    return g


# -- constant folding ----------------------------------------------------------

def test_fold_collapses_constant_expression():
    g = graph_of("output o: 2 + 3;")
    constant_fold(g)
    dead_code_eliminate(g)
    (out,) = g.outputs
    src = g[g[out].operands[0]]
    assert (src.op, src.value) == (Op.CONST, 5)
    assert len(g) == 2


def test_fold_reaches_fixpoint_in_one_sweep():
    g = graph_of("input a: int; output o: a * ((2 + 3) * 4 - 1) ** 2;")
    constant_fold(g)
    dead_code_eliminate(g)
    again = g.dump()
    report = constant_fold(g)
    assert report.nodes_added == 0 and g.dump() == again
    (mul,) = ops(g, Op.MUL)
    assert g[g[mul].operands[1]].value == 361


def test_fold_handles_vector_constants_and_rotation():
    g = graph_of("input a: int[3]; var c: int[3] = 1; output o: a + (c << 1) * 2;")
    constant_fold(g)
    dead_code_eliminate(g)
    consts = [g[n].value for n in ops(g, Op.CONST)]
    assert (2, 2, 2) in consts
    assert oracle_evaluate(g, {"a": [1, 2, 3]}) == {"o": [3, 4, 5]}


def test_fold_overflow_is_reported():
    g = graph_of("output o: 4611686018427387904 * 4;")
    with pytest.raises(FoldOverflowError):
        constant_fold(g)


def test_fold_leaves_ciphertext_alone():
    g = graph_of("input a: int; output o: a + 1;")
    assert constant_fold(g).nodes_added == 0


# -- dead code elimination -------------------------------------------------------

def test_dce_removes_dead_chain():
    g = graph_of("input a: int; input b: int; var t = a * a + a * a + 1; output o: b;")
    dead = {n for n in g.nodes if g[n].op in (Op.MUL, Op.ADD, Op.CONST)}
    report = dead_code_eliminate(g)
    assert report.nodes_removed == len(dead) == 5
    assert not dead & set(g.nodes)
    assert report.warnings == ["input a unused"]


def test_dce_keeps_unused_inputs_and_warns():
    g = graph_of(tumor_program(3).replace("a2*b2", "b2"))
    report = dead_code_eliminate(g)
    assert report.warnings == ["input a2 unused"]
    assert "a2" in [g[i].name for i in g.inputs]
    assert all(g[d].op in (Op.INPUT, Op.OUTPUT) for d in g.drains())


def test_dce_on_clean_graph_is_a_no_op():
    g = graph_of(tumor_program(2))
    before = g.dump()
    assert dead_code_eliminate(g).nodes_removed == 0
    assert g.dump() == before


# -- rebalancing -------------------------------------------------------------------

def test_rebalance_chain_of_eight_to_depth_three():
    g = chain(["K0"] * 8, Op.MUL)
    assert multiplicative_depth(g) == 7
    rebalance(g)
    g.verify()
    assert multiplicative_depth(g) == 3
    assert len(ops(g, Op.MUL)) == 7


def test_rebalance_sum_of_eight_to_three_levels():
    g = chain(["K0"] * 8)
    rebalance(g)
    assert max(levels(g).values()) == 3


def test_rebalance_groups_operands_by_key():
    g = chain(["K0", "K1", "K0", "K1"], out_key="K0")
    rebalance(g)
    g.verify()
    names = {i: g[i].name for i in g.inputs}
    (root,) = [n for n in ops(g, Op.ADD) if g[g[n].uses[0]].op is Op.OUTPUT]
    groups = sorted(sorted(names[x] for x in g[child].operands) for child in g[root].operands)
    assert groups == [["x0", "x2"], ["x1", "x3"]]
    insert_pre(g)
    assert pre_count(g) == 1


def test_rebalance_leaves_shared_interior_nodes():
    g = CompGraph()
    x = [g.add_input(f"x{i}", CT, "P", "K") for i in range(4)]
    s1 = g.add_op(Op.ADD, [x[0], x[1]])
    s2 = g.add_op(Op.ADD, [s1, x[2]])
    s3 = g.add_op(Op.ADD, [s2, x[3]])
    g.add_output("o", s3, "P", "K")
    g.add_output("p", s2, "P", "K")   # s2 has two uses, so it roots its own chain
    rebalance(g)
    g.verify()
    # s3 keeps its two operands; the x0+x1+x2 chain is rebuilt once and stays shared
    assert s3 in g.nodes and g[s3].operands[1] == x[3]
    shared = g[s3].operands[0]
    assert sorted(g[u].op.value for u in g[shared].uses) == ["add", "output"]


def test_rebalance_folds_constants_in_a_chain():
    g = graph_of("input a: int; input b: int; output o: 2 * a * 3 * b;")
    rebalance(g)
    assert sorted(g[c].value for c in ops(g, Op.CONST) if g[c].uses) == [6]
    assert oracle_evaluate(g, {"a": 5, "b": 7}) == {"o": [210]}


def test_rebalance_refuses_after_pre():
    g = graph_of(tumor_program(2))
    insert_pre(g)
    with pytest.raises(VerifyError):
        rebalance(g)


def test_rebalance_never_deepens_products():
    rng = random.Random(11)
    for _ in range(60):
        prog = generate_bounded(rng)
        g = graph_of(prog.source)
        constant_fold(g)
        dead_code_eliminate(g)
        before = multiplicative_depth(g)
        rebalance(g)
        g.verify()
        assert multiplicative_depth(g) <= before


# -- key propagation and PRE insertion ----------------------------------------------

def test_propagated_keys_predict_pre_placement():
    g = chain(["K0", "K0", "K1"], out_key="K2")
    keys = propagate_keys(g)
    (first, second) = ops(g, Op.ADD)
    assert keys[first] == "K0" and keys[second] == "K2"


# Without rebalancing, a left-leaning sum keeps the first key block intact and
# re-encrypts every later operand: 1 + (n - n/k) per output when k > 1.
@pytest.mark.parametrize("n, k, expected", [(4, 4, 8), (4, 2, 6), (4, 1, 2), (8, 2, 10), (2, 2, 4)])
def test_tumor_pre_counts_on_source_order(n, k, expected):
    g = graph_of(tumor_program(n, k, vector_len=4))
    report = insert_pre(g)
    g.verify(keyed=True)
    assert report.pre_inserted == pre_count(g) == expected


def test_shared_output_key_needs_no_pre():
    g = graph_of(tumor_program(4, shared_key="Key_Out", vector_len=4))
    assert insert_pre(g).pre_inserted == 0


def test_identical_re_encryptions_are_shared():
    # both outputs consume a and b re-encrypted to the same target key
    g = graph_of("""
        input a: int @K1; input b: int @K2;
        output o1 @K3: a + b;
        output o2 @K3: a * b;
    """)
    insert_pre(g)
    assert pre_count(g) == 2
    assert sorted(len(g[p].uses) for p in ops(g, Op.PRE)) == [2, 2]


def test_mixed_node_with_no_output_cannot_be_keyed():
    g = CompGraph()
    a = g.add_input("a", CT, "P", "K1")
    b = g.add_input("b", CT, "P", "K2")
    g.add_op(Op.ADD, [a, b])
    with pytest.raises(KeyResolutionError):
        insert_pre(g)


def test_mixing_node_takes_the_smallest_reachable_output_key():
    g = CompGraph()
    a = g.add_input("a", CT, "P", "K1")
    b = g.add_input("b", CT, "P", "K2")
    s = g.add_op(Op.ADD, [a, b])
    g.add_output("o", s, "Q", "K9")
    g.add_output("p", s, "Q", "K3")
    insert_pre(g)
    g.verify(keyed=True)
    assert g[s].key == "K3"
    assert pre_count(g) == 3  # a, b to K3; then K3 to K9 for o


def test_pre_runs_once():
    g = graph_of(tumor_program(2, vector_len=2))
    insert_pre(g)
    with pytest.raises(VerifyError):
        insert_pre(g)


def test_plaintext_never_re_encrypted():
    g = graph_of("input a: int @K1; input p: plain int; output o @K2: a * p + p;")
    insert_pre(g)
    g.verify(keyed=True)
    (pre,) = ops(g, Op.PRE)
    assert g[g[pre].operands[0]].op in (Op.INPUT, Op.ADD)


# -- pipeline ----------------------------------------------------------------------

@pytest.mark.parametrize("n, ratio", [(4, 1), (4, 2), (4, 4), (16, 4), (64, 8)])
def test_pipeline_counts_are_2k_and_naive_2n(n, ratio):
    k = n // ratio
    source = tumor_program(n, k, vector_len=4)
    opt = compile_source(source)
    naive = compile_source(source, naive=True)
    assert opt.circuit.metrics["pre_count"] == 2 * k
    assert naive.circuit.metrics["pre_count"] == 2 * n


def test_naive_rekeys_every_ciphertext_input_once():
    g = graph_of("input a: int @K1; input b: int @K1; input p: plain int; output o @K2: a * b + p;")
    (report,) = run_pipeline(g, naive=True)
    assert report.name == "pre-naive" and report.pre_inserted == 2
    assert all(g[g[p].operands[0]].op is Op.INPUT for p in ops(g, Op.PRE))


def test_pipeline_on_constant_program():
    result = compile_source("output o: 2+3;")
    out = result.graph[result.graph.outputs[0]]
    assert result.graph[out.operands[0]].value == 5
    assert [r.name for r in result.reports] == list(DEFAULT_PIPELINE)
    assert result.circuit.metrics["pre_count"] == 0


def test_pipeline_verifies_key_invariants_after_pre():
    g = graph_of(tumor_program(8, 4, vector_len=3))
    run_pipeline(g)
    g.verify(keyed=True)
    for nid, node in g.nodes.items():
        if node.is_cipher:
            assert node.key is not None
    for out in g.outputs:
        assert g[g[out].operands[0]].key == g[out].key
    assert all(g[d].op in (Op.INPUT, Op.OUTPUT) for d in g.drains())


def test_pipeline_preserves_semantics_of_example():
    source = tumor_program(4, 2, vector_len=3)
    bundle = {**{f"a{i}": i % 2 for i in range(4)}, **{f"b{i}": [1, i % 2, 0] for i in range(4)}}
    expected = oracle_evaluate(parse_source(source), bundle)
    assert oracle_evaluate(compile_source(source).graph, bundle) == expected


def test_custom_pass_list():
    result = compile_source(tumor_program(2, vector_len=2), passes=["pre"])
    assert [r.name for r in result.reports] == ["pre"]
    assert compile_source("input a: int; output o: a;", passes=["fold"]).circuit is None


def test_parse_pass_list():
    assert parse_pass_list("fold, dce,pre") == ["fold", "dce", "pre"]
    with pytest.raises(ConfigError):
        parse_pass_list("fold,inline")


def test_warnings_are_reported_once():
    result = compile_source("input a: int; input b: int; output o: b;")
    assert result.warnings == ["input a unused"]


def test_rebalance_reduces_pre_count_to_one_per_key_group():
    source = tumor_program(8, 2, vector_len=2)
    without = compile_source(source, passes=["fold", "dce", "pre", "dce"])
    with_rb = compile_source(source)
    assert without.circuit.metrics["pre_count"] == 10
    assert with_rb.circuit.metrics["pre_count"] == 4
    assert Counter(n.op for n in with_rb.graph.nodes.values())[Op.ADD] == 14
