import json
import random
from fractions import Fraction

import pytest

from helium import backend
from helium.bench import recurrence_rate, tumor_program
from helium.compiler import compile_source
from helium.errors import (
    ConfigError, DepthExceededError, KeyMismatchError, MissingInputError, PayloadOverflowError,
    RuntimeInputError,
)
from helium.frontend import parse_source
from helium.oracle import oracle_evaluate
from helium.sim import DEFAULT_UNITS, CostModel, OpCounts, evaluate, load_inputs, random_inputs

AFFINE = """
input a: int @K <= P; input x: int @K <= P; input b: int @K <= P;
output y => P @K: a * x + b;
"""


def affine_circuit():
    return compile_source(AFFINE).circuit


def test_affine_evaluates_to_17():
    result = evaluate(affine_circuit(), {"P": {"a": 3, "x": 4, "b": 5}})
    y = result.outputs["y"]
    assert (y.payload, y.key, y.depth) == ([17], "K", 1)
    assert result.max_depth == 1


def test_counts_and_default_cost():
    result = evaluate(affine_circuit(), {"P": {"a": 3, "x": 4, "b": 5}})
    assert result.counts.as_dict() == {**OpCounts().as_dict(), "load": 3, "mul_cc": 1, "add_cc": 1, "store": 1}
    assert result.counts.total() == 6
    assert result.total_cost == Fraction(11)


# one-hot mutation vectors for four patients; patients 0, 2 and 3 had a recurrence
TUMOR_BITS = {
    "a": [1, 0, 1, 1],
    "b": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [1, 0, 0, 0]],
}


def tumor_bundle():
    return {f"Party{i}": {f"a{i}": TUMOR_BITS["a"][i], f"b{i}": TUMOR_BITS["b"][i]} for i in range(4)}


def test_tumor_sums_match_oracle_and_hand_count():
    source = tumor_program(4, vector_len=4)
    result = evaluate(compile_source(source).circuit, tumor_bundle())
    expected = oracle_evaluate(parse_source(source), tumor_bundle())
    got = {name: v.payload for name, v in result.outputs.items()}
    assert got == expected
    assert got == {"R": [2, 0, 1, 0], "n": [2, 1, 1, 0]}
    assert {v.key for v in result.outputs.values()} == {"Key_Out"}


def test_client_side_division():
    rates = recurrence_rate([2, 0, 1, 0], [2, 1, 1, 0])
    assert rates == [Fraction(1), Fraction(0), Fraction(1), None]


def test_no_recurrences_gives_zero_numerator():
    bundle = tumor_bundle()
    for i in range(4):
        bundle[f"Party{i}"][f"a{i}"] = 0
    result = evaluate(compile_source(tumor_program(4, vector_len=4)).circuit, bundle)
    assert result.outputs["R"].payload == [0, 0, 0, 0]


def test_naive_and_optimized_agree_on_payloads():
    source = tumor_program(8, 2, vector_len=5)
    opt, naive = compile_source(source).circuit, compile_source(source, naive=True).circuit
    bundle = random_inputs(opt, random.Random(4))
    a, b = evaluate(opt, bundle), evaluate(naive, bundle)
    assert {k: v.payload for k, v in a.outputs.items()} == {k: v.payload for k, v in b.outputs.items()}
    assert (a.counts.pre, b.counts.pre) == (4, 16)


def circuit_from(instructions, inputs, outputs, depth=1):
    return backend.Circuit(
        version=backend.FORMAT_VERSION,
        metrics={"mult_depth": depth, "pre_count": 0, "max_plain_bits": 1, "node_count": len(instructions)},
        suggested_params={"plain_modulus_bits": 2, "depth_budget": depth},
        inputs=inputs, outputs=outputs, instructions=instructions,
    )


def test_hand_built_mismatched_add_is_rejected():
    c = circuit_from(
        [
            {"id": 0, "opcode": "LOAD", "args": [], "key": "K1", "name": "a"},
            {"id": 1, "opcode": "LOAD", "args": [], "key": "K2", "name": "b"},
            {"id": 2, "opcode": "ADD_CC", "args": [0, 1], "key": "K1"},
            {"id": 3, "opcode": "STORE", "args": [2], "key": "K1", "name": "o"},
        ],
        [{"name": "a", "party": "P", "key": "K1", "shape": []},
         {"name": "b", "party": "P", "key": "K2", "shape": []}],
        [{"name": "o", "party": "P", "key": "K1", "instr_ref": 3}],
    )
    with pytest.raises(KeyMismatchError):
        evaluate(c, {"P": {"a": 1, "b": 2}})


def test_pre_must_match_its_source_key():
    c = affine_circuit()
    c.instructions.insert(5, {"id": 5, "opcode": "PRE", "args": [4], "key": "K9", "source_key": "K0"})
    c.instructions[-1] = {**c.instructions[-1], "id": 6, "args": [5], "key": "K9"}
    with pytest.raises(KeyMismatchError):
        evaluate(c, {"P": {"a": 1, "x": 1, "b": 1}})


def test_pre_relabels_without_depth():
    source = "input a: int @K1; input b: int @K1; output o @K2: a * b;"
    result = evaluate(compile_source(source).circuit, {"Party_a": {"a": 6}, "Party_b": {"b": 7}})
    o = result.outputs["o"]
    assert (o.payload, o.key, o.depth) == ([42], "K2", 1)
    assert result.counts.pre == 1


def test_missing_input():
    with pytest.raises(MissingInputError):
        evaluate(affine_circuit(), {"P": {"a": 3, "x": 4}})


@pytest.mark.parametrize("bad", [[1], True, "3", 1.5])
def test_input_shape_is_checked(bad):
    with pytest.raises(RuntimeInputError):
        evaluate(affine_circuit(), {"P": {"a": bad, "x": 4, "b": 5}})


def test_vector_input_length_is_checked():
    c = compile_source("input v: int[3] @K <= P; output o @K: v + v;").circuit
    with pytest.raises(RuntimeInputError):
        evaluate(c, {"P": {"v": [1, 2]}})
    assert evaluate(c, {"P": {"v": [1, 2, 3]}}).outputs["o"].payload == [2, 4, 6]


def test_overflow_is_a_hard_error():
    with pytest.raises(PayloadOverflowError):
        evaluate(affine_circuit(), {"P": {"a": 2 ** 40, "x": 2 ** 40, "b": 0}})
    with pytest.raises(PayloadOverflowError):
        evaluate(affine_circuit(), {"P": {"a": 2 ** 63, "x": 1, "b": 0}})


def test_depth_budget_is_enforced():
    c = affine_circuit()
    c.suggested_params["depth_budget"] = 0
    with pytest.raises(DepthExceededError):
        evaluate(c, {"P": {"a": 1, "x": 1, "b": 1}})


def test_observed_depth_never_exceeds_metric():
    for n, k in [(4, 4), (8, 2)]:
        c = compile_source(tumor_program(n, k, vector_len=3)).circuit
        result = evaluate(c, random_inputs(c, random.Random(n)))
        assert result.max_depth <= c.metrics["mult_depth"]


def test_rotations_and_projection():
    source = "input v: int[4] @K <= P; var s = 0; for (x : v << 1) { s = s + x * x; } output o @K: s;"
    c = compile_source(source).circuit
    result = evaluate(c, {"P": {"v": [1, 2, 3, 4]}})
    assert result.outputs["o"].payload == [30]
    assert result.counts.project == 4 and result.counts.rot == 1


# -- cost model ---------------------------------------------------------------------

def test_default_units():
    model = CostModel()
    assert model.unit("pre") == 30 and model.unit("add_cp") == Fraction(1, 2)
    assert model.unit("sub_cc") == 0 and model.unit("load") == 0
    assert dict(model.units) == DEFAULT_UNITS


def test_cost_model_from_file_accepts_opcodes_and_fractions(tmp_path):
    path = tmp_path / "cost.json"
    path.write_text(json.dumps({"PRE": 7, "ROT_L": "3/2", "mul_cc": 2.5}))
    model = CostModel.load(path)
    assert model.unit("pre") == 7 and model.unit("rot") == Fraction(3, 2) and model.unit("mul_cc") == Fraction(5, 2)
    assert model.unit("add_cc") == 0


@pytest.mark.parametrize("data", [{"warp": 1}, {"pre": -1}, {"pre": "lots"}])
def test_bad_cost_models(data):
    with pytest.raises(ConfigError):
        CostModel.from_mapping(data)


def test_cost_is_linear_in_counts():
    c = compile_source(tumor_program(4, 2, vector_len=3)).circuit
    bundle = random_inputs(c, random.Random(1))
    result = evaluate(c, bundle)
    doubled = evaluate(c, bundle, CostModel({k: 2 * v for k, v in DEFAULT_UNITS.items()}))
    assert doubled.total_cost == 2 * result.total_cost
    pre_only = evaluate(c, bundle, CostModel({"pre": Fraction(1)}))
    assert pre_only.total_cost == c.metrics["pre_count"]


def test_load_inputs_validates_shape(tmp_path):
    good = tmp_path / "in.json"
    good.write_text(json.dumps({"P": {"a": 1}}))
    assert load_inputs(good) == {"P": {"a": 1}}
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"P": 3}))
    with pytest.raises(RuntimeInputError):
        load_inputs(bad)


def test_evaluation_is_deterministic():
    c = compile_source(tumor_program(8, 4, vector_len=6)).circuit
    bundle = random_inputs(c, random.Random(9))
    a, b = evaluate(c, bundle), evaluate(c, bundle)
    assert a == b


def test_random_inputs_are_seeded_bits():
    c = compile_source(tumor_program(4, vector_len=6)).circuit
    one, two = random_inputs(c, random.Random(3)), random_inputs(c, random.Random(3))
    assert one == two
    values = [v for party in one.values() for x in party.values() for v in (x if isinstance(x, list) else [x])]
    assert set(values) <= {0, 1}
