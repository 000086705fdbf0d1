"""Mock-ciphertext execution of circuits.

Values are integer payloads tagged with the key label they are encrypted
under, or ``None`` for plaintext. Homomorphic operations compute on the
payloads directly while checking the key discipline a real scheme would
enforce: ciphertext-ciphertext operations need a common key, and only a
re-encryption may change the key of a value.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from typing import Mapping

from . import arith
from .backend import Circuit
from .errors import (
    CircuitFormatError, ConfigError, DepthExceededError, KeyMismatchError, MissingInputError,
    PayloadOverflowError, RuntimeInputError,
)

InputBundle = Mapping[str, Mapping[str, "int | list[int]"]]


@dataclass
class LabeledValue:
    payload: list[int]
    key: str | None = None   # None marks a plaintext
    depth: int = 0

    @property
    def is_cipher(self) -> bool:
        return self.key is not None


@dataclass
class OpCounts:
    add_cc: int = 0
    add_cp: int = 0
    add_pp: int = 0
    sub_cc: int = 0
    sub_cp: int = 0
    sub_pp: int = 0
    mul_cc: int = 0
    mul_cp: int = 0
    mul_pp: int = 0
    rot: int = 0
    project: int = 0
    pre: int = 0
    const: int = 0
    load: int = 0
    store: int = 0

    def as_dict(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def total(self) -> int:
        return sum(self.as_dict().values())


COUNT_FIELDS = tuple(f.name for f in fields(OpCounts))


def count_field(opcode: str) -> str:
    return "rot" if opcode in ("ROT_L", "ROT_R") else opcode.lower()


DEFAULT_UNITS = {"add_cc": Fraction(1), "add_cp": Fraction(1, 2), "mul_cc": Fraction(10),
                 "mul_cp": Fraction(3), "rot": Fraction(8), "pre": Fraction(30)}


@dataclass(frozen=True)
class CostModel:
    """Cost units per operation class; classes not listed cost nothing.

    The default units are arbitrary placeholders, not measurements.
    """
    units: Mapping[str, Fraction] = field(default_factory=lambda: dict(DEFAULT_UNITS))

    def __post_init__(self):
        for name, unit in self.units.items():
            if name not in COUNT_FIELDS:
                raise ConfigError(f"unknown cost entry {name!r}")
            if unit < 0:
                raise ConfigError(f"cost of {name} must be non-negative, got {unit}")

    def unit(self, name: str) -> Fraction:
        return Fraction(self.units.get(name, 0))

    def total(self, counts: OpCounts) -> Fraction:
        return sum((n * self.unit(name) for name, n in counts.as_dict().items()), Fraction(0))

    @classmethod
    def from_mapping(cls, data: Mapping) -> "CostModel":
        """Accepts opcode names (``ROT_L``) or count names (``rot``); values may be
        numbers or fraction strings such as ``"1/2"``."""
        units = {}
        for name, raw in data.items():
            try:
                unit = Fraction(str(raw))
            except (ValueError, ZeroDivisionError):
                raise ConfigError(f"cost of {name} is not a number: {raw!r}") from None
            units[count_field(name.upper()) if name.isupper() else name] = unit
        return cls(units)

    @classmethod
    def load(cls, path: str | Path) -> "CostModel":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: cost model must be a JSON object")
        return cls.from_mapping(data)


@dataclass
class EvalResult:
    outputs: dict[str, LabeledValue]
    counts: OpCounts
    total_cost: Fraction
    max_depth: int


def load_inputs(path: str | Path) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise RuntimeInputError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(data, dict) or not all(isinstance(v, dict) for v in data.values()):
        raise RuntimeInputError(f"{path}: expected a map from party to {{name: value}}")
    return data


def _read_input(entry: dict, bundle: InputBundle) -> list[int]:
    name, party = entry["name"], entry["party"]
    try:
        raw = bundle[party][name]
    except KeyError:
        raise MissingInputError(f"no value for input {name} of party {party}") from None
    shape = entry["shape"]
    if shape:
        ok = isinstance(raw, list) and len(raw) == shape[0]
        values = raw if ok else []
    else:
        ok = True
        values = [raw]
    if not ok or not all(isinstance(v, int) and not isinstance(v, bool) for v in values):
        want = f"int[{shape[0]}]" if shape else "int"
        raise RuntimeInputError(f"input {name} of party {party} must be {want}, got {raw!r}")
    try:
        return arith.checked(list(values))
    except arith.Int64Overflow as exc:
        raise PayloadOverflowError(f"input {name}: {exc}") from None


_BINARY = {"ADD": arith.add, "SUB": arith.sub, "MUL": arith.mul}


def _step(ins: dict, args: list[LabeledValue], inputs_by_name: dict, bundle: InputBundle
          ) -> LabeledValue:
    opcode = ins["opcode"]
    key = ins.get("key")
    if opcode == "CONST":
        value = ins["value"]
        return LabeledValue(list(value) if isinstance(value, list) else [value])
    if opcode == "LOAD":
        return LabeledValue(_read_input(inputs_by_name[ins["name"]], bundle), key)
    if opcode == "STORE":
        if args[0].key != key:
            raise KeyMismatchError(f"output {ins['name']} declared under {key}, value under {args[0].key}")
        return args[0]
    if opcode == "PRE":
        src = args[0]
        if src.key is None or src.key != ins["source_key"]:
            raise KeyMismatchError(f"PRE #{ins['id']} expects {ins['source_key']}, got {src.key}")
        return LabeledValue(src.payload, key, src.depth)
    if opcode in ("ROT_L", "ROT_R"):
        amount = args[1].payload
        if args[1].is_cipher or len(amount) != 1:
            raise CircuitFormatError(f"#{ins['id']}: rotation amount must be a plain scalar")
        rot = arith.rotate_left if opcode == "ROT_L" else arith.rotate_right
        return LabeledValue(rot(args[0].payload, amount[0]), args[0].key, args[0].depth)
    if opcode == "PROJECT":
        return LabeledValue([args[0].payload[ins["index"]]], args[0].key, args[0].depth)

    kind, _, mode = opcode.partition("_")
    if kind not in _BINARY or mode not in ("CC", "CP", "PP"):
        raise CircuitFormatError(f"unknown opcode {opcode!r}")
    keys = [a.key for a in args if a.is_cipher]
    if len(keys) != {"CC": 2, "CP": 1, "PP": 0}[mode]:
        raise KeyMismatchError(f"#{ins['id']} {opcode} got {len(keys)} ciphertext operands")
    if len(set(keys)) > 1:
        raise KeyMismatchError(f"#{ins['id']} {opcode} mixes keys {keys[0]} and {keys[1]}")
    depth = max(a.depth for a in args) + (1 if opcode == "MUL_CC" else 0)
    try:
        payload = _BINARY[kind](args[0].payload, args[1].payload)
    except ValueError as exc:
        raise CircuitFormatError(f"#{ins['id']}: {exc}") from None
    return LabeledValue(payload, keys[0] if keys else None, depth)


def evaluate(c: Circuit, inputs: InputBundle, cost: CostModel | None = None) -> EvalResult:
    """Run every instruction in order and collect outputs, counts and cost."""
    cost = cost or CostModel()
    budget = c.suggested_params["depth_budget"]
    inputs_by_name = {entry["name"]: entry for entry in c.inputs}
    values: dict[int, LabeledValue] = {}
    counts = OpCounts()
    max_depth = 0
    outputs: dict[str, LabeledValue] = {}
    for ins in c.instructions:
        try:
            args = [values[a] for a in ins["args"]]
        except KeyError as exc:
            raise CircuitFormatError(f"#{ins['id']} reads undefined #{exc.args[0]}") from None
        try:
            result = _step(ins, args, inputs_by_name, bundle=inputs)
        except arith.Int64Overflow as exc:
            raise PayloadOverflowError(f"#{ins['id']} {ins['opcode']}: {exc}") from None
        if ins["opcode"] not in ("STORE", "CONST") and result.key != ins.get("key"):
            raise KeyMismatchError(f"#{ins['id']} produced key {result.key}, declared {ins.get('key')}")
        if result.depth > budget:
            raise DepthExceededError(f"#{ins['id']} reaches depth {result.depth} > budget {budget}")
        max_depth = max(max_depth, result.depth)
        field_name = count_field(ins["opcode"])
        setattr(counts, field_name, getattr(counts, field_name) + 1)
        values[ins["id"]] = result
        if ins["opcode"] == "STORE":
            outputs[ins["name"]] = result
    return EvalResult(outputs, counts, cost.total(counts), max_depth)


def random_inputs(c: Circuit, rng: random.Random, bits: int = 1) -> dict:
    """A bundle of uniformly random non-negative ``bits``-wide values for every input."""
    bundle: dict[str, dict] = {}
    hi = (1 << bits) - 1
    for entry in c.inputs:
        if entry["shape"]:
            value = [rng.randint(0, hi) for _ in range(entry["shape"][0])]
        else:
            value = rng.randint(0, hi)
        bundle.setdefault(entry["party"], {})[entry["name"]] = value
    return bundle
