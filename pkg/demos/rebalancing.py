"""Rebalancing: chains become trees, and mixed-key sums are grouped by key.

    python3 demos/rebalancing.py
"""
from helium import compile_source, elaborate, multiplicative_depth, parse_source
from helium.heir import levels


def chain(op: str, keys: list[str]) -> str:
    lines = [f"input x{i}: int @{k} <= P;" for i, k in enumerate(keys)]
    lines.append(f"output o => P @{keys[0]}: " + f" {op} ".join(f"x{i}" for i in range(len(keys))) + ";")
    return "\n".join(lines) + "\n"


def main() -> None:
    print("product of m inputs written left to right:")
    for m in (4, 16, 64):
        source = chain("*", ["K"] * m)
        before = multiplicative_depth(elaborate(parse_source(source)))
        after = compile_source(source).circuit.metrics["mult_depth"]
        print(f"  m={m:<3} depth {before:>3} -> {after}")

    print("\nsum over alternating keys K0, K1, K0, K1, ... (output under K0):")
    for m in (4, 8, 32):
        source = chain("+", [f"K{i % 2}" for i in range(m)])
        plain = compile_source(source, passes=["fold", "dce", "pre", "dce"])
        full = compile_source(source)
        depth = max(levels(full.graph).values())
        print(f"  m={m:<3} re-encryptions {plain.circuit.metrics['pre_count']:>3} -> "
              f"{full.circuit.metrics['pre_count']}, addition levels {depth}")
    print("\nWithout rebalancing every K1 operand meets a K0 partial sum and must be")
    print("re-encrypted on its own; grouping sums all K1 operands first, so one")
    print("re-encryption of the K1 subtotal is enough.")


if __name__ == "__main__":
    main()
