"""How many proxy re-encryptions does key-aware placement save?

Sweeps the tumor family over dataset counts and datasets-per-key ratios and
prints the PRE counts next to the eager baseline, plus the modeled cost
overhead relative to a run where no re-encryption is needed at all.

    python3 demos/pre_reduction.py [--quick]
"""
import sys

from helium.bench import sweep_bench


def main(argv: list[str]) -> None:
    n_list = [32, 64] if "--quick" in argv else [128, 256, 512, 768, 1024]
    rows = sweep_bench(n_list, [1, 2, 4, 8], vector_len=16, seed=0)
    print(f"{'n':>5} {'n/k':>4} {'k':>5} {'eager':>6} {'placed':>6} {'saved':>7} {'overhead':>9}")
    for r in rows:
        overhead = (r.cost_opt - r.cost_nopre) / r.cost_nopre
        print(f"{r.n:>5} {r.ratio:>4} {r.k:>5} {r.p_naive:>6} {r.p_opt:>6} "
              f"{float(r.reduction):>6.1f}% {float(overhead):>8.1%}")
    print("\nEager placement re-encrypts every input (2n). Grouping each sum by key")
    print("first needs one re-encryption per key and output (2k), so the saving is")
    print("1 - k/n and does not depend on n.")


if __name__ == "__main__":
    main(sys.argv[1:])
