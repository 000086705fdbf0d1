"""Command-line entry point: ``helium compile | run | stats | bench``.

Exit status is 0 on success, 1 for user errors (bad source, bad input
files, bad flags) and 2 when an internal invariant check fails.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence

from . import backend, bench
from .compiler import compile_program
from .elaborate import elaborate
from .errors import CompileError, ConfigError, HeliumError, InternalError
from .frontend import dump_ast, parse_source
from .passes import PassReport, parse_pass_list
from .sim import CostModel, evaluate, load_inputs

EXIT_OK, EXIT_USER, EXIT_INTERNAL = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for internal failures here
    def error(self, message: str):
        raise _UsageError(f"{self.prog}: {message}")


def _color(enabled: bool, code: str, text: str) -> str:
    return f"\033[{code}m{text}\033[0m" if enabled else text


class _Console:
    def __init__(self, stdout, stderr):
        self.out, self.err = stdout, stderr
        self.color = os.environ.get("HELIUM_COLOR", "1") != "0" and getattr(stderr, "isatty", lambda: False)()

    def error(self, text: str) -> None:
        # colour only the severity word of "file:line:col: error: message"
        word = "error:"
        if self.color and word in text:
            head, _, tail = text.partition(word)
            text = head + _color(True, "1;31", word) + tail
        print(text, file=self.err)

    def warning(self, where: str, text: str) -> None:
        print(f"{where}: {_color(self.color, '1;33', 'warning:')} {text}", file=self.err)

    def emit(self, text: str, path: str | None) -> None:
        if path is None:
            self.out.write(text)
        else:
            Path(path).write_text(text, encoding="utf-8")


def _int_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def _pass_list(text: str) -> list[str]:
    try:
        return parse_pass_list(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="helium", description="Compiler and simulator for HEDSL programs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compile", help="compile a HEDSL program to a circuit")
    p.add_argument("source", help="HEDSL source file")
    p.add_argument("-o", "--output", help="write the artifact here instead of standard output")
    p.add_argument("--emit", choices=("ast", "heir", "circuit"), default="circuit",
                   help="stage to emit: parsed AST, elaborated graph, or circuit (default)")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--passes", type=_pass_list, metavar="LIST",
                       help="comma-separated passes to run in order, from fold,dce,rebalance,pre")
    group.add_argument("--no-opt", action="store_true",
                       help="skip optimization and re-encrypt every input eagerly")
    p.add_argument("--input-bits", type=int, default=backend.DEFAULT_INPUT_BITS, metavar="N",
                   help="assumed bit width of every input for the plaintext size metric (default 1)")
    p.add_argument("--quiet", action="store_true", help="do not print the pass report table")

    p = sub.add_parser("run", help="evaluate a circuit on an input bundle")
    p.add_argument("circuit", help="circuit JSON file")
    p.add_argument("--inputs", required=True, help="JSON map of party to {input name: value}")
    p.add_argument("--cost", help="JSON cost model (opcode or count name to unit cost)")
    p.add_argument("--counts", action="store_true", help="also print operation counts and cost")

    p = sub.add_parser("stats", help="print circuit metrics and key interface")
    p.add_argument("circuit", help="circuit JSON file")

    p = sub.add_parser("bench", help="sweep PRE counts over the tumor-recurrence program family")
    p.add_argument("--n", type=_int_list, required=True, metavar="LIST",
                   help="comma-separated dataset counts")
    p.add_argument("--ratio", type=_int_list, required=True, metavar="LIST",
                   help="comma-separated datasets-per-key ratios")
    p.add_argument("--cost", help="JSON cost model")
    p.add_argument("--seed", type=int, default=0, help="seed for random input bits (default 0)")
    p.add_argument("--vector-len", type=int, default=16, metavar="N",
                   help="mutation vector length (default 16; counts do not depend on it)")
    p.add_argument("-o", "--output", help="write CSV here instead of standard output")
    return parser


def _report_table(reports: Sequence[PassReport]) -> str:
    header = ("pass", "removed", "added", "pre")
    rows = [(r.name, str(r.nodes_removed), str(r.nodes_added), str(r.pre_inserted)) for r in reports]
    widths = [max(len(x) for x in col) for col in zip(header, *rows)]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()
                     for row in (header, *rows))


def _read_source(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"file not found: {path}") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None


def _existing(path: str) -> str:
    if not Path(path).is_file():
        raise ConfigError(f"file not found: {path}")
    return path


def cmd_compile(args, con: _Console) -> int:
    program = parse_source(_read_source(args.source))
    if args.emit == "ast":
        con.emit(dump_ast(program), args.output)
        return EXIT_OK
    if args.emit == "heir":
        con.emit(elaborate(program).dump(), args.output)
        return EXIT_OK
    if args.passes is not None and "pre" not in args.passes:
        raise ConfigError("the pass list must include 'pre' to emit a circuit")
    result = compile_program(program, args.passes, naive=args.no_opt, input_bits=args.input_bits)
    for warning in result.warnings:
        con.warning(args.source, warning)
    if not args.quiet:
        print(_report_table(result.reports), file=con.err)
    con.emit(backend.dumps(result.circuit), args.output)
    return EXIT_OK


def cmd_run(args, con: _Console) -> int:
    circuit = backend.read_circuit(_existing(args.circuit))
    inputs = load_inputs(_existing(args.inputs))
    cost = CostModel.load(_existing(args.cost)) if args.cost else CostModel()
    result = evaluate(circuit, inputs, cost)
    vector = _vector_instructions(circuit)
    doc: dict = {"outputs": {}}
    for out in circuit.outputs:
        value = result.outputs[out["name"]]
        doc["outputs"][out["name"]] = {
            "key": value.key,
            "value": value.payload if vector[out["instr_ref"]] else value.payload[0],
        }
    if args.counts:
        doc["counts"] = result.counts.as_dict()
        doc["total_cost"] = bench.format_number(result.total_cost)
        doc["max_depth"] = result.max_depth
    con.emit(json.dumps(doc, indent=2) + "\n", None)
    return EXIT_OK


def _vector_instructions(circuit: backend.Circuit) -> dict[int, bool]:
    """Which instructions produce vectors, derived from input shapes and constants."""
    shapes = {i["name"]: i["shape"] for i in circuit.inputs}
    vector: dict[int, bool] = {}
    for ins in circuit.instructions:
        op = ins["opcode"]
        if op == "LOAD":
            vector[ins["id"]] = bool(shapes[ins["name"]])
        elif op == "CONST":
            vector[ins["id"]] = isinstance(ins["value"], list)
        elif op == "PROJECT":
            vector[ins["id"]] = False
        elif op in ("ROT_L", "ROT_R"):
            vector[ins["id"]] = vector[ins["args"][0]]
        else:
            vector[ins["id"]] = any(vector[a] for a in ins["args"])
    return vector


def cmd_stats(args, con: _Console) -> int:
    circuit = backend.read_circuit(_existing(args.circuit))
    ki = backend.key_interface(circuit)
    lines = [f"{k}={v}" for k, v in circuit.metrics.items()]
    lines += [f"{k}={v}" for k, v in circuit.suggested_params.items()]
    lines += [
        f"K_I={','.join(sorted(ki.K_I))}",
        f"K_O={','.join(sorted(ki.K_O))}",
        f"p_min={ki.p_min}",
        f"p_naive={ki.p_naive}",
        "rekeys=" + ",".join(f"{s}->{t}" for s, t in sorted(ki.required_rekeys)),
    ]
    counts = circuit.opcode_counts()
    lines.append("opcodes=" + ",".join(f"{op}:{counts[op]}" for op in backend.OPCODES if op in counts))
    con.emit("\n".join(lines) + "\n", None)
    return EXIT_OK


def cmd_bench(args, con: _Console) -> int:
    cost = CostModel.load(_existing(args.cost)) if args.cost else CostModel()
    if args.vector_len < 1:
        raise ConfigError("--vector-len must be positive")
    rows = bench.sweep_bench(args.n, args.ratio, cost, vector_len=args.vector_len, seed=args.seed)
    con.emit(bench.rows_to_csv(rows), args.output)
    return EXIT_OK


COMMANDS = {"compile": cmd_compile, "run": cmd_run, "stats": cmd_stats, "bench": cmd_bench}


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    con = _Console(stdout or sys.stdout, stderr or sys.stderr)
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        con.error(f"{exc}".replace(": ", ": error: ", 1))
        return EXIT_USER
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USER
    source = getattr(args, "source", "<input>")
    try:
        return COMMANDS[args.command](args, con)
    except CompileError as exc:
        con.error(exc.format(source))
        return EXIT_USER
    except InternalError as exc:
        con.error(f"helium: internal error: {type(exc).__name__}: {exc}")
        return EXIT_INTERNAL
    except (HeliumError, OverflowError) as exc:
        con.error(f"helium: error: {exc}")
        return EXIT_USER
    except OSError as exc:
        con.error(f"helium: error: {exc}")
        return EXIT_USER


if __name__ == "__main__":
    sys.exit(main())
