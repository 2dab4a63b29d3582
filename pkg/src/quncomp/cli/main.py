"""``quncomp`` command line tool.

Subcommands::

    quncomp compile  prog.qc [--strategy inline|revert] [--no-pt] [--dot out.dot] [--stats-only]
    quncomp simulate prog.qc [--input 101 | --input a=1,b=0] [--vars a,b] [--check-disentangled]
    quncomp check    prog.qc

Exit status: 0 success, 1 parse error, 2 uncompute or session error,
3 simulation error. Errors print one ``ERROR:<kind>:<message>`` line to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from .. import analysis
from ..dag import build_dag
from ..errors import (
    ParseError,
    QuncompError,
    SessionError,
    SimulationError,
    WidthCapExceeded,
)
from ..ir import circuit_to_dict
from ..sim import histogram, run
from .parser import execute, parse

EXIT_OK, EXIT_PARSE, EXIT_UNCOMPUTE, EXIT_SIM = 0, 1, 2, 3


def _mcx_family(name: str) -> bool:
    return name.startswith("mcx_") or name.startswith("pt2cx")


def compile_stats(ex) -> dict:
    s = ex.session
    counts = s.circuit.gate_counts()
    freed = sorted({q for r in s.reports for q in r.freed})
    return {
        "qubits": s.circuit.num_qubits,
        "gate_counts": counts,
        "mcx_count": sum(n for g, n in counts.items() if _mcx_family(g)),
        "freed": freed,
        "pt_substitutions": sum(r.substituted for r in s.reports),
        "strategy": s.default_strategy,
    }


def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse(fh.read())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None


def _dump(obj) -> str:
    return json.dumps(obj, indent=2)


def cmd_compile(args) -> int:
    ex = execute(_load(args.file), strategy=args.strategy, phase_tolerant=not args.no_pt)
    stats = compile_stats(ex)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(build_dag(ex.session.circuit, ex.session.tol).to_dot())
    out = {"stats": stats} if args.stats_only else {"circuit": circuit_to_dict(ex.session.circuit), "stats": stats}
    print(_dump(out))
    return EXIT_OK


def _parse_inputs(text: str | None, session) -> dict[int, int]:
    if not text:
        return {}
    first_alloc: dict[int, object] = {}
    for ins in session.circuit:
        q = getattr(ins, "qubit", None)
        if q is not None and q not in first_alloc:
            first_alloc[q] = ins
    bits: dict[int, int] = {}

    def load(var, value: str):
        if len(value) != len(var.qubits) or set(value) - {"0", "1"}:
            raise SessionError(f"input for {var.name} must be {len(var.qubits)} binary digits")
        for q, a, c in zip(var.qubits, var.allocs, value):
            if first_alloc.get(q) is not a:
                raise SessionError(f"{var.name} sits on reused qubit {q} and cannot take an input")
            bits[q] = int(c)

    if "=" in text:
        for part in text.split(","):
            name, _, value = part.partition("=")
            load(session.variable(name.strip()), value.strip())
        return bits
    value = text.strip()
    for var in session.allocation_log:
        if not value:
            break
        chunk, value = value[: len(var.qubits)], value[len(var.qubits):]
        if len(chunk) < len(var.qubits):
            raise SessionError(f"input ends inside variable {var.name}")
        load(var, chunk)
    if value:
        raise SessionError("input has more bits than the program allocates")
    return bits


def cmd_simulate(args) -> int:
    ex = execute(_load(args.file), strategy=args.strategy)
    s = ex.session
    if args.vars:
        names = [n.strip() for n in args.vars.split(",") if n.strip()]
    elif ex.returned:
        names = ex.returned
    else:
        names = [v.name for v in s.live_variables]
    variables = [s.variable(n) for n in names]
    for v in variables:
        if not v.allocated:
            raise SessionError(f"variable {v.name} was released and cannot be measured")
    state = run(s.circuit, _parse_inputs(args.input, s), strict=args.check_disentangled)
    print(_dump(dict(histogram(s.circuit, variables, state=state))))
    return EXIT_OK


def _bool(b: bool) -> str:
    return "true" if b else "false"


def check_lines(ex) -> list[str]:
    lines = []
    tol = ex.session.tol
    for g in ex.seen_gates:
        try:
            qfree = analysis.is_qfree(g, tol)
            perm = [analysis.is_permeable(g, i, tol) for i in range(g.arity)]
        except WidthCapExceeded:
            lines.append(f"{g.name}: unknown (width cap)")
            continue
        flags = ",".join(f"q{i}:{_bool(p)}" for i, p in enumerate(perm))
        lines.append(f"{g.name}: qfree={_bool(qfree)} permeable=[{flags}]")
    return lines


def cmd_check(args) -> int:
    ex = execute(_load(args.file), analyze_only=True)
    for line in check_lines(ex):
        print(line)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quncomp", description="Compile and simulate programs with automatic uncomputation.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="run the uncompute pass and print the circuit as JSON")
    c.add_argument("file")
    c.add_argument("--strategy", choices=["inline", "revert"], default="inline")
    c.add_argument("--no-pt", action="store_true", help="disable phase tolerant substitution")
    c.add_argument("--dot", metavar="PATH", help="write the dependency graph in DOT format")
    c.add_argument("--stats-only", action="store_true")
    c.set_defaults(func=cmd_compile)

    s = sub.add_parser("simulate", help="print the exact measurement distribution as JSON")
    s.add_argument("file")
    s.add_argument("--strategy", choices=["inline", "revert"], default="inline")
    s.add_argument("--input", help="initial bits: '101' in allocation order, or 'a=1,b=0'")
    s.add_argument("--vars", help="comma separated variables to measure")
    s.add_argument("--check-disentangled", action="store_true",
                   help="fail if any deallocated qubit is not |0>")
    s.set_defaults(func=cmd_simulate)

    k = sub.add_parser("check", help="print qfree/permeability verdicts for each gate used")
    k.add_argument("file")
    k.set_defaults(func=cmd_check)
    return p


def _exit_code(exc: QuncompError) -> int:
    if isinstance(exc, ParseError):
        return EXIT_PARSE
    if isinstance(exc, SimulationError):
        return EXIT_SIM
    # uncompute, session and remaining circuit errors
    return EXIT_UNCOMPUTE


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except QuncompError as exc:
        msg = " ".join(str(exc).split())
        line = getattr(exc, "line", None)
        if line is not None and not isinstance(exc, ParseError):
            msg = f"line {line}: {msg}"
        print(f"ERROR:{exc.kind}:{msg}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
