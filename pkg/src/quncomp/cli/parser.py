"""Line-oriented program format.

One directive per line, ``#`` starts a comment::

    qvar a 1
    gate mcx a.0 b.0 local.0
    wrap name {
        gate ry(pi/4) t.0
    }
    uncompute local [inline|revert]
    delete name [unchecked]
    auto {
        ...
        return r
    }

A gate operand is ``var.index`` or a bare ``var`` for all of its qubits.
``mcx``/``mcz`` take their width from the operand count.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from ..errors import ParseError, QuncompError, UnknownGate
from ..ir import lookup_gate, mcx, mcz, ry, z
from ..session import Session
from ..uncompute import auto_uncompute_scope, uncompute

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")
_OPERAND = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)(?:\.(\d+))?$")
_ANGLE = re.compile(r"(-)?(?:(\d+(?:\.\d*)?)\s*\*?\s*)?pi(?:\s*/\s*(\d+))?$")


@dataclass
class Directive:
    kind: str
    line: int
    name: str | None = None
    gate: str | None = None
    operands: list[tuple[str, int | None]] = field(default_factory=list)
    option: str | None = None
    width: int = 1
    body: list["Directive"] = field(default_factory=list)
    returns: list[str] = field(default_factory=list)


@dataclass
class Program:
    directives: list[Directive]

    def __len__(self):
        return len(self.directives)

    def __iter__(self):
        return iter(self.directives)


def parse_angle(text: str) -> float:
    t = text.replace(" ", "")
    m = _ANGLE.fullmatch(t)
    if m:
        sign = -1.0 if m.group(1) else 1.0
        num = float(m.group(2)) if m.group(2) else 1.0
        den = float(m.group(3)) if m.group(3) else 1.0
        return sign * num * math.pi / den
    try:
        return float(t)
    except ValueError:
        raise ValueError(f"bad angle {text!r}") from None


class _Parser:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0
        self.widths: dict[str, int] = {}
        self.wraps: dict[str, int] = {}

    def error(self, msg, line):
        raise ParseError(msg, line)

    def next_line(self):
        while self.pos < len(self.lines):
            self.pos += 1
            raw = self.lines[self.pos - 1].split("#", 1)[0].strip()
            if raw:
                return self.pos, raw
        return None, None

    def parse_block(self, closing: bool, in_wrap=False, in_auto=False) -> tuple[list[Directive], list[str]]:
        out: list[Directive] = []
        returns: list[str] = []
        while True:
            ln, text = self.next_line()
            if text is None:
                if closing:
                    self.error("missing '}'", len(self.lines))
                return out, returns
            words = text.split()
            head = words[0]
            if head == "}":
                if not closing or len(words) > 1:
                    self.error("unexpected '}'", ln)
                return out, returns
            if returns:
                self.error("'return' must be the last line of an auto block", ln)
            if in_wrap and head != "gate":
                self.error(f"only gate lines are allowed inside wrap, got {head!r}", ln)
            if head == "return":
                if not in_auto:
                    self.error("'return' outside an auto block", ln)
                for name in words[1:]:
                    self.check_var(name, ln)
                returns = words[1:]
                continue
            handler = getattr(self, f"p_{head}", None)
            if handler is None:
                self.error(f"unknown directive {head!r}", ln)
            out.append(handler(words, ln))

    def check_var(self, name, ln) -> int:
        if name not in self.widths:
            self.error(f"unknown variable {name!r}", ln)
        return self.widths[name]

    def p_qvar(self, words, ln):
        if len(words) not in (2, 3) or not _NAME.match(words[1]):
            self.error("usage: qvar <name> [width]", ln)
        name = words[1]
        if name in self.widths:
            self.error(f"variable {name!r} already declared", ln)
        try:
            width = int(words[2]) if len(words) == 3 else 1
        except ValueError:
            self.error(f"bad width {words[2]!r}", ln)
        if width < 1:
            self.error("width must be positive", ln)
        self.widths[name] = width
        return Directive("qvar", ln, name=name, width=width)

    def p_gate(self, words, ln):
        if len(words) < 3:
            self.error("usage: gate <gatename> <operand>...", ln)
        gname = words[1]
        operands, flat = [], []
        for tok in words[2:]:
            m = _OPERAND.fullmatch(tok)
            if not m:
                self.error(f"bad operand {tok!r}", ln)
            var, idx = m.group(1), m.group(2)
            width = self.check_var(var, ln)
            if idx is None:
                operands.append((var, None))
                flat.extend((var, i) for i in range(width))
            else:
                i = int(idx)
                if i >= width:
                    self.error(f"{var} has {width} qubits, index {i} out of range", ln)
                operands.append((var, i))
                flat.append((var, i))
        if len(set(flat)) != len(flat):
            self.error(f"duplicate operand in '{' '.join(words[1:])}'", ln)
        arity = self.gate_arity(gname, len(flat), ln)
        if arity != len(flat):
            self.error(f"gate {gname} takes {arity} qubits, got {len(flat)}", ln)
        return Directive("gate", ln, gate=gname, operands=operands)

    def gate_arity(self, gname, n, ln) -> int:
        if gname in ("mcx", "mcz"):
            if n < 2 and gname == "mcx":
                self.error("mcx needs at least one control", ln)
            return n
        if gname in self.wraps:
            return self.wraps[gname]
        m = re.fullmatch(r"ry\((.*)\)", gname)
        if m:
            try:
                parse_angle(m.group(1))
            except ValueError as exc:
                self.error(str(exc), ln)
            return 1
        try:
            return lookup_gate(gname).arity
        except (UnknownGate, QuncompError):
            self.error(f"unknown gate {gname!r}", ln)

    def p_wrap(self, words, ln):
        if len(words) != 3 or words[2] != "{" or not _NAME.match(words[1]):
            self.error("usage: wrap <name> {", ln)
        body, _ = self.parse_block(True, in_wrap=True)
        if not body:
            self.error("empty wrap block", ln)
        wires = {(v, i) for d in body for v, i in self._flat(d)}
        arity = len(wires)
        if self.wraps.get(words[1], arity) != arity:
            self.error(f"wrap {words[1]!r} redefined with a different width", ln)
        self.wraps[words[1]] = arity
        return Directive("wrap", ln, name=words[1], body=body)

    def _flat(self, d):
        for v, i in d.operands:
            if i is None:
                yield from ((v, k) for k in range(self.widths[v]))
            else:
                yield (v, i)

    def p_uncompute(self, words, ln):
        if len(words) not in (2, 3):
            self.error("usage: uncompute <name> [inline|revert]", ln)
        self.check_var(words[1], ln)
        opt = words[2] if len(words) == 3 else None
        if opt not in (None, "inline", "revert"):
            self.error(f"unknown strategy {opt!r}", ln)
        return Directive("uncompute", ln, name=words[1], option=opt)

    def p_delete(self, words, ln):
        if len(words) not in (2, 3) or (len(words) == 3 and words[2] != "unchecked"):
            self.error("usage: delete <name> [unchecked]", ln)
        self.check_var(words[1], ln)
        return Directive("delete", ln, name=words[1], option=words[2] if len(words) == 3 else None)

    def p_auto(self, words, ln):
        if words != ["auto", "{"]:
            self.error("usage: auto {", ln)
        body, returns = self.parse_block(True, in_auto=True)
        return Directive("auto", ln, body=body, returns=returns)


def parse(text: str) -> Program:
    """Parse program text; raises :class:`ParseError` with a line number."""
    directives, _ = _Parser(text).parse_block(False)
    return Program(directives)


# -- execution -------------------------------------------------------------------


@dataclass
class Execution:
    session: Session
    returned: list[str] = field(default_factory=list)
    seen_gates: list = field(default_factory=list)


def _locate(exc: QuncompError, line: int):
    if getattr(exc, "line", None) is None:
        exc.line = line
    return exc


def execute(program: Program, strategy: str = "inline", phase_tolerant: bool = True,
            tol: float | None = None, analyze_only: bool = False) -> Execution:
    """Run ``program`` in a fresh session.

    With ``analyze_only`` uncompute directives and auto scopes leave their
    variables alone, so the gates can be inspected even when uncomputation
    would fail.
    """
    kw = {} if tol is None else {"tol": tol}
    session = Session(strategy=strategy, phase_tolerant=phase_tolerant, **kw)
    ex = Execution(session)
    _run_block(ex, program.directives, analyze_only)
    return ex


def _refs(session: Session, operands):
    out = []
    for var, idx in operands:
        v = session.variable(var)
        out.append(v if idx is None else v[idx])
    return out


def _gate_for(session: Session, d: Directive):
    width = sum(len(session.resolve(r)) for r in _refs(session, d.operands))
    if d.gate == "mcx":
        return mcx(width - 1)
    if d.gate == "mcz":
        return mcz(width - 1) if width > 1 else z()
    m = re.fullmatch(r"ry\((.*)\)", d.gate)
    if m:
        return ry(parse_angle(m.group(1)))
    return lookup_gate(d.gate, session.gates)


def _note(ex: Execution, gate):
    if all(gate is not g for g in ex.seen_gates):
        ex.seen_gates.append(gate)


def _run_block(ex: Execution, directives, analyze_only):
    s = ex.session
    for d in directives:
        try:
            if d.kind == "qvar":
                s.qvar(d.name, d.width)
            elif d.kind == "gate":
                g = _gate_for(s, d)
                s.apply(g, *_refs(s, d.operands))
                _note(ex, g)
            elif d.kind == "wrap":
                with s.wrap(d.name):
                    for inner in d.body:
                        s.apply(_gate_for(s, inner), *_refs(s, inner.operands))
                _note(ex, s.gates[d.name])
            elif d.kind == "uncompute":
                if not analyze_only:
                    uncompute(s, d.name, d.option)
            elif d.kind == "delete":
                s.delete(d.name, unchecked=d.option == "unchecked")
            elif d.kind == "auto":

                def body(block=d):
                    _run_block(ex, block.body, analyze_only)
                    return [s.variable(n) for n in block.returns]

                if analyze_only:
                    body()
                else:
                    auto_uncompute_scope(s, body, strategy=s.default_strategy)
                ex.returned.extend(n for n in d.returns if n not in ex.returned)
        except QuncompError as exc:
            raise _locate(exc, d.line)
