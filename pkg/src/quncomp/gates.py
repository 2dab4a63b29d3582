"""Gate functions acting on quantum variables and qubits.

Each function finds the session from its arguments::

    a, b, t = s.qvar("a"), s.qvar("b"), s.qvar("t")
    mcx([a, b], t)
"""

from __future__ import annotations

from . import ir
from .errors import SessionError
from .session import QuantumVariable, Qubit


def _session(refs):
    for r in refs:
        if isinstance(r, (Qubit, QuantumVariable)):
            return r.session
    raise SessionError("gate needs at least one qubit or variable operand")


def _flat(refs):
    out = []
    for r in refs:
        if isinstance(r, (list, tuple)):
            out.extend(_flat(r))
        else:
            out.append(r)
    return out


def _width(session, refs):
    return sum(len(session.resolve(r)) for r in refs)


def x(q):
    return _session([q]).apply(ir.x(), q)


def h(q):
    return _session([q]).apply(ir.h(), q)


def z(q):
    return _session([q]).apply(ir.z(), q)


def ry(theta: float, q):
    return _session([q]).apply(ir.ry(theta), q)


def cx(control, target):
    return _session([control, target]).apply(ir.cx(), control, target)


def cz(a, b):
    return _session([a, b]).apply(ir.cz(), a, b)


def mcx(controls, target):
    controls = _flat([controls])
    s = _session(controls + [target])
    return s.apply(ir.mcx(_width(s, controls)), *controls, target)


def mcz(qubits):
    qubits = _flat([qubits])
    s = _session(qubits)
    k = _width(s, qubits) - 1
    return s.apply(ir.mcz(k) if k else ir.z(), *qubits)


def apply(gate: ir.GateDef, *refs):
    return _session(_flat(list(refs))).apply(gate, *_flat(list(refs)))
