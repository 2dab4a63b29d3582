"""Quantum variables, sessions and the qubit allocator.

A :class:`Session` owns one growing :class:`~quncomp.ir.Circuit`. Variables
draw physical qubit ids from the session's free pool first (ascending) and
fall back to fresh ids, so a qubit released by ``uncompute``/``delete`` is
reused by the next allocation.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import analysis, linalg
from .errors import (
    DeadQubit,
    DuplicateName,
    NotProvablyZero,
    SessionError,
    WrapError,
)
from .ir import WRAPPED, Alloc, Apply, Circuit, Dealloc, GateDef, circuit_to_dict

ALLOCATED, DELETED = "allocated", "deleted"


@dataclass(frozen=True)
class Qubit:
    variable: "QuantumVariable"
    index: int

    @property
    def id(self) -> int:
        return self.variable.qubits[self.index]

    @property
    def session(self) -> "Session":
        return self.variable.session

    def __repr__(self):
        return f"{self.variable.name}.{self.index}"


@dataclass(eq=False)
class QuantumVariable:
    name: str
    session: "Session"
    qubits: list[int]
    state: str = ALLOCATED
    allocs: list = field(default_factory=list, repr=False)
    # gates that produced the value, recorded when the variable is released;
    # None when deleted without proof that it was |0>
    computation: list | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.qubits)

    def __getitem__(self, i) -> Qubit:
        if not -len(self.qubits) <= i < len(self.qubits):
            raise IndexError(f"{self.name} has {len(self.qubits)} qubits")
        return Qubit(self, i % len(self.qubits))

    def __iter__(self):
        return (self[i] for i in range(len(self.qubits)))

    @property
    def allocated(self) -> bool:
        return self.state == ALLOCATED

    def uncompute(self, strategy: str | None = None):
        from .uncompute import uncompute

        return uncompute(self.session, self, strategy)

    def delete(self, unchecked: bool = False):
        self.session.delete(self, unchecked=unchecked)


class Session:
    def __init__(self, tol: float = linalg.TOL, strategy: str = "inline", phase_tolerant: bool = True):
        self.circuit = Circuit()
        self.variables: dict[str, QuantumVariable] = {}
        self.free_pool: list[int] = []
        self.next_fresh_id = 0
        self.tol = tol
        self.default_strategy = strategy
        self.phase_tolerant = phase_tolerant
        self.allocation_log: list[QuantumVariable] = []
        # Alloc instruction -> (owning variable, bit)
        self.alloc_owner: dict[Alloc, tuple[QuantumVariable, int]] = {}
        self.gates: dict[str, GateDef] = {}
        self.reports: list = []
        self._auto_names = 0

    # -- allocation -------------------------------------------------------

    def take_ids(self, width: int, pool: list[int] | None = None, fresh: int | None = None):
        """Pick ``width`` ids pool-first; returns (ids, remaining pool, next fresh id)."""
        pool = sorted(self.free_pool if pool is None else pool)
        fresh = self.next_fresh_id if fresh is None else fresh
        ids = []
        for _ in range(width):
            if pool:
                ids.append(pool.pop(0))
            else:
                ids.append(fresh)
                fresh += 1
        return ids, pool, fresh

    def qvar(self, name: str | None = None, width: int = 1) -> QuantumVariable:
        return alloc_variable(self, name, width)

    def variable(self, ref) -> QuantumVariable:
        if isinstance(ref, QuantumVariable):
            return ref
        try:
            return self.variables[ref]
        except KeyError:
            raise SessionError(f"unknown variable {ref!r}") from None

    def owner(self, qubit: int) -> QuantumVariable | None:
        """Allocated variable currently holding ``qubit``."""
        for v in self.variables.values():
            if v.allocated and qubit in v.qubits:
                return v
        return None

    @property
    def live_variables(self) -> list[QuantumVariable]:
        return [v for v in self.variables.values() if v.allocated]

    # -- gates --------------------------------------------------------------

    def resolve(self, ref) -> list[int]:
        if isinstance(ref, Qubit):
            var = ref.variable
            ids = [ref.id]
        elif isinstance(ref, QuantumVariable):
            var = ref
            ids = list(ref.qubits)
        else:
            raise TypeError(f"expected a qubit or variable, got {ref!r}")
        if var.session is not self:
            raise SessionError(f"{var.name} belongs to another session")
        if not var.allocated:
            raise DeadQubit(f"variable {var.name} has been deleted")
        return ids

    def apply(self, gate: GateDef, *refs) -> Apply:
        operands = [q for r in refs for q in self.resolve(r)]
        ins = Apply(gate, tuple(operands))
        self.circuit.append(ins)
        if gate.kind != "builtin":
            self.register_gate(gate)
        return ins

    def register_gate(self, gate: GateDef):
        known = self.gates.get(gate.name)
        if known is None:
            self.gates[gate.name] = gate
        elif known is not gate and _definition(known) != _definition(gate):
            raise SessionError(f"gate name {gate.name!r} already used for a different definition")

    # -- release -----------------------------------------------------------

    def interval_start(self, var: QuantumVariable, circuit: Circuit | None = None) -> int:
        """Position right after the variable's last Alloc in ``circuit``."""
        circuit = self.circuit if circuit is None else circuit
        allocs = set(var.allocs)
        last = -1
        for i, ins in enumerate(circuit):
            if ins in allocs:
                last = i
        return last + 1

    def delete(self, var, unchecked: bool = False):
        var = self.variable(var)
        if not var.allocated:
            raise DeadQubit(f"variable {var.name} already deleted")
        start = self.interval_start(var)
        qset = set(var.qubits)
        touched = False
        for ins in self.circuit.instructions[start:]:
            if isinstance(ins, Apply):
                for pos, q in enumerate(ins.operands):
                    if q in qset and not analysis.is_permeable(ins.gate, pos, self.tol):
                        touched = True
        if touched and not unchecked:
            raise NotProvablyZero(
                f"{var.name} was acted on by non-permeable gates; uncompute it or pass unchecked=True"
            )
        for q in var.qubits:
            self.circuit.append(Dealloc(q, unchecked=touched))
        self.release(var, computation=None if touched else [])

    def release(self, var: QuantumVariable, computation):
        var.state = DELETED
        var.computation = computation
        self.free_pool = sorted(set(self.free_pool) | set(var.qubits))

    # -- wrapping ------------------------------------------------------------

    @contextlib.contextmanager
    def wrap(self, name: str, temporaries: Iterable = ()):
        """Record the gates issued inside the block as one wrapped gate.

        The wrapped gate acts on the qubits touched in the block, in order of
        first use.
        """
        mark = len(self.circuit)
        yield
        body = self.circuit.instructions[mark:]
        if any(not isinstance(ins, Apply) for ins in body):
            raise WrapError("allocation inside a wrapped block; declare temporaries outside")
        if not body:
            return
        wires: list[int] = []
        for ins in body:
            for q in ins.operands:
                if q not in wires:
                    wires.append(q)
        local = {q: i for i, q in enumerate(wires)}
        block = Circuit.block(len(wires), [Apply(ins.gate, [local[q] for q in ins.operands]) for ins in body])
        temps = [local[q] for r in temporaries for q in self.resolve(r)]
        gate = gate_wrap(block, name, temporaries=temps, tol=self.tol)
        known = self.gates.get(name)
        if known is not None and _definition(known) == _definition(gate):
            gate = known
        trimmed = self.circuit.copy()
        trimmed.instructions = trimmed.instructions[:mark]
        trimmed.append(Apply(gate, tuple(wires)))
        self.register_gate(gate)
        self.circuit = trimmed
        self.last_wrapped = gate

    def snapshot(self) -> dict:
        return circuit_to_dict(self.circuit)


def _definition(gate: GateDef):
    if gate.definition is None:
        return (gate.name,)
    return (gate.kind, gate.arity, tuple((i.gate.name, i.operands) for i in gate.definition))


def alloc_variable(session: Session, name: str | None = None, width: int = 1) -> QuantumVariable:
    if width < 1:
        raise SessionError("variable width must be positive")
    if name is None:
        name = f"qv{session._auto_names}"
        session._auto_names += 1
        while name in session.variables:
            name = f"qv{session._auto_names}"
            session._auto_names += 1
    if name in session.variables:
        raise DuplicateName(f"variable name {name!r} already used")
    ids, pool, fresh = session.take_ids(width)
    var = QuantumVariable(name, session, ids)
    for bit, q in enumerate(ids):
        a = Alloc(q)
        session.circuit.append(a)
        var.allocs.append(a)
        session.alloc_owner[a] = (var, bit)
    session.free_pool, session.next_fresh_id = pool, fresh
    session.variables[name] = var
    session.allocation_log.append(var)
    return var


def apply_gate(session: Session, gate: GateDef, *refs) -> Apply:
    return session.apply(gate, *refs)


def delete(session: Session, var, unchecked: bool = False):
    session.delete(var, unchecked=unchecked)


def gate_wrap(body: Circuit, name: str, temporaries: Iterable[int] = (), tol: float = linalg.TOL) -> GateDef:
    """Package a gate block as an opaque wrapped gate.

    ``temporaries`` are local wires that must come back to |0> whenever they
    start in |0>, for every basis state of the other wires.
    """
    if any(not isinstance(ins, Apply) for ins in body):
        raise WrapError(f"{name}: wrapped body must not allocate or deallocate qubits")
    if not body.open_wires:
        body = Circuit.block(body.num_qubits, body.instructions)
    gate = GateDef(name, body.num_qubits, WRAPPED, definition=body)
    temps = sorted(set(temporaries))
    if temps:
        u = analysis.synthesize_unitary(gate)
        n = gate.arity
        mask = sum(1 << (n - 1 - t) for t in temps)
        cols = [j for j in range(1 << n) if j & mask == 0]
        dirty = [i for i in range(1 << n) if i & mask]
        if dirty and np.max(np.abs(u[np.ix_(dirty, cols)])) > tol:
            raise WrapError(f"{name}: temporary wires are not returned to |0>")
    return gate
