"""Circuit intermediate representation.

A :class:`Circuit` is an ordered list of instructions over integer physical
qubit ids. Besides gate applications it carries allocation pseudo-ops, so a
reused qubit shows up as ``Dealloc(q)`` followed later by ``Alloc(q)``.

Gates are :class:`GateDef` objects of three kinds:

``builtin``
    backed by an exact unitary (built lazily for wide multi-controlled gates)
``composite``
    defined by a local circuit over wires ``0..arity-1``
``wrapped``
    like composite, but opaque: no pass ever dissolves it
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import linalg
from .errors import CircuitError, QuncompError, UnknownGate

BUILTIN, COMPOSITE, WRAPPED = "builtin", "composite", "wrapped"


@dataclass(eq=False)
class GateDef:
    name: str
    arity: int
    kind: str = BUILTIN
    definition: "Circuit | None" = None
    unitary_factory: Callable[[], np.ndarray] | None = None
    # axiomatic verdicts for builtins; None means "decide from the matrix"
    qfree_axiom: bool | None = None
    permeable_axiom: tuple[bool, ...] | None = None
    involution: bool = False
    cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.arity < 1:
            raise QuncompError(f"gate {self.name}: arity must be positive")
        if self.kind == BUILTIN:
            if self.unitary_factory is None:
                raise QuncompError(f"builtin gate {self.name} needs a unitary")
        elif self.kind in (COMPOSITE, WRAPPED):
            d = self.definition
            if d is None:
                raise QuncompError(f"{self.kind} gate {self.name} needs a definition")
            if d.num_qubits != self.arity:
                raise QuncompError(
                    f"gate {self.name}: definition uses {d.num_qubits} wires, arity is {self.arity}"
                )
            if any(not isinstance(ins, Apply) for ins in d):
                raise QuncompError(f"gate {self.name}: definition contains allocation pseudo-ops")
        else:
            raise QuncompError(f"unknown gate kind {self.kind!r}")

    @property
    def opaque(self) -> bool:
        return self.kind == WRAPPED

    def builtin_unitary(self) -> np.ndarray:
        u = self.cache.get("builtin_unitary")
        if u is None:
            u = np.asarray(self.unitary_factory(), dtype=complex)
            if u.shape != (1 << self.arity, 1 << self.arity):
                raise QuncompError(f"gate {self.name}: unitary has shape {u.shape}")
            if not linalg.is_unitary(u):
                raise QuncompError(f"gate {self.name}: matrix is not unitary")
            self.cache["builtin_unitary"] = u
        return u

    def __repr__(self):
        return f"GateDef({self.name!r}, arity={self.arity}, kind={self.kind})"


def builtin(name, matrix, **kw) -> GateDef:
    """Builtin gate from an explicit matrix."""
    m = linalg.as_matrix(matrix)
    arity = linalg.num_qubits(m)
    gate = GateDef(name, arity, BUILTIN, unitary_factory=lambda: m, **kw)
    gate.builtin_unitary()  # validate eagerly
    return gate


# --------------------------------------------------------------------------
# instructions


@dataclass(frozen=True, eq=False)
class Apply:
    gate: GateDef
    operands: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "operands", tuple(int(q) for q in self.operands))

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.operands

    def __repr__(self):
        return f"Apply({self.gate.name}, {list(self.operands)})"


@dataclass(frozen=True, eq=False)
class Alloc:
    qubit: int

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.qubit,)


@dataclass(frozen=True, eq=False)
class Dealloc:
    qubit: int
    # skip the |0> check in the simulator
    unchecked: bool = False

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.qubit,)


Instruction = Apply | Alloc | Dealloc


class Circuit:
    """Validated instruction list.

    With ``open_wires=True`` all qubits ``0..num_qubits-1`` are live from the
    start and allocation pseudo-ops are rejected; this is the form used for
    gate definitions.
    """

    def __init__(self, num_qubits: int = 0, instructions: Iterable = (), open_wires: bool = False):
        self.open_wires = open_wires
        self._declared = int(num_qubits)
        self.instructions: list = []
        self._live: set[int] = set(range(self._declared)) if open_wires else set()
        for ins in instructions:
            self.append(ins)

    @classmethod
    def block(cls, num_qubits: int, instructions: Iterable = ()) -> "Circuit":
        return cls(num_qubits, instructions, open_wires=True)

    @property
    def num_qubits(self) -> int:
        top = max((q for ins in self.instructions for q in ins.qubits), default=-1)
        return max(self._declared, top + 1)

    @property
    def num_physical_qubits(self) -> int:
        return self.num_qubits

    def __iter__(self):
        return iter(self.instructions)

    def __len__(self):
        return len(self.instructions)

    def __getitem__(self, i):
        return self.instructions[i]

    def _check(self, ins, live: set[int], index: int):
        if isinstance(ins, Apply):
            ops = ins.operands
            if len(ops) != ins.gate.arity:
                raise CircuitError(
                    f"{ins.gate.name} expects {ins.gate.arity} operands, got {len(ops)}", index
                )
            if len(set(ops)) != len(ops):
                raise CircuitError(f"duplicate operand in {ins.gate.name}{list(ops)}", index)
            for q in ops:
                if q < 0:
                    raise CircuitError(f"negative qubit id {q}", index)
                if self.open_wires and q >= self._declared:
                    raise CircuitError(f"wire {q} out of range", index)
                if q not in live:
                    raise CircuitError(f"qubit {q} is not allocated", index)
        elif isinstance(ins, Alloc):
            if self.open_wires:
                raise CircuitError("allocation inside a gate block", index)
            if ins.qubit in live:
                raise CircuitError(f"qubit {ins.qubit} allocated twice", index)
            live.add(ins.qubit)
        elif isinstance(ins, Dealloc):
            if self.open_wires:
                raise CircuitError("deallocation inside a gate block", index)
            if ins.qubit not in live:
                raise CircuitError(f"qubit {ins.qubit} deallocated while not allocated", index)
            live.discard(ins.qubit)
        else:
            raise CircuitError(f"not an instruction: {ins!r}", index)

    def append(self, ins) -> "Circuit":
        self._check(ins, self._live, len(self.instructions))
        self.instructions.append(ins)
        return self

    def insert(self, position: int, ins) -> "Circuit":
        trial = self.instructions[:position] + [ins] + self.instructions[position:]
        self.validate(trial)
        self.instructions = trial
        self._live = self._live_after(trial)
        return self

    def _initial_live(self) -> set[int]:
        return set(range(self._declared)) if self.open_wires else set()

    def _live_after(self, instructions) -> set[int]:
        live = self._initial_live()
        for i, ins in enumerate(instructions):
            self._check(ins, live, i)
        return live

    def validate(self, instructions=None):
        """Raise :class:`CircuitError` at the first violation."""
        self._live_after(self.instructions if instructions is None else instructions)

    @property
    def live_qubits(self) -> set[int]:
        return set(self._live)

    def copy(self) -> "Circuit":
        c = Circuit.__new__(Circuit)
        c.open_wires = self.open_wires
        c._declared = self._declared
        c.instructions = list(self.instructions)
        c._live = set(self._live)
        return c

    def gates(self) -> list[Apply]:
        return [ins for ins in self.instructions if isinstance(ins, Apply)]

    def gate_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for ins in self.gates():
            counts[ins.gate.name] = counts.get(ins.gate.name, 0) + 1
        return dict(sorted(counts.items()))

    def __repr__(self):
        return f"Circuit({self.num_qubits} qubits, {len(self.instructions)} instructions)"


def strip_allocation(circuit: Circuit) -> Circuit:
    """Gate-only view of a circuit, every physical qubit treated as a wire."""
    return Circuit.block(circuit.num_qubits, circuit.gates())


# --------------------------------------------------------------------------
# builtin library

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.diag([1, -1]).astype(complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _mcx_matrix(k: int) -> np.ndarray:
    dim = 1 << (k + 1)
    u = np.eye(dim, dtype=complex)
    u[[dim - 2, dim - 1]] = u[[dim - 1, dim - 2]]
    return u


def _mcz_matrix(k: int) -> np.ndarray:
    d = np.ones(1 << (k + 1), dtype=complex)
    d[-1] = -1
    return np.diag(d)


_CACHE: dict[str, GateDef] = {}


def _cached(name: str, make: Callable[[], GateDef]) -> GateDef:
    g = _CACHE.get(name)
    if g is None:
        g = _CACHE[name] = make()
    return g


def x() -> GateDef:
    return _cached("x", lambda: builtin("x", _X, qfree_axiom=True, permeable_axiom=(False,), involution=True))


def h() -> GateDef:
    return _cached("h", lambda: builtin("h", _H, qfree_axiom=False, permeable_axiom=(False,), involution=True))


def z() -> GateDef:
    return _cached("z", lambda: builtin("z", _Z, qfree_axiom=True, permeable_axiom=(True,), involution=True))


def format_angle(theta: float) -> str:
    if theta == 0:
        theta = 0.0  # -0.0 and 0.0 share a name
    return f"{theta:.12g}"


def ry(theta: float) -> GateDef:
    theta = float(theta)
    name = f"ry({format_angle(theta)})"
    return _cached(name, lambda: builtin(name, ry_matrix(theta)))


def mcx(k: int) -> GateDef:
    """X on the last operand controlled by the first ``k``; ``mcx(1)`` is ``cx``."""
    if k < 1:
        raise QuncompError("mcx needs at least one control")
    name = "cx" if k == 1 else f"mcx_{k}"
    return _cached(
        name,
        lambda: GateDef(
            name,
            k + 1,
            BUILTIN,
            unitary_factory=lambda: _mcx_matrix(k),
            qfree_axiom=True,
            permeable_axiom=(True,) * k + (False,),
            involution=True,
        ),
    )


def mcz(k: int) -> GateDef:
    """Z on ``k + 1`` qubits (symmetric); ``mcz(1)`` is ``cz``."""
    if k < 1:
        raise QuncompError("mcz needs at least one control")
    name = "cz" if k == 1 else f"mcz_{k}"
    return _cached(
        name,
        lambda: GateDef(
            name,
            k + 1,
            BUILTIN,
            unitary_factory=lambda: _mcz_matrix(k),
            qfree_axiom=True,
            permeable_axiom=(True,) * (k + 1),
            involution=True,
        ),
    )


def cx() -> GateDef:
    return mcx(1)


def cz() -> GateDef:
    return mcz(1)


def margolus_circuit() -> Circuit:
    """Relative-phase Toffoli on wires (control0, control1, target).

    Equals Toffoli up to a -1 phase on |101>.
    """
    a = math.pi / 4
    t = 2
    return Circuit.block(
        3,
        [
            Apply(ry(a), (t,)),
            Apply(cx(), (1, t)),
            Apply(ry(a), (t,)),
            Apply(cx(), (0, t)),
            Apply(ry(-a), (t,)),
            Apply(cx(), (1, t)),
            Apply(ry(-a), (t,)),
        ],
    )


def pt2cx() -> GateDef:
    """Phase tolerant two-controlled X (Margolus gate)."""
    return _cached("pt2cx", lambda: GateDef("pt2cx", 3, COMPOSITE, definition=margolus_circuit()))


#: gate name -> phase tolerant replacement used when a compute/uncompute pair brackets it
PHASE_TOLERANT: dict[str, Callable[[], GateDef]] = {"mcx_2": pt2cx}


def builtin_library(max_controls: int = 4) -> dict[str, GateDef]:
    """Name -> gate for the fixed part of the library.

    ``ry`` is parameterized; :func:`lookup_gate` resolves ``ry(<angle>)`` and
    ``mcx_k``/``mcz_k`` of any width.
    """
    lib = {g.name: g for g in (x(), h(), z(), cx(), cz())}
    for k in range(2, max_controls + 1):
        lib[mcx(k).name] = mcx(k)
        lib[mcz(k).name] = mcz(k)
    lib["pt2cx"] = pt2cx()
    return lib


def _dg_name(name: str) -> str:
    return name[:-3] if name.endswith("_dg") else name + "_dg"


def inverse(gate: GateDef) -> GateDef:
    """Inverse gate; opacity and axiomatic verdicts carry over."""
    cached = gate.cache.get("inverse")
    if cached is not None:
        return cached
    if gate.involution:
        inv = gate
    elif gate.kind == BUILTIN:
        m = re.fullmatch(r"ry\((.*)\)", gate.name)
        if m:
            inv = ry(-float(m.group(1)))
        else:
            u = gate.builtin_unitary()
            inv = GateDef(
                _dg_name(gate.name),
                gate.arity,
                BUILTIN,
                unitary_factory=lambda: linalg.dagger(u),
                qfree_axiom=gate.qfree_axiom,
                permeable_axiom=gate.permeable_axiom,
            )
    else:
        body = Circuit.block(
            gate.arity,
            [Apply(inverse(ins.gate), ins.operands) for ins in reversed(gate.definition.instructions)],
        )
        inv = GateDef(_dg_name(gate.name), gate.arity, gate.kind, definition=body)
    gate.cache["inverse"] = inv
    if inv is not gate:
        inv.cache.setdefault("inverse", gate)
    return inv


_MC_RE = re.compile(r"(mcx|mcz)_(\d+)")


def lookup_gate(name: str, registry: dict[str, GateDef] | None = None) -> GateDef:
    """Resolve a gate name against ``registry`` first, then the builtin library."""
    if registry and name in registry:
        return registry[name]
    simple = {"x": x, "h": h, "z": z, "cx": cx, "cz": cz, "pt2cx": pt2cx}
    if name in simple:
        return simple[name]()
    m = _MC_RE.fullmatch(name)
    if m:
        k = int(m.group(2))
        return mcx(k) if m.group(1) == "mcx" else mcz(k)
    m = re.fullmatch(r"ry\((.*)\)", name)
    if m:
        try:
            return ry(float(m.group(1)))
        except ValueError:
            raise UnknownGate(f"bad angle in gate name {name!r}") from None
    if name.endswith("_dg"):
        return inverse(lookup_gate(name[:-3], registry))
    raise UnknownGate(f"unknown gate {name!r}")


def is_library_gate(gate: GateDef) -> bool:
    try:
        return lookup_gate(gate.name) is gate
    except UnknownGate:
        return False


# --------------------------------------------------------------------------
# JSON form


def instruction_to_dict(ins) -> dict:
    if isinstance(ins, Apply):
        return {"op": "apply", "gate": ins.gate.name, "operands": list(ins.operands)}
    if isinstance(ins, Alloc):
        return {"op": "alloc", "qubit": ins.qubit}
    d = {"op": "dealloc", "qubit": ins.qubit}
    if ins.unchecked:
        d["unchecked"] = True
    return d


def _collect_defs(gates: Iterable[GateDef], out: dict[str, GateDef]):
    for g in gates:
        if g.kind == BUILTIN or g.name in out or is_library_gate(g):
            continue
        _collect_defs((ins.gate for ins in g.definition), out)
        out[g.name] = g


def circuit_to_dict(circuit: Circuit) -> dict:
    defs: dict[str, GateDef] = {}
    _collect_defs((ins.gate for ins in circuit.gates()), defs)
    d = {
        "qubits": circuit.num_qubits,
        "instructions": [instruction_to_dict(ins) for ins in circuit],
    }
    if defs:
        d["gates"] = {
            name: {
                "kind": g.kind,
                "arity": g.arity,
                "instructions": [instruction_to_dict(ins) for ins in g.definition],
            }
            for name, g in defs.items()
        }
    return d


def circuit_from_dict(data: dict) -> Circuit:
    registry: dict[str, GateDef] = {}
    for name, spec in data.get("gates", {}).items():
        body = Circuit.block(
            spec["arity"],
            [Apply(lookup_gate(i["gate"], registry), i["operands"]) for i in spec["instructions"]],
        )
        registry[name] = GateDef(name, spec["arity"], spec["kind"], definition=body)
    circ = Circuit(data.get("qubits", 0))
    for i in data["instructions"]:
        op = i["op"]
        if op == "apply":
            circ.append(Apply(lookup_gate(i["gate"], registry), i["operands"]))
        elif op == "alloc":
            circ.append(Alloc(i["qubit"]))
        elif op == "dealloc":
            circ.append(Dealloc(i["qubit"], bool(i.get("unchecked", False))))
        else:
            raise CircuitError(f"unknown op {op!r}")
    return circ


def apply_all(circuit: Circuit, ops: Sequence[tuple[GateDef, Sequence[int]]]) -> Circuit:
    for gate, operands in ops:
        circuit.append(Apply(gate, tuple(operands)))
    return circuit
