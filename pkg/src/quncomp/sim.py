"""Dense statevector simulation of circuits with allocation.

The state is a tensor with one axis per qubit currently held by the
simulator, sorted by physical id so that the lowest id is the most
significant bit. ``Alloc`` adds a |0> axis; ``Dealloc`` checks that the qubit
is |0>, projects and removes the axis, so a reused id starts fresh.

Gates act on their operand axes only. Multi-controlled X and Z are applied by
slicing; everything else goes through ``tensordot`` with the gate's unitary.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import analysis, linalg
from .errors import CircuitError, DeallocError, SimulatorCapExceeded
from .ir import BUILTIN, Alloc, Apply, Circuit, Dealloc, GateDef, strip_allocation

#: default maximum number of physical qubits
SIM_CAP = 20

PRUNE = 1e-12


@dataclass
class DeallocRecord:
    index: int
    qubit: int
    p_one: float
    unchecked: bool


@dataclass
class Statevector:
    """Amplitudes over ``qubits`` (ascending ids; the first is the MSB)."""

    tensor: np.ndarray
    qubits: list[int]
    # qubits released without projection because they were not |0>
    dirty: set[int] = field(default_factory=set)
    dealloc_log: list[DeallocRecord] = field(default_factory=list)

    @classmethod
    def empty(cls) -> "Statevector":
        return cls(np.ones((), dtype=complex), [])

    @property
    def num_qubits(self) -> int:
        return len(self.qubits)

    @property
    def amplitudes(self) -> np.ndarray:
        return self.tensor.reshape(-1)

    @property
    def live(self) -> list[int]:
        return [q for q in self.qubits if q not in self.dirty]

    def axis(self, qubit: int) -> int:
        try:
            return self.qubits.index(qubit)
        except ValueError:
            raise CircuitError(f"qubit {qubit} is not held by the simulator") from None

    def norm(self) -> float:
        return float(np.sum(np.abs(self.tensor) ** 2))

    def add_qubit(self, qubit: int, bit: int = 0):
        pos = int(np.searchsorted(self.qubits, qubit))
        zero = np.zeros(2, dtype=complex)
        zero[bit] = 1
        self.tensor = np.moveaxis(np.multiply.outer(self.tensor, zero), -1, pos)
        self.qubits.insert(pos, qubit)

    def remove_qubit(self, qubit: int):
        """Project ``qubit`` onto |0>, renormalize and drop its axis."""
        ax = self.axis(qubit)
        t = np.take(self.tensor, 0, axis=ax)
        n = math.sqrt(float(np.sum(np.abs(t) ** 2)))
        self.tensor = t / n if n > 0 else t
        del self.qubits[ax]

    def probabilities(self, qubits) -> np.ndarray:
        """Marginal distribution over ``qubits`` (first one is the MSB)."""
        axes = [self.axis(q) for q in qubits]
        p = np.abs(self.tensor) ** 2
        rest = tuple(i for i in range(p.ndim) if i not in axes)
        p = p.sum(axis=rest) if rest else p
        order = np.argsort(np.argsort(axes))
        p = np.transpose(p, order) if p.ndim else p
        return p.reshape(-1)

    def vector(self, qubits=None) -> np.ndarray:
        """Amplitudes with axes in the order of ``qubits`` (default: ascending)."""
        if qubits is None:
            return self.amplitudes.copy()
        axes = [self.axis(q) for q in qubits]
        if sorted(axes) != list(range(self.tensor.ndim)):
            raise CircuitError("vector() needs every held qubit")
        return np.transpose(self.tensor, axes).reshape(-1)


def prob_one(state: Statevector, qubit: int) -> float:
    t = np.take(state.tensor, 1, axis=state.axis(qubit))
    return float(np.sum(np.abs(t) ** 2))


# -- gate application -----------------------------------------------------------


def _controlled_slice(ndim: int, axes, value: int = 1):
    idx = [slice(None)] * ndim
    for a in axes:
        idx[a] = value
    return idx


def apply_unitary(tensor: np.ndarray, u: np.ndarray, axes) -> np.ndarray:
    k = len(axes)
    ut = u.reshape((2,) * (2 * k))
    out = np.tensordot(ut, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def _mc_kind(gate: GateDef):
    if gate.kind != BUILTIN:
        return None
    if gate.name in ("x", "cx") or gate.name.startswith("mcx_"):
        return "x"
    if gate.name in ("z", "cz") or gate.name.startswith("mcz_"):
        return "z"
    return None


def apply_gate(tensor: np.ndarray, gate: GateDef, axes, width_cap: int = analysis.WIDTH_CAP) -> np.ndarray:
    kind = _mc_kind(gate)
    if kind == "x":
        t = tensor.copy()
        idx = _controlled_slice(t.ndim, axes[:-1])
        # after fixing the controls the target axis index shifts left by the
        # number of control axes in front of it
        tgt = axes[-1] - sum(1 for a in axes[:-1] if a < axes[-1])
        t[tuple(idx)] = np.flip(tensor[tuple(idx)], axis=tgt)
        return t
    if kind == "z":
        t = tensor.copy()
        idx = tuple(_controlled_slice(t.ndim, axes))
        t[idx] = -t[idx]
        return t
    if gate.arity > width_cap and gate.definition is not None:
        for ins in gate.definition:
            tensor = apply_gate(tensor, ins.gate, [axes[o] for o in ins.operands], width_cap)
        return tensor
    return apply_unitary(tensor, analysis.synthesize_unitary(gate, width_cap), axes)


# -- running circuits -----------------------------------------------------------


def _normalize_inputs(circuit: Circuit, inputs) -> dict[int, int]:
    if inputs is None:
        return {}
    if isinstance(inputs, dict):
        return {int(q): int(b) for q, b in inputs.items()}
    n = circuit.num_qubits
    if isinstance(inputs, str):
        bits = [int(c) for c in inputs]
    else:
        bits = [(int(inputs) >> (n - 1 - i)) & 1 for i in range(n)]
    return dict(enumerate(bits))


def run(circuit: Circuit, inputs=None, strict: bool = True, cap: int = SIM_CAP) -> Statevector:
    """Simulate ``circuit`` from a computational-basis state.

    ``inputs`` maps physical qubit -> bit, loaded at each qubit's first
    ``Alloc`` (or at the start for open wires). An int or bitstring assigns
    the qubits in id order. With ``strict=False`` a failing ``Dealloc`` is
    logged instead of raised and the qubit stays in the state as a dirty wire.
    """
    if circuit.num_physical_qubits > cap:
        raise SimulatorCapExceeded(f"{circuit.num_physical_qubits} qubits exceed the simulator cap of {cap}")
    bits = _normalize_inputs(circuit, inputs)
    state = Statevector.empty()
    seen: set[int] = set()
    if circuit.open_wires:
        for q in range(circuit.num_qubits):
            state.add_qubit(q, bits.get(q, 0))
            seen.add(q)
    for i, ins in enumerate(circuit):
        if isinstance(ins, Apply):
            state.tensor = apply_gate(state.tensor, ins.gate, [state.axis(q) for q in ins.operands])
        elif isinstance(ins, Alloc):
            if ins.qubit in state.dirty:
                # reusing a wire that was never returned to |0>
                state.dirty.discard(ins.qubit)
                continue
            state.add_qubit(ins.qubit, bits.get(ins.qubit, 0) if ins.qubit not in seen else 0)
            seen.add(ins.qubit)
        elif isinstance(ins, Dealloc):
            p1 = prob_one(state, ins.qubit)
            state.dealloc_log.append(DeallocRecord(i, ins.qubit, p1, ins.unchecked))
            if p1 < linalg.TOL:
                state.remove_qubit(ins.qubit)
            elif ins.unchecked or not strict:
                state.dirty.add(ins.qubit)
            else:
                raise DeallocError(f"instruction {i}: qubit {ins.qubit} has P(1) = {p1:.3g} at deallocation")
    return state


def unitary_of(circuit: Circuit, ignore_allocation: bool = False) -> np.ndarray:
    """Matrix of a gate-only circuit, one column per basis input."""
    if not circuit.open_wires:
        if any(not isinstance(ins, Apply) for ins in circuit) and not ignore_allocation:
            raise CircuitError("unitary_of needs a circuit without allocation")
        circuit = strip_allocation(circuit)
    n = circuit.num_qubits
    if n > analysis.WIDTH_CAP:
        raise SimulatorCapExceeded(f"{n} qubits exceed the unitary width cap of {analysis.WIDTH_CAP}")
    dim = 1 << n
    cols = [run(circuit, j).vector(list(range(n))) for j in range(dim)]
    return np.stack(cols, axis=1) if cols else np.ones((1, 1), dtype=complex)


def io_map(circuit: Circuit, input_qubits, output_qubits=None) -> np.ndarray:
    """Action on ``input_qubits`` with every other qubit starting in |0>.

    Column ``j`` is the final state over ``output_qubits`` (default: qubits
    live at the end) for basis input ``j``.
    """
    input_qubits = list(input_qubits)
    cols = []
    for j in range(1 << len(input_qubits)):
        bits = {q: (j >> (len(input_qubits) - 1 - k)) & 1 for k, q in enumerate(input_qubits)}
        st = run(circuit, bits)
        cols.append(st.vector(output_qubits if output_qubits is not None else None))
    return np.stack(cols, axis=1)


def deallocation_report(circuit: Circuit, input_qubits) -> list[DeallocRecord]:
    """Dealloc records over all basis inputs of ``input_qubits``; the largest P(1) first."""
    input_qubits = list(input_qubits)
    out = []
    for j in range(1 << len(input_qubits)):
        bits = {q: (j >> (len(input_qubits) - 1 - k)) & 1 for k, q in enumerate(input_qubits)}
        out.extend(run(circuit, bits, strict=False).dealloc_log)
    return sorted(out, key=lambda r: -r.p_one)


def is_disentangled(circuit: Circuit, input_qubits, tol: float | None = None) -> bool:
    tol = linalg.TOL if tol is None else tol
    return all(r.p_one < tol for r in deallocation_report(circuit, input_qubits))


# -- histograms -----------------------------------------------------------------


class Histogram(dict):
    """Outcome label -> exact probability."""

    def total(self) -> float:
        return float(sum(self.values()))

    def probability(self, predicate) -> float:
        return float(sum(p for k, p in self.items() if predicate(k)))


def _variable_spec(v):
    if hasattr(v, "qubits") and hasattr(v, "name"):
        return v.name, list(v.qubits)
    name, qubits = v
    return name, list(qubits)


def histogram(circuit: Circuit, variables, inputs=None, state: Statevector | None = None) -> Histogram:
    """Exact outcome distribution over ``variables``.

    Each variable is a ``QuantumVariable`` or a ``(name, qubit ids)`` pair. A
    label reads ``"a=01 b=1"``, the variable's first qubit leftmost.
    """
    specs = [_variable_spec(v) for v in variables]
    if not specs:
        return Histogram()
    st = run(circuit, inputs) if state is None else state
    qubits = [q for _, qs in specs for q in qs]
    probs = st.probabilities(qubits)
    out = Histogram()
    for j, p in enumerate(probs):
        if p < PRUNE:
            continue
        bits = format(j, f"0{len(qubits)}b")
        parts, k = [], 0
        for name, qs in specs:
            parts.append(f"{name}={bits[k:k + len(qs)]}")
            k += len(qs)
        out[" ".join(parts)] = round(float(p), 12)
    return out


# -- grover -----------------------------------------------------------------------


def grover_session(n: int, marked, iterations: int, uncompute: bool = True):
    """Build the Grover search circuit in a fresh session.

    The oracle computes membership in ``marked`` into a fresh ancilla, tags it
    with Z and (when ``uncompute`` is set) lets the auto scope uncompute the
    ancilla before the diffuser runs.
    """
    from . import gates
    from .session import Session
    from .uncompute import auto_uncompute_scope

    marked = sorted(set(int(m) for m in marked))
    if any(not 0 <= m < 1 << n for m in marked):
        raise ValueError(f"marked states must lie in [0, {1 << n})")
    s = Session()
    qf = s.qvar("qf", n)
    for q in qf:
        gates.h(q)

    def oracle(step):
        anc = s.qvar(f"anc{step}")
        for m in marked:
            with s.wrap(f"match_{m:0{n}b}"):
                zeros = [qf[i] for i in range(n) if not (m >> (n - 1 - i)) & 1]
                for q in zeros:
                    gates.x(q)
                gates.mcx(list(qf), anc)
                for q in zeros:
                    gates.x(q)
        gates.z(anc)
        return None if uncompute else anc

    def diffuser():
        for q in qf:
            gates.h(q)
        for q in qf:
            gates.x(q)
        gates.mcz(list(qf))
        for q in qf:
            gates.x(q)
        for q in qf:
            gates.h(q)

    for step in range(iterations):
        auto_uncompute_scope(s, oracle, step)
        diffuser()
    return s, qf


def grover_demo(n: int, marked, iterations: int, uncompute: bool = True) -> Histogram:
    s, qf = grover_session(n, marked, iterations, uncompute)
    return histogram(s.circuit, [qf])


def grover_success_probability(n: int, marked, iterations: int, uncompute: bool = True) -> float:
    hist = grover_demo(n, marked, iterations, uncompute)
    labels = {f"qf={m:0{n}b}" for m in marked}
    return hist.probability(lambda k: k in labels)


def grover_closed_form(n: int, num_marked: int, iterations: int) -> float:
    theta = math.asin(math.sqrt(num_marked / (1 << n)))
    return math.sin((2 * iterations + 1) * theta) ** 2


def basis_inputs(qubits):
    """All bit assignments of ``qubits`` as dicts, in binary counting order."""
    qubits = list(qubits)
    for bits in itertools.product((0, 1), repeat=len(qubits)):
        yield dict(zip(qubits, bits))
