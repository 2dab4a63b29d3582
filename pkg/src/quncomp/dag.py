"""Permeability-aware dependency graph.

Every qubit carries a chain of *target* edges running from its ``Init`` node
through each gate that acts non-permeably on it, to its ``Term`` node. A gate
that is permeable on a qubit does not extend the chain; it hangs off the
current value node through a *permeable* edge. Permeable readers of the same
value are mutually unordered, which is exactly the freedom the commutation
theorem for permeable overlaps grants.

Precedence is the edge relation plus one derived rule: a permeable reader of
value node ``u`` on qubit ``q`` precedes the next target node after ``u`` on
``q``. The derived edges are never stored.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from itertools import count

from . import analysis, linalg
from .errors import (
    AnalysisUnavailable,
    DagCycleError,
    NonQfree,
    ValueUnavailable,
    WidthCapExceeded,
)
from .ir import Alloc, Apply, Circuit, Dealloc, GateDef, inverse

TARGET, PERMEABLE = "target", "permeable"
INIT, GATE, TERM = "init", "gate", "term"


@dataclass(eq=False)
class DagNode:
    id: int
    kind: str
    qubits: tuple[int, ...]
    gate: GateDef | None = None
    # the instruction this node came from; None for nodes created by a pass
    instr: object = None
    key: tuple = ()
    inserted: bool = False
    # for inverse nodes: the node being undone, and whether every permeable
    # operand reads the very value node the original read
    source: int | None = None
    same_values: bool = True

    @property
    def label(self) -> str:
        if self.kind == GATE:
            return f"{self.gate.name}{list(self.qubits)}"
        return f"{self.kind}({self.qubits[0]})"


@dataclass(frozen=True)
class DagEdge:
    src: int
    dst: int
    qubit: int
    kind: str


@dataclass(eq=False)
class UnqompDag:
    num_qubits: int
    open_wires: bool = False
    tol: float = linalg.TOL
    nodes: dict[int, DagNode] = field(default_factory=dict)
    in_edges: dict[int, list[DagEdge]] = field(default_factory=dict)
    out_edges: dict[int, list[DagEdge]] = field(default_factory=dict)
    # qubit -> node ids of its target chain, in order (all intervals)
    chains: dict[int, list[int]] = field(default_factory=dict)
    # (node id, qubit) -> value identity; inverses alias the value they restore
    value_class: dict[tuple[int, int], tuple[int, int]] = field(default_factory=dict)
    _ids: count = field(default_factory=count, repr=False)
    _seq: count = field(default_factory=count, repr=False)

    # -- construction -----------------------------------------------------

    def add_node(self, kind, qubits, gate=None, instr=None, key=(), inserted=False) -> DagNode:
        node = DagNode(next(self._ids), kind, tuple(qubits), gate, instr, key, inserted)
        self.nodes[node.id] = node
        self.in_edges[node.id] = []
        self.out_edges[node.id] = []
        return node

    def add_edge(self, src: int, dst: int, qubit: int, kind: str) -> DagEdge:
        e = DagEdge(src, dst, qubit, kind)
        self.out_edges[src].append(e)
        self.in_edges[dst].append(e)
        return e

    def remove_edge(self, e: DagEdge):
        self.out_edges[e.src].remove(e)
        self.in_edges[e.dst].remove(e)

    def tail(self, qubit: int) -> int | None:
        chain = self.chains.get(qubit)
        return chain[-1] if chain else None

    def _extend_chain(self, qubit: int, node: DagNode):
        prev = self.tail(qubit)
        if prev is not None:
            self.add_edge(prev, node.id, qubit, TARGET)
        self.chains.setdefault(qubit, []).append(node.id)
        if node.kind != TERM:
            self.value_class[(node.id, qubit)] = (node.id, qubit)

    # -- queries ------------------------------------------------------------

    @property
    def edges(self) -> list[DagEdge]:
        return [e for es in self.out_edges.values() for e in es]

    def in_edge(self, node_id: int, qubit: int) -> DagEdge | None:
        for e in self.in_edges[node_id]:
            if e.qubit == qubit:
                return e
        return None

    def target_next(self, node_id: int, qubit: int) -> int | None:
        for e in self.out_edges[node_id]:
            if e.qubit == qubit and e.kind == TARGET:
                return e.dst
        return None

    def readers(self, node_id: int, qubit: int) -> list[int]:
        return [e.dst for e in self.out_edges[node_id] if e.qubit == qubit and e.kind == PERMEABLE]

    def successors(self, node_id: int) -> set[int]:
        succ = {e.dst for e in self.out_edges[node_id]}
        for e in self.in_edges[node_id]:
            if e.kind == PERMEABLE:
                nxt = self.target_next(e.src, e.qubit)
                if nxt is not None:
                    succ.add(nxt)
        return succ

    def predecessors(self, node_id: int) -> set[int]:
        preds = set()
        for e in self.in_edges[node_id]:
            preds.add(e.src)
            if e.kind == TARGET:
                preds.update(self.readers(e.src, e.qubit))
        return preds

    def gate_nodes(self) -> list[DagNode]:
        return [n for n in self.nodes.values() if n.kind == GATE]

    def topological_order(self, key=None) -> list[int]:
        """Kahn's algorithm; among ready nodes the smallest ``key`` goes first."""
        key = key or (lambda n: n.key)
        succ = {nid: self.successors(nid) for nid in self.nodes}
        indeg = {nid: 0 for nid in self.nodes}
        for s in succ.values():
            for d in s:
                indeg[d] += 1
        tie = count()
        ready = [(key(self.nodes[n]), next(tie), n) for n, d in indeg.items() if d == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            _, _, n = heapq.heappop(ready)
            order.append(n)
            for d in succ[n]:
                indeg[d] -= 1
                if indeg[d] == 0:
                    heapq.heappush(ready, (key(self.nodes[d]), next(tie), d))
        if len(order) != len(self.nodes):
            raise DagCycleError("dependency graph contains a cycle")
        return order

    def is_acyclic(self) -> bool:
        try:
            self.topological_order(key=lambda n: 0)
        except DagCycleError:
            return False
        return True

    def copy(self) -> "UnqompDag":
        d = UnqompDag(self.num_qubits, self.open_wires, self.tol)
        d.nodes = dict(self.nodes)
        d.in_edges = {k: list(v) for k, v in self.in_edges.items()}
        d.out_edges = {k: list(v) for k, v in self.out_edges.items()}
        d.chains = {k: list(v) for k, v in self.chains.items()}
        d.value_class = dict(self.value_class)
        start = max(self.nodes, default=-1) + 1
        d._ids = count(start)
        d._seq = count(next(self._seq))
        return d

    def _anchor_key(self, node_id: int) -> tuple:
        preds = self.predecessors(node_id)
        anchor = max((self.nodes[p].key[0] for p in preds), default=-1)
        return (anchor, 1, next(self._seq))

    def to_dot(self) -> str:
        lines = ["digraph unqomp {", "  rankdir=LR;"]
        for n in self.nodes.values():
            shape = "box" if n.kind == GATE else "ellipse"
            style = ', style="dashed"' if n.inserted else ""
            lines.append(f'  n{n.id} [label="{n.label}", shape={shape}{style}];')
        for e in self.edges:
            style = "solid" if e.kind == TARGET else "dotted"
            lines.append(f'  n{e.src} -> n{e.dst} [label="q{e.qubit}", style={style}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _permeable(gate: GateDef, pos: int, tol: float) -> bool:
    try:
        return analysis.is_permeable(gate, pos, tol)
    except WidthCapExceeded as exc:
        raise AnalysisUnavailable(str(exc)) from exc


def build_dag(circuit: Circuit, tol: float = linalg.TOL) -> UnqompDag:
    dag = UnqompDag(circuit.num_qubits, circuit.open_wires, tol)
    if circuit.open_wires:
        for q in range(circuit.num_qubits):
            dag._extend_chain(q, dag.add_node(INIT, (q,), key=(-1, 0, q)))
    for idx, ins in enumerate(circuit):
        key = (idx, 0, 0)
        if isinstance(ins, Alloc):
            dag._extend_chain(ins.qubit, dag.add_node(INIT, (ins.qubit,), instr=ins, key=key))
        elif isinstance(ins, Dealloc):
            dag._extend_chain(ins.qubit, dag.add_node(TERM, (ins.qubit,), instr=ins, key=key))
        else:
            node = dag.add_node(GATE, ins.operands, ins.gate, instr=ins, key=key)
            for pos, q in enumerate(ins.operands):
                if _permeable(ins.gate, pos, tol):
                    dag.add_edge(dag.tail(q), node.id, q, PERMEABLE)
                else:
                    dag._extend_chain(q, node)
    return dag


def linearize(dag: UnqompDag, key=None) -> Circuit:
    """Emit the nodes in topological order as a circuit.

    The default tie-break is the original instruction index; nodes inserted
    by a pass follow their latest dependency in insertion order.
    """
    return linearize_nodes(dag, key)[0]


def node_instruction(node: DagNode):
    if node.kind == INIT:
        return node.instr
    if node.instr is not None:
        return node.instr
    if node.kind == GATE:
        return Apply(node.gate, node.qubits)
    return Dealloc(node.qubits[0])


def linearize_nodes(dag: UnqompDag, key=None) -> tuple[Circuit, dict[int, int]]:
    """Like :func:`linearize`, also returning node id -> instruction position."""
    circ = Circuit(dag.num_qubits, open_wires=dag.open_wires)
    where = {}
    for nid in dag.topological_order(key):
        ins = node_instruction(dag.nodes[nid])
        if ins is None:
            continue
        where[nid] = len(circ)
        circ.append(ins)
    return circ, where


def insert_inverse(dag: UnqompDag, node_id: int, check_qfree: bool = True) -> DagNode:
    """Insert the inverse of gate node ``node_id`` at its uncomputation point.

    Target operands are spliced onto the end of their chain, after every
    reader of the current value. Permeable operands attach to a node holding
    the value the original gate read (the latest one whose use keeps the
    graph acyclic). Mutates ``dag``.
    """
    orig = dag.nodes[node_id]
    gate = orig.gate
    if check_qfree and not analysis.is_qfree(gate, dag.tol):
        raise NonQfree(gate.name, orig.qubits[0])
    new = dag.add_node(GATE, orig.qubits, inverse(gate), inserted=True)
    new.source = node_id
    new.same_values = True
    edges = [dag.in_edge(node_id, q) for q in orig.qubits]
    # targets first: they add only incoming precedence, so they cannot close a cycle
    for q, e in zip(orig.qubits, edges):
        if e.kind != TARGET:
            continue
        t = dag.tail(q)
        if t is None or dag.nodes[t].kind == TERM:
            raise ValueUnavailable(q, "qubit already deallocated")
        dag.add_edge(t, new.id, q, TARGET)
        dag.chains[q].append(new.id)
        dag.value_class[(new.id, q)] = dag.value_class[(e.src, q)]
    for q, e in zip(orig.qubits, edges):
        if e.kind != PERMEABLE:
            continue
        wanted = dag.value_class[(e.src, q)]
        candidates = [n for n in dag.chains[q] if dag.value_class.get((n, q)) == wanted]
        for c in reversed(candidates):
            trial = dag.add_edge(c, new.id, q, PERMEABLE)
            if dag.is_acyclic():
                if c != e.src:
                    new.same_values = False
                break
            dag.remove_edge(trial)
        else:
            _discard_node(dag, new)
            raise ValueUnavailable(q, "no placement keeps the dependency graph acyclic")
    new.key = dag._anchor_key(new.id)
    return new


def _discard_node(dag: UnqompDag, node: DagNode):
    for e in list(dag.in_edges[node.id]):
        dag.remove_edge(e)
    for e in list(dag.out_edges[node.id]):
        dag.remove_edge(e)
    for q in node.qubits:
        chain = dag.chains.get(q, [])
        if chain and chain[-1] == node.id:
            chain.pop()
        dag.value_class.pop((node.id, q), None)
    del dag.nodes[node.id]
    del dag.in_edges[node.id]
    del dag.out_edges[node.id]


def insert_term(dag: UnqompDag, qubit: int, unchecked: bool = False) -> DagNode:
    node = dag.add_node(TERM, (qubit,), instr=Dealloc(qubit, unchecked), inserted=True)
    dag._extend_chain(qubit, node)
    node.key = dag._anchor_key(node.id)
    return node
