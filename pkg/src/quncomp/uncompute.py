"""Automatic uncomputation of quantum variables.

Two strategies are available.

``inline``
    Build the permeability-aware DAG of the whole session circuit and insert
    the inverse of each computing gate at the point where the values it reads
    are still present. Nothing is recomputed, but qubits holding those values
    stay allocated until the inverse has run.
``revert``
    Append the inverses at the end of the circuit. A value that was already
    released in the meantime is recomputed on freshly allocated qubits first
    and released again afterwards.

Either way the variable's qubits are deallocated and return to the free pool.
Failures leave the session untouched.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

from . import analysis
from .dag import build_dag, insert_inverse, insert_term, linearize_nodes
from .errors import (
    AnalysisUnavailable,
    EntangledTargets,
    NonQfree,
    SessionError,
    UncomputeError,
    ValueUnavailable,
    WidthCapExceeded,
)
from .ir import PHASE_TOLERANT, Alloc, Apply, Circuit, Dealloc, inverse
from .session import QuantumVariable, Qubit, Session

INLINE, REVERT = "inline", "revert"


@dataclass
class UncomputeReport:
    variable: str
    strategy: str
    inserted: int = 0
    substituted: int = 0
    freed: list[int] = field(default_factory=list)
    recomputed: int = 0


def _permeable(gate, pos, tol) -> bool:
    try:
        return analysis.is_permeable(gate, pos, tol)
    except WidthCapExceeded as exc:
        raise AnalysisUnavailable(str(exc)) from exc


def _qfree(gate, tol) -> bool:
    try:
        return analysis.is_qfree(gate, tol)
    except WidthCapExceeded as exc:
        raise AnalysisUnavailable(str(exc)) from exc


def computation_gates(session: Session, var: QuantumVariable, circuit: Circuit | None = None) -> list[Apply]:
    """Gates of the current live interval acting non-permeably on ``var``."""
    circuit = session.circuit if circuit is None else circuit
    qset = set(var.qubits)
    start = session.interval_start(var, circuit)
    out = []
    for ins in circuit.instructions[start:]:
        if isinstance(ins, Apply) and any(
            q in qset and not _permeable(ins.gate, pos, session.tol) for pos, q in enumerate(ins.operands)
        ):
            out.append(ins)
    return out


def _check_uncomputable(session: Session, var: QuantumVariable, comp: list[Apply]):
    qset = set(var.qubits)
    for ins in comp:
        if not _qfree(ins.gate, session.tol):
            q = next(q for pos, q in enumerate(ins.operands)
                     if q in qset and not _permeable(ins.gate, pos, session.tol))
            raise NonQfree(ins.gate.name, q)
        for pos, q in enumerate(ins.operands):
            if q not in qset and not _permeable(ins.gate, pos, session.tol):
                other = session.owner(q)
                who = other.name if other is not None else f"qubit {q}"
                raise EntangledTargets(
                    f"{ins.gate.name} also targets {who}; {var.name} cannot be uncomputed alone"
                )


def uncompute(session: Session, var, strategy: str | None = None,
              phase_tolerant: bool | None = None) -> UncomputeReport:
    var = session.variable(var)
    if not var.allocated:
        raise SessionError(f"variable {var.name} is not allocated")
    strategy = strategy or session.default_strategy
    if strategy not in (INLINE, REVERT):
        raise ValueError(f"unknown strategy {strategy!r}")
    if phase_tolerant is None:
        phase_tolerant = session.phase_tolerant

    comp = computation_gates(session, var)
    _check_uncomputable(session, var, comp)
    if strategy == INLINE:
        circ, pairs, inserted, pool, fresh, recomputed = _inline(session, var, comp)
    else:
        circ, pairs, inserted, pool, fresh, recomputed = _revert(session, var, comp)

    substituted = 0
    if phase_tolerant:
        circ, substituted, renamed = substitute_phase_tolerant(circ, pairs, session.tol)
        comp = [renamed.get(ins, ins) for ins in comp]

    # commit
    session.circuit = circ
    session.free_pool, session.next_fresh_id = pool, fresh
    session.release(var, computation=comp)
    report = UncomputeReport(var.name, strategy, inserted, substituted, list(var.qubits), recomputed)
    session.reports.append(report)
    return report


# -- inline ----------------------------------------------------------------


def _inline(session: Session, var: QuantumVariable, comp: list[Apply]):
    dag = build_dag(session.circuit, session.tol)
    node_of = {n.instr: n for n in dag.nodes.values() if n.instr is not None}
    pairs_nodes = []
    for ins in reversed(comp):
        orig = node_of[ins]
        new = insert_inverse(dag, orig.id, check_qfree=False)
        pairs_nodes.append((orig.id, new.id))
    for q in var.qubits:
        insert_term(dag, q)
    circ, where = linearize_nodes(dag)
    pairs = [(where[a], where[b]) for a, b in pairs_nodes]
    pool = sorted(set(session.free_pool) | set(var.qubits))
    return circ, pairs, len(comp), pool, session.next_fresh_id, 0


# -- revert ----------------------------------------------------------------


class _Reverter:
    def __init__(self, session: Session, var: QuantumVariable):
        self.session = session
        self.var = var
        self.circ = session.circuit.copy()
        self.pool = list(session.free_pool)
        self.fresh = session.next_fresh_id
        self.replays: list[tuple[int, Apply]] = []  # (position, instruction) of recomputed gates
        self.temps: list[int] = []
        self.memo: dict[tuple[int, int], dict[int, int]] = {}

    def position(self, ins) -> int:
        for i, other in enumerate(self.circ.instructions):
            if other is ins:
                return i
        raise ValueUnavailable(-1, "instruction no longer in the circuit")

    def resolve(self, pos: int, q: int) -> int:
        """Qubit currently holding the value instruction ``pos`` saw on ``q``."""
        tol = self.session.tol
        for ins in self.circ.instructions[pos + 1:]:
            if q not in ins.qubits:
                continue
            if isinstance(ins, Dealloc):
                # released after its own uncomputation: rebuild it elsewhere
                return self._recompute(pos, q)
            if isinstance(ins, Apply) and not _permeable(ins.gate, ins.operands.index(q), tol):
                found = self._owner_at(pos, q)
                if found is not None and not found[0].allocated:
                    return self._recompute(pos, q)
                raise ValueUnavailable(q, f"overwritten by {ins.gate.name}")
        return q

    def _owner_at(self, pos: int, q: int):
        for ins in reversed(self.circ.instructions[:pos]):
            if isinstance(ins, Alloc) and ins.qubit == q:
                return self.session.alloc_owner.get(ins)
        return None

    def _recompute(self, pos: int, q: int) -> int:
        found = self._owner_at(pos, q)
        if found is None:
            raise ValueUnavailable(q, "no recorded producer")
        owner, bit = found
        if owner.computation is None:
            raise ValueUnavailable(q, f"{owner.name} was deleted without uncomputation")
        chain = [(self.position(c), c) for c in owner.computation]
        chain = [(p, c) for p, c in chain if p < pos]
        key = (id(owner), len(chain))
        if key not in self.memo:
            ids, self.pool, self.fresh = self.session.take_ids(len(owner.qubits), self.pool, self.fresh)
            mapping = dict(zip(owner.qubits, ids))
            for q_new in ids:
                self.circ.append(Alloc(q_new))
            self.temps.extend(ids)
            for p, c in chain:
                ops = [mapping[x] if x in mapping else self.resolve(p, x) for x in c.operands]
                new = Apply(c.gate, tuple(ops))
                self.circ.append(new)
                self.replays.append((len(self.circ) - 1, new))
            self.memo[key] = mapping
        return self.memo[key][owner.qubits[bit]]


def _revert(session: Session, var: QuantumVariable, comp: list[Apply]):
    r = _Reverter(session, var)
    qset = set(var.qubits)
    plans = []
    for ins in comp:
        pos = r.position(ins)
        ops = tuple(q if q in qset else r.resolve(pos, q) for q in ins.operands)
        plans.append((ins, ops))
    pairs = []
    for ins, ops in reversed(plans):
        r.circ.append(Apply(inverse(ins.gate), ops))
        if ops == ins.operands:
            pairs.append((r.position(ins), len(r.circ) - 1))
    for q in var.qubits:
        r.circ.append(Dealloc(q))
    for p, ins in reversed(r.replays):
        r.circ.append(Apply(inverse(ins.gate), ins.operands))
        pairs.append((p, len(r.circ) - 1))
    for q in r.temps:
        r.circ.append(Dealloc(q))
    pool = sorted(set(r.pool) | set(r.temps) | qset)
    inserted = len(comp) + 2 * len(r.replays)
    return r.circ, pairs, inserted, pool, r.fresh, len(r.replays)


# -- phase tolerant substitution ----------------------------------------------


def substitute_phase_tolerant(circuit: Circuit, pairs, tol: float | None = None):
    """Swap compute/uncompute pairs for their phase tolerant equivalents.

    ``pairs`` holds instruction positions ``(compute, uncompute)``. A pair is
    replaced only when both act on the same operands and every instruction
    in between touches those qubits permeably; the relative phases of the
    replacement then cancel exactly. Returns ``(circuit, count, renamed)``
    where ``renamed`` maps replaced instructions to their substitutes.
    """
    from .linalg import TOL

    tol = TOL if tol is None else tol
    out = circuit.copy()
    renamed = {}
    count = 0
    for i, j in pairs:
        a, b = out.instructions[i], out.instructions[j]
        if not (isinstance(a, Apply) and isinstance(b, Apply)):
            continue
        make = PHASE_TOLERANT.get(a.gate.name)
        if make is None or b.gate is not inverse(a.gate) or a.operands != b.operands:
            continue
        if not _only_permeable_between(out, i, j, set(a.operands), tol):
            continue
        pt = make()
        out.instructions[i] = Apply(pt, a.operands)
        out.instructions[j] = Apply(inverse(pt), b.operands)
        renamed[a] = out.instructions[i]
        count += 1
    out.validate()
    return out, count, renamed


def _only_permeable_between(circuit: Circuit, i: int, j: int, qubits: set[int], tol) -> bool:
    lo, hi = min(i, j), max(i, j)
    for ins in circuit.instructions[lo + 1:hi]:
        for pos, q in enumerate(ins.qubits):
            if q not in qubits:
                continue
            if not isinstance(ins, Apply) or not _permeable(ins.gate, pos, tol):
                return False
    return True


# -- scopes -------------------------------------------------------------------


def _variables_in(obj) -> list[QuantumVariable]:
    if isinstance(obj, QuantumVariable):
        return [obj]
    if isinstance(obj, Qubit):
        return [obj.variable]
    if isinstance(obj, (list, tuple, set)):
        return [v for item in obj for v in _variables_in(item)]
    if isinstance(obj, dict):
        return _variables_in(list(obj.values()))
    return []


def auto_uncompute_scope(session: Session, body, *args, strategy: str | None = None, **kwargs):
    """Run ``body`` and uncompute every variable it allocated but did not return.

    Locals are uncomputed in reverse allocation order.
    """
    mark = len(session.allocation_log)
    result = body(*args, **kwargs)
    keep = {id(v) for v in _variables_in(result)}
    local = [v for v in session.allocation_log[mark:] if v.allocated and id(v) not in keep]
    for v in reversed(local):
        try:
            uncompute(session, v, strategy or INLINE)
        except UncomputeError as exc:
            exc.variable = v.name
            exc.args = (f"{v.name}: {exc}",)
            raise
    return result


def _find_session(args, kwargs) -> Session:
    for a in list(args) + list(kwargs.values()):
        if isinstance(a, Session):
            return a
        for v in _variables_in(a):
            return v.session
    raise SessionError("auto_uncompute needs a quantum variable or session argument")


def auto_uncompute(func):
    """Decorator form of :func:`auto_uncompute_scope`."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        return auto_uncompute_scope(_find_session(args, kwargs), func, *args, **kwargs)

    return wrapper
