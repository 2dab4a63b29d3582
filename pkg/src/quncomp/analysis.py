"""Qfree and permeability analysis of gates.

A gate is *qfree* when its unitary has exactly one nonzero entry per column,
and *permeable* on qubit ``i`` when it commutes with ``Z_i``. Permeability on
a qubit is equivalent to the unitary being block diagonal once that qubit is
moved to the leading position, which is what :func:`is_permeable` checks.
Builtins carry axiomatic verdicts, so wide multi-controlled gates never need a
matrix.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import NotPermeable, PreconditionViolation, WidthCapExceeded
from .ir import BUILTIN, GateDef

#: maximum arity for which a dense unitary is synthesized
WIDTH_CAP = 10


class Permeability(enum.Enum):
    PERMEABLE = "permeable"
    NOT_PERMEABLE = "not_permeable"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class PermeabilityVerdict:
    per_qubit: tuple[Permeability, ...]

    def __getitem__(self, i):
        return self.per_qubit[i]

    def __len__(self):
        return len(self.per_qubit)


@dataclass
class BlockDecomposition:
    p: int
    blocks: list[np.ndarray]

    def reassemble(self) -> np.ndarray:
        return reassemble(self)


def synthesize_unitary(gate: GateDef, width_cap: int = WIDTH_CAP) -> np.ndarray:
    """Unitary of ``gate``; composites are multiplied out from their definition."""
    if gate.arity > width_cap:
        raise WidthCapExceeded(f"gate {gate.name} has {gate.arity} qubits (cap {width_cap})")
    u = gate.cache.get("unitary")
    if u is not None:
        return u
    if gate.kind == BUILTIN:
        u = gate.builtin_unitary()
    else:
        u = linalg.identity(gate.arity)
        for ins in gate.definition:
            sub = synthesize_unitary(ins.gate, width_cap)
            u = linalg.embed(sub, ins.operands, gate.arity) @ u
    gate.cache["unitary"] = u
    return u


def qfree_matrix(u: np.ndarray, tol: float = linalg.TOL) -> bool:
    nonzero = np.abs(linalg.as_matrix(u)) > tol
    return bool(np.all(nonzero.sum(axis=0) == 1))


def is_qfree(gate: GateDef, tol: float = linalg.TOL) -> bool:
    """Judge the combined gate, never its constituents."""
    if gate.qfree_axiom is not None:
        return gate.qfree_axiom
    key = ("qfree", tol)
    if key not in gate.cache:
        gate.cache[key] = qfree_matrix(synthesize_unitary(gate), tol)
    return gate.cache[key]


def _off_diagonal_max(u: np.ndarray, qubit: int) -> float:
    n = linalg.num_qubits(u)
    t = u.reshape([2] * (2 * n))
    t = np.moveaxis(t, (qubit, n + qubit), (0, 1))
    if t[0, 1].size == 0:
        return 0.0
    return float(max(np.max(np.abs(t[0, 1])), np.max(np.abs(t[1, 0]))))


def permeable_matrix(u: np.ndarray, qubit: int, tol: float = linalg.TOL) -> bool:
    """Block-diagonal test on ``qubit``; linear in the number of matrix entries."""
    u = linalg.as_matrix(u)
    n = linalg.num_qubits(u)
    if not 0 <= qubit < n:
        raise IndexError(f"qubit {qubit} out of range for a {n}-qubit operator")
    return _off_diagonal_max(u, qubit) < tol


def commutes_with_z(u: np.ndarray, qubit: int, tol: float = linalg.TOL) -> bool:
    """Direct commutator check ``||U Z_i - Z_i U||_max < tol``."""
    u = linalg.as_matrix(u)
    n = linalg.num_qubits(u)
    zi = linalg.embed(np.diag([1, -1]), [qubit], n)
    return linalg.max_abs_diff(u @ zi, zi @ u) < tol


def is_permeable(gate: GateDef, qubit: int, tol: float = linalg.TOL) -> bool:
    if not 0 <= qubit < gate.arity:
        raise IndexError(f"gate {gate.name} has no operand {qubit}")
    if gate.permeable_axiom is not None:
        return gate.permeable_axiom[qubit]
    key = ("permeable", qubit, tol)
    if key not in gate.cache:
        gate.cache[key] = permeable_matrix(synthesize_unitary(gate), qubit, tol)
    return gate.cache[key]


def permeability(gate: GateDef, tol: float = linalg.TOL) -> PermeabilityVerdict:
    try:
        flags = [is_permeable(gate, i, tol) for i in range(gate.arity)]
    except WidthCapExceeded:
        return PermeabilityVerdict((Permeability.UNKNOWN,) * gate.arity)
    return PermeabilityVerdict(
        tuple(Permeability.PERMEABLE if f else Permeability.NOT_PERMEABLE for f in flags)
    )


def block_decompose(u: np.ndarray, p: int, tol: float = linalg.TOL) -> BlockDecomposition:
    """Split ``u`` into ``sum_i |i><i| (x) blocks[i]`` over its first ``p`` qubits."""
    u = linalg.as_matrix(u)
    n = linalg.num_qubits(u)
    if not 0 <= p <= n:
        raise ValueError(f"p={p} out of range for {n} qubits")
    P, R = 1 << p, 1 << (n - p)
    t = u.reshape(P, R, P, R)
    blocks = []
    for i in range(P):
        for j in range(P):
            if i != j and np.max(np.abs(t[i, :, j, :])) > tol:
                raise NotPermeable(f"off-diagonal block ({i}, {j}) is nonzero")
        blocks.append(t[i, :, i, :].copy())
    return BlockDecomposition(p, blocks)


def reassemble(dec: BlockDecomposition) -> np.ndarray:
    P = 1 << dec.p
    out = np.zeros((P * dec.blocks[0].shape[0],) * 2, dtype=complex)
    for i, b in enumerate(dec.blocks):
        proj = np.zeros((P, P))
        proj[i, i] = 1
        out += np.kron(proj, b)
    return out


def check_theorem1(u, v, p: int, tol: float = linalg.TOL) -> bool:
    """Whether ``u`` and ``v`` commute when overlapping on ``p`` qubits.

    ``u`` must be permeable on its last ``p`` qubits and ``v`` on its first
    ``p``; otherwise :class:`PreconditionViolation` is raised so that a bad
    input is never confused with a commutation failure.
    """
    u, v = linalg.as_matrix(u), linalg.as_matrix(v)
    n, m = linalg.num_qubits(u), linalg.num_qubits(v)
    if not 0 <= p <= min(n, m):
        raise PreconditionViolation(f"overlap p={p} invalid for n={n}, m={m}")
    for q in range(n - p, n):
        if not permeable_matrix(u, q, tol):
            raise PreconditionViolation(f"first operator is not permeable on its qubit {q}")
    for q in range(p):
        if not permeable_matrix(v, q, tol):
            raise PreconditionViolation(f"second operator is not permeable on its qubit {q}")
    a = np.kron(u, linalg.identity(m - p))
    b = np.kron(linalg.identity(n - p), v)
    return linalg.max_abs_diff(a @ b, b @ a) < tol
