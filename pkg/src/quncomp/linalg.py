"""Dense complex linear algebra on 2^k x 2^k operators.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Qubit ordering
follows one convention everywhere in the package: position 0 of an operand
list is the most significant bit of the basis index.
"""

from __future__ import annotations

import os
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, QuncompError

#: tolerance for predicates (qfree, permeability, disentanglement)
TOL = float(os.environ.get("QUNCOMP_TOL", "1e-9"))
#: tolerance for exact algebraic identities
ALGEBRA_TOL = 1e-12


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def num_qubits(a: np.ndarray) -> int:
    dim = a.shape[0]
    k = dim.bit_length() - 1
    if dim != 1 << k:
        raise DimensionMismatch(f"dimension {dim} is not a power of two")
    return k


def identity(k: int) -> np.ndarray:
    """Identity on ``k`` qubits."""
    return np.eye(1 << k, dtype=complex)


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def dagger(a) -> np.ndarray:
    return as_matrix(a).conj().T


def max_abs_diff(a, b) -> float:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"cannot compare {a.shape} with {b.shape}")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)))


def is_unitary(a, tol: float = TOL) -> bool:
    a = as_matrix(a)
    return max_abs_diff(a @ dagger(a), np.eye(a.shape[0])) < tol


def commutator(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    return a @ b - b @ a


def embed(u, operand_positions: Sequence[int], total_qubits: int) -> np.ndarray:
    """Lift ``u`` to the full ``total_qubits`` space.

    ``u`` acts on the listed qubits (operand 0 is its most significant bit)
    and as the identity on every other qubit.
    """
    u = as_matrix(u)
    positions = list(operand_positions)
    k = len(positions)
    if u.shape[0] != 1 << k:
        raise DimensionMismatch(f"operator of dim {u.shape[0]} does not act on {k} qubits")
    if len(set(positions)) != k:
        raise QuncompError(f"duplicate operand position in {positions}")
    for p in positions:
        if not 0 <= p < total_qubits:
            raise QuncompError(f"operand position {p} out of range for {total_qubits} qubits")

    rest = [q for q in range(total_qubits) if q not in positions]
    # u on the leading axes, identity on the trailing ones, then permute axes into place
    full = np.kron(u, np.eye(1 << len(rest), dtype=complex))
    order = positions + rest
    n = total_qubits
    t = full.reshape([2] * (2 * n))
    inv = np.argsort(order)
    t = t.transpose(list(inv) + [n + i for i in inv])
    return t.reshape(1 << n, 1 << n)


def phase_normalized(a) -> np.ndarray:
    """Divide out the phase of the largest-magnitude entry."""
    a = np.asarray(a, dtype=complex)
    flat = a.ravel()
    if flat.size == 0:
        return a
    idx = int(np.argmax(np.abs(flat)))
    mag = abs(flat[idx])
    if mag == 0:
        return a
    return a * (mag / flat[idx])


def global_phase_distance(a, b) -> float:
    """``max_abs_diff`` after removing the global phase of each operand."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionMismatch(f"cannot compare {a.shape} with {b.shape}")
    if a.size == 0:
        return 0.0
    # use b's dominant index for both so near-ties in magnitude cannot pick different anchors
    idx = int(np.argmax(np.abs(b.ravel())))
    pa, pb = a.ravel()[idx], b.ravel()[idx]
    if abs(pa) == 0 or abs(pb) == 0:
        return float(np.max(np.abs(a - b)))
    return float(np.max(np.abs(a * (abs(pa) / pa) - b * (abs(pb) / pb))))


def equal_up_to_global_phase(a, b, tol: float = TOL) -> bool:
    return global_phase_distance(a, b) < tol


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
