"""
Permeability and commuting gates
================================

A gate is permeable on a qubit when it commutes with Z there, which is the
same as being block diagonal in that qubit. Two gates overlapping only on
qubits where both are permeable commute.
"""

import numpy as np

from quncomp import analysis, ir, linalg

rng = np.random.default_rng(7)

cx = ir.cx().builtin_unitary()
print("CX permeable on control, target:",
      [analysis.permeable_matrix(cx, q) for q in range(2)])

# a random controlled two-qubit gate: blocks on the leading qubit
blocks = [linalg.random_unitary(4, rng) for _ in range(2)]
v = np.zeros((8, 8), dtype=complex)
v[:4, :4], v[4:, 4:] = blocks
dec = analysis.block_decompose(v, 1)
print("reassembled:", linalg.max_abs_diff(dec.reassemble(), v))

# u is permeable on its last qubit: diagonal in it
d = [linalg.random_unitary(2, rng) for _ in range(2)]
u = np.kron(d[0], np.diag([1, 0])) + np.kron(d[1], np.diag([0, 1]))
print("u and v commute on a shared qubit:", analysis.check_theorem1(u, v, 1))
