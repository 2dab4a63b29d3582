"""
Uncomputing a local ancilla
===========================

Three bits are ANDed through one local ancilla. After ``result`` is written
the ancilla is uncomputed, which frees its qubit for the next allocation.
"""

from quncomp import Session, gates, sim, uncompute

s = Session()
a, b, c = s.qvar("a"), s.qvar("b"), s.qvar("c")
local, result = s.qvar("local"), s.qvar("result")

gates.mcx([a, b], local)
gates.mcx([local, c], result)
report = uncompute(s, local)
print(report)

# the compute/uncompute pair around the middle Toffoli became pt2cx / pt2cx_dg
for ins in s.circuit:
    print("   ", ins)

# a new variable lands on the freed qubit
d = s.qvar("d")
gates.cx(result, d)
print("d lives on qubit", d.qubits[0], "; physical qubits:", s.circuit.num_qubits)

# truth table by brute force simulation
for bits in sim.basis_inputs([a.qubits[0], b.qubits[0], c.qubits[0]]):
    hist = sim.histogram(s.circuit, [result, d], inputs=bits)
    print(list(bits.values()), hist)
